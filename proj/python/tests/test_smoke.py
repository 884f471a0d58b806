import math

import numpy as np
import pytest

import qzeno


def test_measurement_time():
    assert qzeno.measurement_time(10.0, 1.0) == pytest.approx(5.0)


def test_measured_decay_rate():
    res = qzeno.ReservoirSpec()
    p = qzeno.measured_decay_rate(res, 5.0)
    gamma0 = qzeno.golden_rule_rate(res).rate
    assert p.rate == pytest.approx(gamma0 * 2 / math.pi * math.atan(2.5))
    assert p.formula_id == "measured_decay_arctan"


def test_anti_zeno_note():
    p = qzeno.anti_zeno_rate(qzeno.ReservoirSpec(slope=2.0), 5.0)
    assert "series marginal" in p.validity_note


def test_presets():
    names = qzeno.preset_names()
    assert names[0] == "fig1" and names[-1] == "fig12"
    assert "n_trajectories = 1000" in qzeno.config_text("fig2")


def test_simulate_detector():
    out = qzeno.simulate("fig2", {"run.n_trajectories": "200", "output.observables": "rho_aa,coh_re"})
    t = out["t"]
    assert t[0] == 0.0 and t[-1] == pytest.approx(30.0)
    assert out["n_trajectories"] == 200
    aa = out["mean"]["rho_aa"]
    assert np.all((aa >= 0) & (aa <= 1))
    assert out["std_error"]["coh_re"][0] == 0.0


def test_simulate_is_deterministic():
    a = qzeno.simulate("fig2", {"run.n_trajectories": "50"}, workers=1)
    b = qzeno.simulate("fig2", {"run.n_trajectories": "50"}, workers=2)
    assert np.array_equal(a["mean"]["rho_aa"], b["mean"]["rho_aa"])


def test_free_decay_rate():
    out = qzeno.simulate("fig7")
    rate, _ = qzeno.fit_exponential_rate(out["t"], out["mean"]["rho_ee"], 50.0, 250.0)
    assert rate == pytest.approx(0.01, rel=0.05)


def test_config_error():
    with pytest.raises(qzeno.ConfigError):
        qzeno.simulate("fig2", {"run.bogus": "1"})
    with pytest.raises(ValueError):
        qzeno.simulate("fig2", {"run.dt": "-1"})


def test_engine_suite():
    (result,) = qzeno.validate("engine", n_trajectories=20)
    assert result["passed"], result["detail"]
