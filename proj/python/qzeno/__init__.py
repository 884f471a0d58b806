"""Quantum-jump simulator for Zeno and anti-Zeno dynamics."""

from ._core import (
    ConfigError,
    DetectorParams,
    DriveParams,
    RatePrediction,
    ReservoirSpec,
    SimulationError,
    __version__,
    anti_zeno_rate,
    coherence_factor,
    config_text,
    corrected_free_decay_rate,
    fit_exponential_rate,
    golden_rule_rate,
    laplace_decay_rate,
    measured_decay_rate,
    measured_decay_rate_series,
    measurement_time,
    preset_names,
    rabi_amplitude,
    rate_equation_population,
    resolvent,
    simulate,
    validate,
    zeno_transition_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
