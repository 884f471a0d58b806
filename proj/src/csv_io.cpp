#include "qzeno/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "qzeno/errors.hpp"

namespace qzeno {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse(const std::string& cell, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw DomainError("bad number '" + cell + "' on CSV line " + std::to_string(line));
  }
  return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <typename Writer>
void to_file(const std::string& path, Writer&& write) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  write(out);
  if (!out) throw DomainError("error while writing '" + path + "'");
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

void write_ensemble_csv(std::ostream& out, const EnsembleStatistics& stats) {
  out << 't';
  for (const auto& name : stats.names) out << ',' << name << "_mean," << name << "_stderr";
  out << '\n';
  for (std::size_t j = 0; j < stats.times.size(); ++j) {
    out << format_number(stats.times[j]);
    for (std::size_t k = 0; k < stats.names.size(); ++k) {
      out << ',' << format_number(stats.mean[k][j]) << ',' << format_number(stats.std_error[k][j]);
    }
    out << '\n';
  }
}

void write_ensemble_csv(const std::string& path, const EnsembleStatistics& stats) {
  to_file(path, [&](std::ostream& out) { write_ensemble_csv(out, stats); });
}

EnsembleStatistics read_ensemble_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty CSV");
  const auto header = split(line);
  if (header.empty() || header[0] != "t" || header.size() % 2 != 1) {
    throw DomainError("CSV header must be t followed by mean/stderr pairs");
  }
  EnsembleStatistics s;
  for (std::size_t i = 1; i < header.size(); i += 2) {
    if (!ends_with(header[i], "_mean") || !ends_with(header[i + 1], "_stderr")) {
      throw DomainError("unexpected CSV columns '" + header[i] + "', '" + header[i + 1] + "'");
    }
    const std::string name = header[i].substr(0, header[i].size() - 5);
    if (header[i + 1] != name + "_stderr") throw DomainError("unpaired CSV column '" + header[i + 1] + "'");
    s.names.push_back(name);
  }
  s.mean.resize(s.names.size());
  s.std_error.resize(s.names.size());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw DomainError("CSV line " + std::to_string(line_no) + " has the wrong number of cells");
    }
    s.times.push_back(parse(cells[0], line_no));
    for (std::size_t k = 0; k < s.names.size(); ++k) {
      s.mean[k].push_back(parse(cells[1 + 2 * k], line_no));
      s.std_error[k].push_back(parse(cells[2 + 2 * k], line_no));
    }
  }
  return s;
}

EnsembleStatistics read_ensemble_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_ensemble_csv(in);
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& r) {
  out << 't';
  for (const auto& name : r.names) out << ',' << name;
  out << ",jump\n";
  for (std::size_t j = 0; j < r.times.size(); ++j) {
    out << format_number(r.times[j]);
    for (const auto& v : r.values) out << ',' << format_number(v[j]);
    out << ',' << static_cast<int>(r.jumped[j]) << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& record) {
  to_file(path, [&](std::ostream& out) { write_trajectory_csv(out, record); });
}

}  // namespace qzeno
