#include "qahyst/device.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace qahyst {

SingularityError::SingularityError(double s)
    : ValidationError(fmt::format("B(s) = 0 at s = {}; Gamma/J is undefined", s)), s_(s) {}

namespace {

enum class Column { A, B };

double interpolate(const std::vector<ScheduleRow>& table, double s, Column col) {
  if (!(s >= 0.0 && s <= 1.0)) throw RangeError(fmt::format("anneal fraction {} outside [0, 1]", s));
  auto value = [col](const ScheduleRow& r) { return col == Column::A ? r.a_ghz : r.b_ghz; };
  auto hi = std::lower_bound(table.begin(), table.end(), s, [](const ScheduleRow& r, double x) { return r.s < x; });
  if (hi == table.end()) return value(table.back());
  if (hi->s == s || hi == table.begin()) return value(*hi);
  auto lo = hi - 1;
  double w = (s - lo->s) / (hi->s - lo->s);
  return value(*lo) + w * (value(*hi) - value(*lo));
}

}  // namespace

double DeviceProfile::a(double s) const { return interpolate(table, s, Column::A); }
double DeviceProfile::b(double s) const { return interpolate(table, s, Column::B); }

void validate(const DeviceProfile& p) {
  if (p.table.size() < 2) throw ValidationError("schedule table needs at least two rows");
  if (p.table.front().s != 0.0) throw ValidationError("schedule table must start at s = 0");
  if (p.table.back().s != 1.0) throw ValidationError("schedule table must end at s = 1");
  for (std::size_t k = 0; k < p.table.size(); ++k) {
    const auto& r = p.table[k];
    if (!std::isfinite(r.a_ghz) || !std::isfinite(r.b_ghz) || r.a_ghz < 0 || r.b_ghz < 0)
      throw ValidationError(fmt::format("row {}: energies must be finite and non-negative", k));
    if (k == 0) continue;
    const auto& prev = p.table[k - 1];
    if (!(r.s > prev.s)) throw ValidationError(fmt::format("row {}: s not strictly increasing", k));
    if (r.a_ghz > prev.a_ghz) throw ValidationError(fmt::format("row {}: A(s) increases at s = {}", k, r.s));
    if (r.b_ghz < prev.b_ghz) throw ValidationError(fmt::format("row {}: B(s) decreases at s = {}", k, r.s));
  }
  if (!(p.h_gain_max > 0)) throw ValidationError("h_gain_max must be positive");
  if (p.max_hgain_points < 2 || p.max_anneal_points < 2) throw ValidationError("waveform point limits must be >= 2");
  if (!(p.time_resolution_us > 0)) throw ValidationError("time_resolution must be positive");
  if (!(p.min_anneal_time_us >= 0)) throw ValidationError("min_anneal_time must be non-negative");
}

DeviceProfile load_profile(std::istream& in) {
  DeviceProfile p;
  std::string line;
  std::size_t line_no = 0;
  auto number = [&](const std::string& text) {
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(fmt::format("expected a number, got '{}'", text), line_no);
  };
  auto integer = [&](const std::string& text) {
    double v = number(text);
    if (v != std::floor(v)) throw ParseError(fmt::format("expected an integer, got '{}'", text), line_no);
    return static_cast<int>(v);
  };

  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);

    if (auto eq = line.find('='); eq != std::string::npos) {
      auto key = line.substr(0, eq);
      auto val = line.substr(eq + 1);
      if (key == "name") p.name = val;
      else if (key == "h_gain_max") p.h_gain_max = number(val);
      else if (key == "max_hgain_points") p.max_hgain_points = integer(val);
      else if (key == "max_anneal_points") p.max_anneal_points = integer(val);
      else if (key == "min_anneal_time") p.min_anneal_time_us = number(val);
      else if (key == "time_resolution") p.time_resolution_us = number(val);
      else throw ParseError("unknown profile key '" + key + "'", line_no);
      continue;
    }
    if (line == "s,A,B") continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 3) throw ParseError("schedule row must be 's,A,B'", line_no);
    p.table.push_back({number(cells[0]), number(cells[1]), number(cells[2])});
  }
  validate(p);
  return p;
}

DeviceProfile load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile '" + path + "'");
  auto p = load_profile(in);
  if (p.name.empty()) p.name = path;
  return p;
}

void save_profile(std::ostream& out, const DeviceProfile& p) {
  out << "name=" << p.name << '\n';
  out << fmt::format("h_gain_max={}\n", p.h_gain_max);
  out << "max_hgain_points=" << p.max_hgain_points << '\n';
  out << "max_anneal_points=" << p.max_anneal_points << '\n';
  out << fmt::format("min_anneal_time={}\n", p.min_anneal_time_us);
  out << fmt::format("time_resolution={}\n", p.time_resolution_us);
  out << "s,A,B\n";
  for (const auto& r : p.table) out << fmt::format("{},{},{}\n", r.s, r.a_ghz, r.b_ghz);
}

double gamma_over_j(const DeviceProfile& profile, double s) {
  double b = profile.b(s);
  if (b == 0.0) throw SingularityError(s);
  return profile.a(s) / b;
}

DeviceProfile synthetic_profile() {
  DeviceProfile p;
  p.name = "synthetic";
  p.h_gain_max = 4.0;
  for (int k = 0; k <= 100; ++k) {
    double s = k / 100.0;
    p.table.push_back({s, 6.0 * (1.0 - s) * (1.0 - s), 12.0 * s * s * s});
  }
  validate(p);
  return p;
}

}  // namespace qahyst
