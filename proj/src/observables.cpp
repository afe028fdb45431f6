#include "qahyst/observables.hpp"

#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <ostream>
#include <map>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "qahyst/errors.hpp"

namespace qahyst {

double magnetization(const SpinConfiguration& sample) {
  if (sample.spins.empty()) throw ValidationError("magnetization of an empty sample");
  long sum = 0;
  for (auto s : sample.spins) sum += s;
  return -static_cast<double>(sum) / static_cast<double>(sample.size());
}

namespace {

void check_sample(const IsingModel& model, const SpinConfiguration& sample) {
  if (sample.size() != model.spin_count())
    throw ValidationError(fmt::format("sample has {} spins, model has {}", sample.size(), model.spin_count()));
}

}  // namespace

double frustration(const IsingModel& model, const SpinConfiguration& sample) {
  check_sample(model, sample);
  const auto edges = model.graph().edges();
  if (edges.empty()) throw ValidationError("frustration is undefined for a model without couplings");
  long unsatisfied = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    double j = model.couplings()[k];
    if (j == 0.0) throw ValidationError(fmt::format("coupling {} is zero; sgn(J) undefined", k));
    int sgn = j > 0 ? 1 : -1;
    unsatisfied += 1 + sgn * sample.spins[edges[k].u] * sample.spins[edges[k].v];
  }
  return static_cast<double>(unsatisfied) / (2.0 * static_cast<double>(edges.size()));
}

InternalField internal_field(const IsingModel& model, const SpinConfiguration& sample) {
  check_sample(model, sample);
  const auto& g = model.graph();
  InternalField out;
  out.per_site.resize(g.node_count());
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    auto nb = g.neighbors(i);
    auto ids = g.incident_edges(i);
    double h = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) h -= model.couplings()[ids[k]] * sample.spins[nb[k]];
    out.per_site[i] = h;
  }
  out.site_average = pairwise_sum(out.per_site) / static_cast<double>(g.node_count());
  return out;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

ObservableRecord summarize(const IsingModel& model, const SampleSet& set, SweepTag tag) {
  const auto n = set.samples.size();
  if (n == 0) throw ValidationError("cannot summarize an empty sample set");
  std::vector<double> mz(n), f(n), hin(n);
  for (std::size_t k = 0; k < n; ++k) {
    mz[k] = magnetization(set.samples[k]);
    f[k] = frustration(model, set.samples[k]);
    hin[k] = internal_field(model, set.samples[k]).site_average;
  }
  ObservableRecord r;
  r.target_field = set.target_field;
  r.sweep_tag = tag;
  r.n_samples = n;
  r.mean_mz = pairwise_sum(mz) / static_cast<double>(n);
  r.mean_f = pairwise_sum(f) / static_cast<double>(n);
  r.mean_h_internal = pairwise_sum(hin) / static_cast<double>(n);
  std::vector<double> dev(n);
  for (std::size_t k = 0; k < n; ++k) dev[k] = (mz[k] - r.mean_mz) * (mz[k] - r.mean_mz);
  r.std_mz = std::sqrt(pairwise_sum(dev) / static_cast<double>(n));
  return r;
}

std::string to_string(MsfNormalization n) { return n == MsfNormalization::PerSite ? "per-site" : "raw"; }

MsfNormalization msf_normalization_from_string(const std::string& text) {
  if (text == "per-site") return MsfNormalization::PerSite;
  if (text == "raw") return MsfNormalization::Raw;
  throw ValidationError("unknown MSF normalization '" + text + "'");
}

double StructureFactorGrid::q(std::size_t index) const {
  if (grid_size == 1) return 0.5 * (q_min + q_max);
  return q_min + (q_max - q_min) * static_cast<double>(index) / static_cast<double>(grid_size - 1);
}

namespace {

std::size_t check_msf_inputs(std::span<const SpinConfiguration> samples, std::span<const Point2> coords,
                             std::size_t n_avg) {
  if (coords.empty()) throw ValidationError("structure factor needs node coordinates");
  if (n_avg == 0) throw ValidationError("n_avg must be at least 1");
  if (n_avg > samples.size())
    throw ValidationError(fmt::format("n_avg {} exceeds the {} available samples", n_avg, samples.size()));
  for (std::size_t k = 0; k < n_avg; ++k)
    if (samples[k].size() != coords.size()) throw ValidationError("sample length does not match coordinate count");
  return coords.size();
}

}  // namespace

StructureFactorGrid structure_factor(std::span<const SpinConfiguration> samples, std::span<const Point2> coords,
                                     std::size_t grid_size, std::size_t n_avg, MsfNormalization normalization) {
  const std::size_t n = check_msf_inputs(samples, coords, n_avg);
  if (grid_size == 0) throw ValidationError("grid_size must be positive");

  StructureFactorGrid grid;
  grid.grid_size = grid_size;
  grid.q_min = -2.0 * std::numbers::pi;
  grid.q_max = 2.0 * std::numbers::pi;
  grid.normalization = normalization;
  grid.n_avg = n_avg;
  grid.values.assign(grid_size * grid_size, 0.0);

  // exp(i(qx x + qy y)) factorizes, so bucket nodes by y: the inner sum over
  // each bucket depends only on qx, and the outer sum over buckets only on qy.
  std::map<double, std::size_t> bucket_of_y;
  for (const auto& p : coords) bucket_of_y.emplace(p.y, 0);
  std::vector<double> ys;
  for (auto& [y, b] : bucket_of_y) {
    b = ys.size();
    ys.push_back(y);
  }
  const std::size_t nb = ys.size();
  std::vector<std::size_t> bucket(n);
  for (std::size_t i = 0; i < n; ++i) bucket[i] = bucket_of_y.at(coords[i].y);

  using cplx = std::complex<double>;
  std::vector<cplx> phase_x(grid_size * n);
  std::vector<cplx> phase_y(grid_size * nb);
  for (std::size_t a = 0; a < grid_size; ++a) {
    const double q = grid.q(a);
    for (std::size_t i = 0; i < n; ++i) phase_x[a * n + i] = std::polar(1.0, q * coords[i].x);
    for (std::size_t b = 0; b < nb; ++b) phase_y[a * nb + b] = std::polar(1.0, q * ys[b]);
  }

  std::vector<cplx> partial(grid_size * nb);
  for (std::size_t s = 0; s < n_avg; ++s) {
    const auto& spins = samples[s].spins;
    std::fill(partial.begin(), partial.end(), cplx{});
    for (std::size_t ix = 0; ix < grid_size; ++ix) {
      const cplx* px = &phase_x[ix * n];
      cplx* row = &partial[ix * nb];
      for (std::size_t i = 0; i < n; ++i) row[bucket[i]] += px[i] * static_cast<double>(spins[i]);
    }
    for (std::size_t iy = 0; iy < grid_size; ++iy) {
      const cplx* py = &phase_y[iy * nb];
      for (std::size_t ix = 0; ix < grid_size; ++ix) {
        const cplx* row = &partial[ix * nb];
        cplx f{};
        for (std::size_t b = 0; b < nb; ++b) f += py[b] * row[b];
        grid.values[iy * grid_size + ix] += std::norm(f);
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(n_avg) /
                       (normalization == MsfNormalization::PerSite ? static_cast<double>(n) : 1.0);
  for (auto& v : grid.values) v *= scale;
  return grid;
}

double structure_factor_at(std::span<const SpinConfiguration> samples, std::span<const Point2> coords, double qx,
                           double qy, std::size_t n_avg, MsfNormalization normalization) {
  const std::size_t n = check_msf_inputs(samples, coords, n_avg);
  std::vector<std::complex<double>> phase(n);
  for (std::size_t i = 0; i < n; ++i) phase[i] = std::polar(1.0, qx * coords[i].x + qy * coords[i].y);
  double total = 0.0;
  for (std::size_t s = 0; s < n_avg; ++s) {
    std::complex<double> f{};
    for (std::size_t i = 0; i < n; ++i) f += phase[i] * static_cast<double>(samples[s].spins[i]);
    total += std::norm(f);
  }
  total /= static_cast<double>(n_avg);
  return normalization == MsfNormalization::PerSite ? total / static_cast<double>(n) : total;
}

std::vector<double> correlation_axis(std::span<const SpinConfiguration> samples, std::size_t rows, std::size_t cols,
                                     Axis axis, std::size_t n_avg, bool connected, std::optional<std::size_t> max_r) {
  if (rows == 0 || cols == 0) throw ValidationError("grid shape must be positive");
  if (n_avg == 0 || n_avg > samples.size())
    throw ValidationError(fmt::format("n_avg {} not in [1, {}]", n_avg, samples.size()));
  for (std::size_t k = 0; k < n_avg; ++k)
    if (samples[k].size() != rows * cols) throw ValidationError("sample length does not match grid shape");
  const std::size_t extent = axis == Axis::X ? cols : rows;
  const std::size_t r_last = max_r.value_or(extent - 1);
  if (r_last >= extent)
    throw RangeError(fmt::format("separation {} exceeds lattice extent {} along the axis", r_last, extent));

  std::vector<double> c(r_last + 1, 0.0);
  for (std::size_t r = 0; r <= r_last; ++r) {
    long sum = 0;
    std::size_t pairs = 0;
    for (std::size_t s = 0; s < n_avg; ++s) {
      const auto& sp = samples[s].spins;
      for (std::size_t y = 0; y < rows; ++y) {
        for (std::size_t x = 0; x < cols; ++x) {
          std::size_t x2 = axis == Axis::X ? x + r : x;
          std::size_t y2 = axis == Axis::Y ? y + r : y;
          if (x2 >= cols || y2 >= rows) continue;
          sum += sp[y * cols + x] * sp[y2 * cols + x2];
          ++pairs;
        }
      }
    }
    c[r] = static_cast<double>(sum) / static_cast<double>(pairs);
  }
  if (connected) {
    long total = 0;
    for (std::size_t s = 0; s < n_avg; ++s)
      for (auto v : samples[s].spins) total += v;
    const double m = static_cast<double>(total) / static_cast<double>(n_avg * rows * cols);
    const double var = 1.0 - m * m;
    for (std::size_t r = 0; r <= r_last; ++r) c[r] = var > 0 ? (c[r] - m * m) / var : (r == 0 ? 1.0 : 0.0);
  }
  return c;
}

double fit_correlation_length(std::span<const double> c, std::size_t r_max) {
  std::vector<double> xs, ys;
  for (std::size_t r = 1; r <= r_max && r < c.size(); ++r) {
    if (!(c[r] > 0)) break;
    xs.push_back(static_cast<double>(r));
    ys.push_back(std::log(c[r]));
  }
  if (xs.size() < 2) throw FitError(fmt::format("only {} positive correlation values in r = 1..{}", xs.size(), r_max));
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  const double slope = sxy / sxx;
  if (!(slope < 0)) return std::numeric_limits<double>::infinity();
  return -1.0 / slope;
}

void write_structure_factor(std::ostream& out, const StructureFactorGrid& grid) {
  out << fmt::format("# grid={} q_min={} q_max={} n_avg={} normalization={}\n", grid.grid_size, grid.q_min,
                     grid.q_max, grid.n_avg, to_string(grid.normalization));
  for (std::size_t iy = 0; iy < grid.grid_size; ++iy) {
    for (std::size_t ix = 0; ix < grid.grid_size; ++ix) out << (ix ? "," : "") << fmt::format("{}", grid.at(ix, iy));
    out << '\n';
  }
}

StructureFactorGrid read_structure_factor(std::istream& in) {
  StructureFactorGrid grid;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ParseError("missing structure-factor header", 1);
  std::istringstream header(line.substr(2));
  bool have_size = false;
  for (std::string field; header >> field;) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("bad header field '" + field + "'", 1);
    auto key = field.substr(0, eq), value = field.substr(eq + 1);
    try {
      if (key == "grid") {
        grid.grid_size = std::stoul(value);
        have_size = true;
      } else if (key == "q_min") {
        grid.q_min = std::stod(value);
      } else if (key == "q_max") {
        grid.q_max = std::stod(value);
      } else if (key == "n_avg") {
        grid.n_avg = std::stoul(value);
      } else if (key == "normalization") {
        grid.normalization = msf_normalization_from_string(value);
      }
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("bad header value for " + key, 1);
    }
  }
  if (!have_size || grid.grid_size == 0) throw ParseError("header lacks grid size", 1);
  grid.values.reserve(grid.grid_size * grid.grid_size);
  std::size_t line_no = 1;
  while (grid.values.size() < grid.grid_size * grid.grid_size && std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::size_t count = 0;
    for (std::string cell; std::getline(row, cell, ',');) {
      try {
        grid.values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("bad value '" + cell + "'", line_no);
      }
      ++count;
    }
    if (count != grid.grid_size) throw ParseError(fmt::format("expected {} values", grid.grid_size), line_no);
  }
  if (grid.values.size() != grid.grid_size * grid.grid_size) throw ParseError("structure-factor grid is truncated");
  return grid;
}

}  // namespace qahyst
