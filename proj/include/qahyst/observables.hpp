#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qahyst/dynamics.hpp"
#include "qahyst/graph.hpp"
#include "qahyst/model.hpp"
#include "qahyst/schedule.hpp"

namespace qahyst {

/// -(1/N) sum_i sigma_i. The sign flip compensates for the +h sigma_z field term,
/// so a positive applied field reads as positive magnetization.
double magnetization(const SpinConfiguration& sample);

/// Fraction of unsatisfied couplings, (1/(2 N_e)) sum_<ij> [1 + sgn(J_ij) sigma_i sigma_j].
double frustration(const IsingModel& model, const SpinConfiguration& sample);

struct InternalField {
  std::vector<double> per_site;  // -sum_{j in N(i)} J_ij sigma_j
  double site_average = 0.0;
};

InternalField internal_field(const IsingModel& model, const SpinConfiguration& sample);

/// Sample-averaged observables at one slice.
struct ObservableRecord {
  double target_field = 0.0;
  SweepTag sweep_tag = SweepTag::InitialRamp;
  double mean_mz = 0.0;
  double std_mz = 0.0;  // population standard deviation across samples
  double mean_f = 0.0;
  double mean_h_internal = 0.0;
  std::size_t n_samples = 0;
};

ObservableRecord summarize(const IsingModel& model, const SampleSet& set, SweepTag tag);

/// Sum in a fixed pairwise order, so results do not depend on how the inputs were produced.
double pairwise_sum(std::span<const double> values);

enum class MsfNormalization { PerSite, Raw };
std::string to_string(MsfNormalization n);
MsfNormalization msf_normalization_from_string(const std::string& text);

/// Sample-averaged S(q) on a square grid of q = (qx, qy), each axis spanning
/// [q_min, q_max] inclusive with grid_size points.
struct StructureFactorGrid {
  std::size_t grid_size = 0;
  double q_min = 0.0;
  double q_max = 0.0;
  MsfNormalization normalization = MsfNormalization::PerSite;
  std::size_t n_avg = 0;
  /// Row-major: values[iy * grid_size + ix] is S at (q(ix), q(iy)).
  std::vector<double> values;

  double q(std::size_t index) const;
  double at(std::size_t ix, std::size_t iy) const { return values[iy * grid_size + ix]; }
};

/// S(q) = |sum_i exp(i q . r_i) sigma_i|^2 per sample, averaged over the first
/// n_avg samples; PerSite divides by N. Grid spans [-2 pi, 2 pi] by default.
StructureFactorGrid structure_factor(std::span<const SpinConfiguration> samples, std::span<const Point2> coords,
                                     std::size_t grid_size = 200, std::size_t n_avg = 100,
                                     MsfNormalization normalization = MsfNormalization::PerSite);

/// Same quantity at a single wave vector.
double structure_factor_at(std::span<const SpinConfiguration> samples, std::span<const Point2> coords, double qx,
                           double qy, std::size_t n_avg = 100, MsfNormalization normalization = MsfNormalization::PerSite);

/// Text grid file: a `# grid=G q_min=.. q_max=.. n_avg=.. normalization=..`
/// header, then G lines of G comma-separated values (row iy, column ix).
void write_structure_factor(std::ostream& out, const StructureFactorGrid& grid);
StructureFactorGrid read_structure_factor(std::istream& in);

enum class Axis { X, Y };

/// Two-point correlation along one lattice axis of a row-major rows x cols
/// spin array, averaged over the first n_avg samples and over every valid
/// starting site. Returns C(r) for r = 0 .. max_r (default: extent - 1).
///
/// Unconnected: <sigma(p) sigma(p + r e)>. Connected: the same minus m^2, divided
/// by 1 - m^2 with m the mean spin over the averaged samples, so C(0) = 1 either
/// way; a fully saturated set has connected C(r > 0) = 0.
std::vector<double> correlation_axis(std::span<const SpinConfiguration> samples, std::size_t rows, std::size_t cols,
                                     Axis axis, std::size_t n_avg = 100, bool connected = false,
                                     std::optional<std::size_t> max_r = std::nullopt);

/// xi = -1/slope of a least-squares line through (r, ln C(r)) for r = 1..r_max,
/// truncated at the first non-positive C. Returns +infinity when the slope is
/// not negative. Throws FitError with fewer than two usable points.
double fit_correlation_length(std::span<const double> correlation, std::size_t r_max);

}  // namespace qahyst
