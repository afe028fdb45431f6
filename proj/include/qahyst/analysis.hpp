#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qahyst/device.hpp"
#include "qahyst/observables.hpp"

namespace qahyst {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson limiting with
/// the weighted-harmonic-mean interior slopes and one-sided three-point end
/// slopes, as in SciPy's PchipInterpolator).
class Pchip {
 public:
  /// xs strictly increasing or strictly decreasing, at least two points.
  Pchip(std::span<const double> xs, std::span<const double> ys);

  /// Throws RangeError outside [min(xs), max(xs)].
  double operator()(double x) const;
  double x_min() const noexcept { return xs_.front(); }
  double x_max() const noexcept { return xs_.back(); }
  std::span<const double> slopes() const noexcept { return d_; }

 private:
  std::vector<double> xs_, ys_, d_;
};

/// Trapezoid rule on samples ys at abscissae xs.
double trapezoid(std::span<const double> xs, std::span<const double> ys);

struct SweepPoint {
  double h;
  double m;
};

/// Observable vs applied field along one sweep direction, in measurement order.
struct SweepCurve {
  std::vector<SweepPoint> points;
};

/// Area between two sweeps: both are PCHIP-resampled onto n_interp uniform
/// fields over their common range and the trapezoid integral of
/// |M_back - M_fwd| is returned (not normalized).
///
/// Sweeps whose field reverses direction are cut into monotone pieces and the
/// closed-path integral |sum over pieces of int M dH| is returned instead.
double loop_area(const SweepCurve& forward, const SweepCurve& backward, std::size_t n_interp = 10000);

struct TraceRecord {
  std::size_t slice_index = 0;
  double time_us = 0.0;
  ObservableRecord obs;
  bool valid = true;
};

struct LoopReport {
  double s_value = 0.0;
  double gamma_over_j = 0.0;
  double area = 0.0;
  double closure_gap = 0.0;
  double symmetry_deviation = 0.0;
};

enum class LoopObservable { Magnetization, Frustration, InternalField };

SweepCurve sweep_curve(std::span<const TraceRecord> trace, SweepTag tag,
                       LoopObservable what = LoopObservable::Magnetization);

/// Assembles forward/backward magnetization sweeps (initial-ramp and invalid
/// records excluded) and computes area, closure gap
/// |M(first forward) - M(last backward)| and symmetry deviation
/// max_H |M_fwd(H) + M_back(-H)| / 2 on the interpolation grid.
LoopReport loop_report(std::span<const TraceRecord> trace, double s, const DeviceProfile& profile,
                       std::size_t n_interp = 10000);

/// Header `s,gamma_over_j,area,closure_gap,symmetry_deviation`.
void write_loop_reports(std::ostream& out, std::span<const LoopReport> reports);

}  // namespace qahyst
