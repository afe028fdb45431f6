#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qahyst/errors.hpp"

namespace qahyst {

/// A(s)/B(s) lookup hit B = 0.
class SingularityError : public ValidationError {
 public:
  explicit SingularityError(double s);
  double s() const noexcept { return s_; }

 private:
  double s_;
};

struct ScheduleRow {
  double s;
  double a_ghz;
  double b_ghz;
};

/// Energy-scale curves and programming limits of one annealer.
struct DeviceProfile {
  std::string name;
  /// Sorted strictly by s, covering 0 and 1; A non-increasing, B non-decreasing.
  std::vector<ScheduleRow> table;
  double h_gain_max = 1.0;
  int max_hgain_points = 20;
  int max_anneal_points = 12;
  double min_anneal_time_us = 0.5;
  double time_resolution_us = 0.01;

  /// Transverse energy scale A(s), linear between rows.
  double a(double s) const;
  /// Problem energy scale B(s), linear between rows.
  double b(double s) const;
  /// Gamma = A(s) / 2.
  double gamma(double s) const { return 0.5 * a(s); }
};

/// Throws ValidationError describing the first broken invariant.
void validate(const DeviceProfile& profile);

/// Header lines `key=value` (name, h_gain_max, max_hgain_points,
/// max_anneal_points, min_anneal_time, time_resolution), optional `s,A,B`
/// column line, then `s,A,B` rows. `#` starts a comment.
DeviceProfile load_profile(std::istream& in);
DeviceProfile load_profile_file(const std::string& path);
void save_profile(std::ostream& out, const DeviceProfile& profile);

/// A(s)/B(s). Throws RangeError for s outside [0, 1] and SingularityError where B(s) = 0.
double gamma_over_j(const DeviceProfile& profile, double s);

/// Built-in stand-in for vendor calibration data, tabulated at s = 0, 0.01, ..., 1:
///   A(s) = 6 (1 - s)^2 GHz,  B(s) = 12 s^3 GHz,
/// with h_gain_max = 4.
DeviceProfile synthetic_profile();

}  // namespace qahyst
