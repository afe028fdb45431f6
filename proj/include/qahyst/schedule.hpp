#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qahyst/device.hpp"

namespace qahyst {

struct WavePoint {
  double t_us;
  double value;
};

/// Piecewise-linear control signal defined by knots with strictly increasing times.
class Waveform {
 public:
  Waveform() = default;
  explicit Waveform(std::vector<WavePoint> points);

  std::span<const WavePoint> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double start_time() const { return points_.front().t_us; }
  double end_time() const { return points_.back().t_us; }
  double final_value() const { return points_.back().value; }

  /// Linear interpolation; exact at knots. Throws RangeError outside the knot span.
  double operator()(double t_us) const;

 private:
  std::vector<WavePoint> points_;
};

inline double evaluate(const Waveform& w, double t_us) { return w(t_us); }

/// Constant signal over [0, duration].
Waveform constant_waveform(double value, double duration_us);

enum class SweepTag { InitialRamp, Forward, Backward };

std::string to_string(SweepTag tag);
SweepTag sweep_tag_from_string(const std::string& text);

struct TimelineOptions {
  double total_time_us = 11.2;
  double ramp_time_us = 0.5;
  double pause_time_us = 0.1;
  double gquench_time_us = 0.020;
  int points_per_segment = 100;
  /// Programmed uniform h; measured field is H = g(t) * field_coefficient.
  double field_coefficient = 1.0;
  /// Optional cap on |dg/dt| (per microsecond) for every emitted h-gain waveform.
  std::optional<double> max_hgain_slope;
};

/// The full two-sweep protocol: s ramps to s_target, g(t) traces
/// 0 -> +H -> 0 -> -H -> 0 -> +H over five equal segments, and each slice
/// time marks one measurement point.
struct ProtocolTimeline {
  double s_target = 0.0;
  double h_max = 0.0;
  TimelineOptions options;

  double time_resolution_us = 0.01;
  int max_hgain_points = 20;
  int max_anneal_points = 12;
  double min_anneal_time_us = 0.5;

  /// Field region [field_start, field_end] and segment corners, in ticks of time_resolution.
  std::int64_t field_start_tick = 0;
  std::int64_t field_end_tick = 0;
  std::vector<std::int64_t> corner_ticks;  // six entries: field_start .. field_end
  std::vector<double> corner_values;       // h-gain at each corner

  Waveform anneal_waveform;
  Waveform hgain_waveform;
  std::vector<std::int64_t> slice_ticks;
  std::vector<double> slice_times;   // microseconds
  std::vector<double> slice_fields;  // H = g(t_k) * field_coefficient
  std::vector<SweepTag> slice_tags;

  std::size_t slice_count() const noexcept { return slice_times.size(); }
  /// Index of the first slice after the polarization ramp.
  std::size_t loop_begin() const noexcept { return static_cast<std::size_t>(options.points_per_segment); }
  double tick_to_us(std::int64_t tick) const noexcept;
};

/// Rounds half-up to the resolution grid, returning the tick count.
std::int64_t snap_to_ticks(double t_us, double resolution_us);

/// Tick count back to microseconds; divides by the tick rate when it is
/// integral so that 70 ticks of 0.01 us give exactly 0.7.
double ticks_to_us(std::int64_t tick, double resolution_us) noexcept;

ProtocolTimeline build_timeline(const DeviceProfile& profile, double s_target, double h_max,
                                const TimelineOptions& options = {});

/// One measurement schedule: the protocol truncated at a slice time, followed by
/// the h-gain quench to zero within the pause and the readout ramp to s = 1.
struct SliceSchedule {
  Waveform anneal;
  Waveform hgain;
  double total_time_us = 0.0;
  double slice_time_us = 0.0;
  double target_field = 0.0;
  std::size_t slice_index = 0;
  SweepTag sweep_tag = SweepTag::InitialRamp;
};

SliceSchedule slice_at(const ProtocolTimeline& timeline, std::size_t k);

/// `{"anneal_schedule": [[t, s], ...], "h_gain_schedule": [[t, g], ...], ...}`
std::string slice_to_json(const SliceSchedule& slice);

}  // namespace qahyst
