#include "qahyst/schedule.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "qahyst/errors.hpp"

namespace qahyst {

Waveform::Waveform(std::vector<WavePoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("waveform needs at least one point");
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!std::isfinite(points_[k].t_us) || !std::isfinite(points_[k].value))
      throw ValidationError(fmt::format("waveform point {} is not finite", k));
    if (k > 0 && !(points_[k].t_us > points_[k - 1].t_us))
      throw ValidationError(fmt::format("waveform times not strictly increasing at point {} (t = {})", k, points_[k].t_us));
  }
}

double Waveform::operator()(double t) const {
  if (points_.empty() || !(t >= points_.front().t_us && t <= points_.back().t_us))
    throw RangeError(fmt::format("time {} us outside waveform span", t));
  auto hi = std::lower_bound(points_.begin(), points_.end(), t,
                             [](const WavePoint& p, double x) { return p.t_us < x; });
  if (hi->t_us == t || hi == points_.begin()) return hi->value;
  auto lo = hi - 1;
  double w = (t - lo->t_us) / (hi->t_us - lo->t_us);
  return lo->value + w * (hi->value - lo->value);
}

Waveform constant_waveform(double value, double duration_us) {
  if (!(duration_us > 0)) throw ValidationError("constant waveform needs a positive duration");
  return Waveform({{0.0, value}, {duration_us, value}});
}

std::string to_string(SweepTag tag) {
  switch (tag) {
    case SweepTag::InitialRamp: return "initial-ramp";
    case SweepTag::Forward: return "forward";
    case SweepTag::Backward: return "backward";
  }
  return "?";
}

SweepTag sweep_tag_from_string(const std::string& text) {
  if (text == "initial-ramp") return SweepTag::InitialRamp;
  if (text == "forward") return SweepTag::Forward;
  if (text == "backward") return SweepTag::Backward;
  throw ValidationError("unknown sweep tag '" + text + "'");
}

std::int64_t snap_to_ticks(double t_us, double resolution_us) {
  return static_cast<std::int64_t>(std::floor(t_us / resolution_us + 0.5));
}

double ticks_to_us(std::int64_t tick, double resolution_us) noexcept {
  const double rate = std::round(1.0 / resolution_us);
  if (std::abs(rate * resolution_us - 1.0) < 1e-12) return static_cast<double>(tick) / rate;
  return static_cast<double>(tick) * resolution_us;
}

double ProtocolTimeline::tick_to_us(std::int64_t tick) const noexcept { return ticks_to_us(tick, time_resolution_us); }

namespace {

Waveform waveform_from_ticks(const std::vector<std::pair<std::int64_t, double>>& knots, double res,
                             const char* what) {
  std::vector<WavePoint> pts;
  pts.reserve(knots.size());
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (k > 0 && knots[k].first <= knots[k - 1].first)
      throw ValidationError(fmt::format("{} knots {} and {} coincide after snapping to {} us", what, k - 1, k, res));
    pts.push_back({ticks_to_us(knots[k].first, res), knots[k].second});
  }
  return Waveform(std::move(pts));
}

void check_slope(const Waveform& w, const std::optional<double>& cap) {
  if (!cap) return;
  auto p = w.points();
  for (std::size_t k = 1; k < p.size(); ++k) {
    double slope = std::abs(p[k].value - p[k - 1].value) / (p[k].t_us - p[k - 1].t_us);
    if (slope > *cap * (1 + 1e-12))
      throw ValidationError(fmt::format("h-gain slope {} /us between t = {} and {} exceeds cap {}", slope,
                                        p[k - 1].t_us, p[k].t_us, *cap));
  }
}

}  // namespace

ProtocolTimeline build_timeline(const DeviceProfile& profile, double s_target, double h_max,
                                const TimelineOptions& opt) {
  if (!(s_target > 0.0 && s_target <= 1.0)) throw ValidationError(fmt::format("s_target {} outside (0, 1]", s_target));
  if (!(h_max > 0.0)) throw ValidationError("h_max must be positive");
  if (h_max > profile.h_gain_max)
    throw ValidationError(fmt::format("h_max {} exceeds device h-gain limit {}", h_max, profile.h_gain_max));
  if (opt.points_per_segment < 1) throw ValidationError("points_per_segment must be >= 1");
  if (!(std::abs(opt.field_coefficient) <= 1.0 && opt.field_coefficient != 0.0))
    throw ValidationError("field_coefficient must be nonzero with magnitude <= 1");

  const double res = profile.time_resolution_us;
  const auto total = snap_to_ticks(opt.total_time_us, res);
  const auto ramp = snap_to_ticks(opt.ramp_time_us, res);
  const auto pause = snap_to_ticks(opt.pause_time_us, res);
  const auto quench = snap_to_ticks(opt.gquench_time_us, res);
  if (ramp <= 0 || pause <= 0 || quench <= 0)
    throw ValidationError(fmt::format("ramp, pause and quench must each be at least one {} us tick", res));
  if (quench > pause) throw ValidationError("h-gain quench must fit inside the pre-readout pause");
  const auto region = total - 2 * (ramp + pause);
  if (region <= 0) throw ValidationError("total_time leaves no room for the field sweep");

  const double region_us = ticks_to_us(region, res);
  const double spacing = region_us / (5.0 * opt.points_per_segment);
  if (spacing < res * (1 - 1e-9))
    throw ValidationError(fmt::format("slice spacing {} us is below the {} us time resolution", spacing, res));

  ProtocolTimeline tl;
  tl.s_target = s_target;
  tl.h_max = h_max;
  tl.options = opt;
  tl.time_resolution_us = res;
  tl.max_hgain_points = profile.max_hgain_points;
  tl.max_anneal_points = profile.max_anneal_points;
  tl.min_anneal_time_us = profile.min_anneal_time_us;
  tl.field_start_tick = ramp + pause;
  tl.field_end_tick = total - ramp - pause;

  const double start_us = ticks_to_us(tl.field_start_tick, res);
  tl.corner_values = {0.0, h_max, 0.0, -h_max, 0.0, h_max};
  for (int j = 0; j <= 5; ++j) tl.corner_ticks.push_back(snap_to_ticks(start_us + j * region_us / 5.0, res));

  tl.anneal_waveform = waveform_from_ticks({{0, 0.0}, {ramp, s_target}, {total - ramp, s_target}, {total, 1.0}},
                                           res, "anneal");
  std::vector<std::pair<std::int64_t, double>> g{{0, 0.0}};
  for (int j = 0; j <= 5; ++j) g.emplace_back(tl.corner_ticks[j], tl.corner_values[j]);
  g.emplace_back(tl.field_end_tick + quench, 0.0);
  g.emplace_back(total, 0.0);
  tl.hgain_waveform = waveform_from_ticks(g, res, "h-gain");
  check_slope(tl.hgain_waveform, opt.max_hgain_slope);

  const int n = opt.points_per_segment;
  for (int j = 0; j < 5; ++j) {
    for (int i = 1; i <= n; ++i) {
      auto tick = snap_to_ticks(start_us + (j + static_cast<double>(i) / n) * region_us / 5.0, res);
      if (!tl.slice_ticks.empty() && tick <= tl.slice_ticks.back())
        throw ValidationError(fmt::format("slice times collide after snapping at slice {}", tl.slice_ticks.size()));
      tl.slice_ticks.push_back(tick);
      double t_us = ticks_to_us(tick, res);
      tl.slice_times.push_back(t_us);
      tl.slice_fields.push_back(tl.hgain_waveform(t_us) * opt.field_coefficient);
      tl.slice_tags.push_back(j == 0 ? SweepTag::InitialRamp : (j <= 2 ? SweepTag::Forward : SweepTag::Backward));
    }
  }
  return tl;
}

SliceSchedule slice_at(const ProtocolTimeline& tl, std::size_t k) {
  if (k >= tl.slice_count()) throw RangeError(fmt::format("slice {} of {}", k, tl.slice_count()));
  const double res = tl.time_resolution_us;
  const auto ramp = snap_to_ticks(tl.options.ramp_time_us, res);
  const auto pause = snap_to_ticks(tl.options.pause_time_us, res);
  const auto quench = snap_to_ticks(tl.options.gquench_time_us, res);
  const auto tk = tl.slice_ticks[k];
  const auto end = tk + pause + ramp;

  SliceSchedule slice;
  slice.slice_index = k;
  slice.slice_time_us = tl.slice_times[k];
  slice.total_time_us = ticks_to_us(end, res);
  slice.sweep_tag = tl.slice_tags[k];
  slice.target_field = tl.slice_fields[k];

  slice.anneal = waveform_from_ticks({{0, 0.0}, {ramp, tl.s_target}, {tk + pause, tl.s_target}, {end, 1.0}}, res,
                                     "anneal");

  std::vector<std::pair<std::int64_t, double>> g{{0, 0.0}};
  for (std::size_t j = 0; j < tl.corner_ticks.size() && tl.corner_ticks[j] < tk; ++j)
    g.emplace_back(tl.corner_ticks[j], tl.corner_values[j]);
  g.emplace_back(tk, tl.hgain_waveform(tl.slice_times[k]));
  g.emplace_back(tk + quench, 0.0);
  g.emplace_back(end, 0.0);
  slice.hgain = waveform_from_ticks(g, res, "h-gain");
  check_slope(slice.hgain, tl.options.max_hgain_slope);

  if (static_cast<int>(slice.hgain.size()) > tl.max_hgain_points)
    throw ValidationError(fmt::format("slice {} needs {} h-gain points, device allows {}", k, slice.hgain.size(),
                                      tl.max_hgain_points));
  if (static_cast<int>(slice.anneal.size()) > tl.max_anneal_points)
    throw ValidationError(fmt::format("slice {} needs {} anneal points, device allows {}", k, slice.anneal.size(),
                                      tl.max_anneal_points));
  if (slice.total_time_us < tl.min_anneal_time_us - res / 2)
    throw ValidationError(fmt::format("slice {} anneal time {} us below device minimum", k, slice.total_time_us));
  return slice;
}

std::string slice_to_json(const SliceSchedule& slice) {
  nlohmann::json j;
  auto pairs = [](const Waveform& w) {
    auto arr = nlohmann::json::array();
    for (const auto& p : w.points()) arr.push_back({p.t_us, p.value});
    return arr;
  };
  j["slice_index"] = slice.slice_index;
  j["sweep_tag"] = to_string(slice.sweep_tag);
  j["target_field"] = slice.target_field;
  j["annealing_time"] = slice.total_time_us;
  j["anneal_schedule"] = pairs(slice.anneal);
  j["h_gain_schedule"] = pairs(slice.hgain);
  return j.dump();
}

}  // namespace qahyst
