#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "qahyst/device.hpp"
#include "qahyst/errors.hpp"
#include "qahyst/schedule.hpp"

using namespace qahyst;

namespace {

const DeviceProfile& profile() {
  static const DeviceProfile p = synthetic_profile();
  return p;
}

bool on_grid(double t) { return std::abs(t * 100.0 - std::round(t * 100.0)) < 1e-9; }

}  // namespace

TEST_CASE("waveform evaluation") {
  Waveform w({{0, 0}, {1, 2}});
  CHECK(w(0.5) == 1.0);
  CHECK(evaluate(w, 0.0) == 0.0);
  CHECK(evaluate(w, 1.0) == 2.0);
  CHECK_THROWS_AS(w(-0.1), RangeError);
  CHECK_THROWS_AS(w(1.1), RangeError);
  CHECK_THROWS_AS(Waveform({{0, 0}, {0, 1}}), ValidationError);
  CHECK_THROWS_AS(Waveform({{1, 0}, {0, 1}}), ValidationError);

  Waveform steps({{0, 1}, {0.3, -2}, {0.7, 5}, {2, 5}});
  for (const auto& p : steps.points()) CHECK(steps(p.t_us) == p.value);
  CHECK(steps(0.5) == doctest::Approx(1.5));

  auto c = constant_waveform(0.4, 3.0);
  CHECK(c(1.7) == 0.4);
  CHECK(c.end_time() == 3.0);
}

TEST_CASE("snapping rounds half up") {
  CHECK(snap_to_ticks(0.0149, 0.01) == 1);
  CHECK(snap_to_ticks(0.015, 0.01) == 2);
  CHECK(snap_to_ticks(2.62, 0.01) == 262);
  CHECK(ticks_to_us(70, 0.01) == 0.7);
}

TEST_CASE("default timeline") {
  auto tl = build_timeline(profile(), 0.5, 4.0);
  REQUIRE(tl.slice_count() == 500);
  for (std::size_t k = 1; k < 500; ++k) CHECK(tl.slice_times[k] - tl.slice_times[k - 1] == doctest::Approx(0.02));
  for (double t : tl.slice_times) CHECK(on_grid(t));
  CHECK(tl.slice_times.front() == doctest::Approx(0.62));
  CHECK(tl.slice_times.back() == doctest::Approx(10.6));
  CHECK(tl.loop_begin() == 100);
  CHECK(500 - tl.loop_begin() == 400);
  CHECK(tl.field_start_tick == 60);
  CHECK(tl.field_end_tick == 1060);

  auto count = [&](SweepTag t) { return std::count(tl.slice_tags.begin(), tl.slice_tags.end(), t); };
  CHECK(count(SweepTag::InitialRamp) == 100);
  CHECK(count(SweepTag::Forward) == 200);
  CHECK(count(SweepTag::Backward) == 200);
  CHECK(tl.slice_tags[99] == SweepTag::InitialRamp);
  CHECK(tl.slice_tags[100] == SweepTag::Forward);
  CHECK(tl.slice_tags[300] == SweepTag::Backward);

  // g(t) corners: 0, +H, 0, -H, 0, +H.
  auto g = tl.hgain_waveform;
  CHECK(g(0.0) == 0.0);
  CHECK(g(0.6) == 0.0);
  CHECK(g(2.6) == 4.0);
  CHECK(g(4.6) == 0.0);
  CHECK(g(6.6) == -4.0);
  CHECK(g(8.6) == 0.0);
  CHECK(g(10.6) == 4.0);
  CHECK(g(11.2) == 0.0);
  auto s = tl.anneal_waveform;
  CHECK(s(0.0) == 0.0);
  CHECK(s(0.5) == 0.5);
  CHECK(s(10.7) == 0.5);
  CHECK(s(11.2) == 1.0);
}

TEST_CASE("closed-loop fields are symmetric") {
  auto tl = build_timeline(profile(), 0.5, 3.0);
  std::vector<double> fwd, back;
  for (std::size_t k = tl.loop_begin(); k < tl.slice_count(); ++k)
    (tl.slice_tags[k] == SweepTag::Forward ? fwd : back).push_back(tl.slice_fields[k]);
  REQUIRE(fwd.size() == back.size());
  for (double& v : back) v = -v;
  std::sort(fwd.begin(), fwd.end());
  std::sort(back.begin(), back.end());
  for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(fwd[i] == doctest::Approx(back[i]).epsilon(1e-12));
  // Forward sweeps +H -> -H, backward -H -> +H.
  for (std::size_t k = 101; k < 300; ++k) CHECK(tl.slice_fields[k] < tl.slice_fields[k - 1]);
  for (std::size_t k = 301; k < 500; ++k) CHECK(tl.slice_fields[k] > tl.slice_fields[k - 1]);
}

TEST_CASE("field coefficient scales the measured field") {
  TimelineOptions opt;
  opt.field_coefficient = -0.5;
  auto tl = build_timeline(profile(), 0.5, 2.0, opt);
  CHECK(tl.slice_fields[99] == doctest::Approx(-1.0));
  opt.field_coefficient = 1.5;
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, 2.0, opt), ValidationError);
}

TEST_CASE("timeline validation") {
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, 4.5), ValidationError);
  CHECK_THROWS_AS(build_timeline(profile(), 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(build_timeline(profile(), 1.2, 1.0), ValidationError);
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, -1.0), ValidationError);
  TimelineOptions dense;
  dense.points_per_segment = 10000;
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, 1.0, dense), ValidationError);
  TimelineOptions finest;
  finest.points_per_segment = 200;  // spacing exactly 0.01 us
  CHECK(build_timeline(profile(), 0.5, 1.0, finest).slice_count() == 1000);
  TimelineOptions cramped;
  cramped.total_time_us = 1.2;
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, 1.0, cramped), ValidationError);
  TimelineOptions long_quench;
  long_quench.gquench_time_us = 0.2;
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, 1.0, long_quench), ValidationError);
  TimelineOptions tiny_ramp;
  tiny_ramp.ramp_time_us = 0.004;
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, 1.0, tiny_ramp), ValidationError);
}

TEST_CASE("slice schedules") {
  auto tl = build_timeline(profile(), 0.4, 4.0);
  auto first = slice_at(tl, tl.loop_begin());
  CHECK(first.total_time_us == doctest::Approx(3.22));
  CHECK(first.sweep_tag == SweepTag::Forward);

  auto last = slice_at(tl, tl.slice_count() - 1);
  CHECK(last.total_time_us == doctest::Approx(11.2));
  CHECK(last.target_field == 4.0);
  CHECK(last.hgain(10.6) == 4.0);
  CHECK(last.hgain(10.62) == 0.0);
  CHECK(last.sweep_tag == SweepTag::Backward);

  CHECK(slice_at(tl, 0).sweep_tag == SweepTag::InitialRamp);
  CHECK_THROWS_AS(slice_at(tl, 500), RangeError);

  for (std::size_t k = 0; k < tl.slice_count(); ++k) {
    auto sl = slice_at(tl, k);
    CHECK(sl.hgain.final_value() == 0.0);
    CHECK(sl.anneal.final_value() == 1.0);
    CHECK(sl.hgain.size() <= 20);
    CHECK(sl.anneal.size() <= 12);
    CHECK(sl.total_time_us == doctest::Approx(tl.slice_times[k] + 0.6));
    CHECK(sl.hgain.end_time() == sl.anneal.end_time());
    CHECK(sl.hgain(tl.slice_times[k]) == doctest::Approx(tl.slice_fields[k]));
    // Until the slice time the slice follows the full protocol.
    for (double t = 0.0; t <= tl.slice_times[k]; t += 0.05) {
      CHECK(sl.hgain(t) == doctest::Approx(tl.hgain_waveform(t)).epsilon(1e-12));
      CHECK(sl.anneal(t) == doctest::Approx(tl.anneal_waveform(t)).epsilon(1e-12));
    }
    // Pause at fixed s, then readout ramp.
    CHECK(sl.anneal(tl.slice_times[k] + 0.1) == doctest::Approx(0.4));
    for (const auto& p : sl.hgain.points()) CHECK(on_grid(p.t_us));
    for (const auto& p : sl.anneal.points()) CHECK(on_grid(p.t_us));
  }
}

TEST_CASE("device point limits are enforced") {
  auto p = profile();
  p.max_hgain_points = 6;
  auto tl = build_timeline(p, 0.5, 1.0);
  CHECK_NOTHROW(slice_at(tl, 150));
  CHECK_THROWS_AS(slice_at(tl, 499), ValidationError);
  p = profile();
  p.max_anneal_points = 3;
  CHECK_THROWS_AS(slice_at(build_timeline(p, 0.5, 1.0), 0), ValidationError);
  p = profile();
  p.min_anneal_time_us = 2.0;
  CHECK_THROWS_AS(slice_at(build_timeline(p, 0.5, 1.0), 0), ValidationError);
}

TEST_CASE("optional slope cap") {
  TimelineOptions opt;
  opt.max_hgain_slope = 1.0;  // 2 us segments of height 4 need slope 2
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, 4.0, opt), ValidationError);
  opt.max_hgain_slope = 1e6;  // the 20 ns quench needs 200 /us
  auto tl = build_timeline(profile(), 0.5, 4.0, opt);
  CHECK_NOTHROW(slice_at(tl, 250));
  // The protocol itself ends with the same quench, so a cap below it fails up front.
  opt.max_hgain_slope = 100.0;
  CHECK_THROWS_AS(build_timeline(profile(), 0.5, 4.0, opt), ValidationError);
  // A slice quenching from a small field stays under a cap the full protocol breaks.
  opt.max_hgain_slope = 10.0;
  opt.gquench_time_us = 0.1;
  auto p = profile();
  CHECK_THROWS_AS(build_timeline(p, 0.5, 4.0, opt), ValidationError);
}

TEST_CASE("slice json export") {
  auto tl = build_timeline(profile(), 0.5, 4.0);
  auto sl = slice_at(tl, 120);
  auto j = nlohmann::json::parse(slice_to_json(sl));
  REQUIRE(j["anneal_schedule"].size() == sl.anneal.size());
  REQUIRE(j["h_gain_schedule"].size() == sl.hgain.size());
  CHECK(j["h_gain_schedule"].back()[1].get<double>() == 0.0);
  CHECK(j["anneal_schedule"].back()[0].get<double>() == doctest::Approx(sl.total_time_us));
  CHECK(j["slice_index"] == 120);
  CHECK(j["sweep_tag"] == "forward");
}

TEST_CASE("sweep tag names") {
  for (auto t : {SweepTag::InitialRamp, SweepTag::Forward, SweepTag::Backward})
    CHECK(sweep_tag_from_string(to_string(t)) == t);
  CHECK(to_string(SweepTag::InitialRamp) == "initial-ramp");
  CHECK_THROWS_AS(sweep_tag_from_string("sideways"), ValidationError);
}
