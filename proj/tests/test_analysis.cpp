#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qahyst/analysis.hpp"
#include "qahyst/errors.hpp"

using namespace qahyst;

namespace {

/// Fine midpoint Riemann sum of |b(H) - f(H)| over [lo, hi]; independent of the PCHIP pipeline.
template <class F, class B>
double riemann_gap(F f, B b, double lo, double hi, std::size_t n = 2000000) {
  const double dx = (hi - lo) / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double h = lo + (static_cast<double>(k) + 0.5) * dx;
    total += std::abs(b(h) - f(h));
  }
  return total * dx;
}

/// Samples f at `n` evenly spaced fields from `from` to `to` (inclusive).
template <class F>
SweepCurve sample(F f, double from, double to, std::size_t n) {
  SweepCurve c;
  for (std::size_t k = 0; k < n; ++k) {
    double h = from + (to - from) * static_cast<double>(k) / static_cast<double>(n - 1);
    c.points.push_back({h, f(h)});
  }
  return c;
}

/// Ideal square loop sampled so that each switching field falls midway between samples.
std::pair<SweepCurve, SweepCurve> square_loop(double coercive, double h_max, std::size_t n) {
  auto fwd = sample([&](double h) { return h > -coercive ? 1.0 : -1.0; }, h_max, -h_max, n);
  auto back = sample([&](double h) { return h < coercive ? -1.0 : 1.0; }, -h_max, h_max, n);
  return {fwd, back};
}

TraceRecord record(std::size_t k, SweepTag tag, double h, double m) {
  TraceRecord r;
  r.slice_index = k;
  r.obs.sweep_tag = tag;
  r.obs.target_field = h;
  r.obs.mean_mz = m;
  r.obs.n_samples = 1;
  return r;
}

/// A trace laid out like the protocol: ramp 0 -> H, forward H -> -H, backward -H -> H.
template <class F, class B>
std::vector<TraceRecord> trace(F fwd, B back, double h_max, std::size_t n) {
  std::vector<TraceRecord> t;
  for (std::size_t i = 1; i <= n; ++i) t.push_back(record(t.size(), SweepTag::InitialRamp, h_max * i / n, 0.3));
  for (std::size_t i = 1; i <= 2 * n; ++i) {
    double h = h_max - h_max * static_cast<double>(i) / static_cast<double>(n);
    t.push_back(record(t.size(), SweepTag::Forward, h, fwd(h)));
  }
  for (std::size_t i = 1; i <= 2 * n; ++i) {
    double h = -h_max + h_max * static_cast<double>(i) / static_cast<double>(n);
    t.push_back(record(t.size(), SweepTag::Backward, h, back(h)));
  }
  return t;
}

}  // namespace

TEST_CASE("pchip reproduces linear data") {
  std::vector<double> xs{-3, -1.5, 0, 0.25, 2, 7}, ys;
  for (double x : xs) ys.push_back(2 * x + 1);
  Pchip p(xs, ys);
  for (int k = 0; k <= 1000; ++k) {
    double x = -3 + 10.0 * k / 1000;
    CHECK(p(x) == doctest::Approx(2 * x + 1).epsilon(1e-12));
  }
  std::vector<double> two_x{0, 1}, two_y{1, 3};
  CHECK(Pchip(two_x, two_y)(0.25) == doctest::Approx(1.5));
}

TEST_CASE("pchip knots and range") {
  std::vector<double> xs{0, 1, 2, 4}, ys{3, -1, 2, 2.5};
  Pchip p(xs, ys);
  for (std::size_t k = 0; k < xs.size(); ++k) CHECK(p(xs[k]) == ys[k]);
  CHECK_THROWS_AS(p(-0.01), RangeError);
  CHECK_THROWS_AS(p(4.01), RangeError);
  std::vector<double> dup{0, 1, 1, 2};
  CHECK_THROWS_AS(Pchip(dup, ys), ValidationError);
  std::vector<double> wobble{0, 2, 1, 3};
  CHECK_THROWS_AS(Pchip(wobble, ys), ValidationError);
  std::vector<double> one{0};
  CHECK_THROWS_AS(Pchip(one, one), ValidationError);
  std::vector<double> short_y{1, 2};
  CHECK_THROWS_AS(Pchip(xs, short_y), ValidationError);
}

TEST_CASE("pchip accepts decreasing abscissae") {
  std::vector<double> xs{4, 2, 1, 0}, ys{2.5, 2, -1, 3};
  std::vector<double> rx{0, 1, 2, 4}, ry{3, -1, 2, 2.5};
  Pchip a(xs, ys), b(rx, ry);
  for (double x = 0; x <= 4; x += 0.125) CHECK(a(x) == b(x));
}

TEST_CASE("pchip agrees with SciPy's PchipInterpolator") {
  // Reference values from scipy.interpolate.PchipInterpolator (SciPy 1.15.3).
  std::vector<double> xs{0.0, 0.7, 1.5, 2.0, 3.2, 4.0, 5.5}, ys{1.0, 1.8, 1.6, 3.0, 3.1, -0.5, 0.2};
  Pchip p(xs, ys);
  const double q[] = {0.1, 0.35, 1.0, 1.75, 2.5, 3.5, 4.9, 5.4};
  const double ref[] = {1.1760349854227405,  1.556875,           1.7367187499999999, 2.2883819317885967,
                        3.0692427042051165,  1.9609375000000009, -0.34879999999999983, 0.06912592592592626};
  for (int k = 0; k < 8; ++k) CHECK(p(q[k]) == doctest::Approx(ref[k]).epsilon(1e-13));
  const double slopes[] = {1.792857142857143, 0.0, 0.0, 0.18588909138245266, 0.0, 0.0, 1.3999999999999997};
  for (int k = 0; k < 7; ++k) CHECK(p.slopes()[k] == doctest::Approx(slopes[k]).epsilon(1e-13));

  std::vector<double> x3{0.0, 1.0, 1.2, 3.0}, y3{0.0, 2.0, 2.1, 2.2};
  Pchip clamp(x3, y3);
  CHECK(clamp.slopes()[0] == doctest::Approx(3.25).epsilon(1e-13));
  CHECK(clamp.slopes()[1] == doctest::Approx(0.705882352941177).epsilon(1e-13));
  CHECK(clamp.slopes()[2] == doctest::Approx(0.12711864406779672).epsilon(1e-13));
  CHECK(std::abs(clamp.slopes()[3]) < 1e-15);
  CHECK(clamp(0.5) == doctest::Approx(1.3180147058823528).epsilon(1e-13));
  CHECK(clamp(1.1) == doctest::Approx(2.064469092721835).epsilon(1e-13));
  CHECK(clamp(2.0) == doctest::Approx(2.173088279742392).epsilon(1e-13));

  std::vector<double> x2{0.0, 1.0, 2.0}, y2{0.0, 1.0, 4.0};
  Pchip sq(x2, y2);
  CHECK(sq(0.25) == doctest::Approx(0.0859375).epsilon(1e-13));
  CHECK(sq(1.5) == doctest::Approx(2.1875).epsilon(1e-13));
}

TEST_CASE("pchip is monotone and never overshoots") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> step(0.01, 1.0), rise(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs{0}, ys{rise(rng)};
    for (int k = 0; k < 12; ++k) {
      xs.push_back(xs.back() + step(rng));
      ys.push_back(ys.back() + (k % 4 == 0 ? 0.0 : rise(rng)));
    }
    Pchip p(xs, ys);
    double prev = p(xs.front());
    for (int k = 1; k <= 10000; ++k) {
      double v = p(std::min(xs.back(), xs.front() + (xs.back() - xs.front()) * k / 10000));
      CHECK(v >= prev - 1e-12);
      CHECK(v >= ys.front() - 1e-12);
      CHECK(v <= ys.back() + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("trapezoid rule") {
  std::vector<double> xs{0, 1, 3}, ys{0, 2, 2};
  CHECK(trapezoid(xs, ys) == 5.0);
  std::vector<double> one{1};
  CHECK(trapezoid(one, one) == 0.0);
}

TEST_CASE("square loop areas") {
  for (auto [coercive, expect] : {std::pair{0.5, 2.0}, std::pair{0.25, 1.0}}) {
    double oracle = riemann_gap([&](double h) { return h > -coercive ? 1.0 : -1.0; },
                                [&](double h) { return h < coercive ? -1.0 : 1.0; }, -1.0, 1.0);
    CHECK(oracle == doctest::Approx(expect).epsilon(1e-5));
  }
  // Spacings 1/99 and 1/98 put the switching fields midway between samples.
  auto [f1, b1] = square_loop(0.5, 1.0, 199);
  CHECK(std::abs(loop_area(f1, b1) - 2.0) < 1e-6);
  auto [f2, b2] = square_loop(0.25, 1.0, 197);
  CHECK(std::abs(loop_area(f2, b2) - 1.0) < 1e-6);
}

TEST_CASE("loop area invariants") {
  auto f = sample([](double h) { return std::tanh(3 * (h + 0.4)); }, 2, -2, 41);
  auto b = sample([](double h) { return std::tanh(3 * (h - 0.4)); }, -2, 2, 37);
  const double area = loop_area(f, b);
  CHECK(area > 0.0);
  CHECK(loop_area(b, f) == doctest::Approx(area).epsilon(1e-12));
  CHECK(loop_area(f, f) == 0.0);

  auto scale = [](SweepCurve c, double ch, double cm) {
    for (auto& p : c.points) {
      p.h *= ch;
      p.m *= cm;
    }
    return c;
  };
  CHECK(loop_area(scale(f, 1, -2.5), scale(b, 1, -2.5)) == doctest::Approx(2.5 * area).epsilon(1e-9));
  CHECK(loop_area(scale(f, 3, 1), scale(b, 3, 1)) == doctest::Approx(3 * area).epsilon(1e-9));
  CHECK(loop_area(scale(f, -0.5, 1), scale(b, -0.5, 1)) == doctest::Approx(0.5 * area).epsilon(1e-9));

  auto far = sample([](double) { return 1.0; }, 5, 3, 5);
  CHECK_THROWS_AS(loop_area(f, far), ValidationError);
}

TEST_CASE("box loop digitized coarsely") {
  auto up = [](double h) { return std::tanh((h + 0.6) / 0.08); };
  auto down = [](double h) { return std::tanh((h - 0.6) / 0.08); };
  double oracle = riemann_gap(up, down, -2.0, 2.0);
  auto f = sample(up, 2.0, -2.0, 41);
  auto b = sample(down, -2.0, 2.0, 41);
  CHECK(std::abs(loop_area(f, b) - oracle) < 0.02 * oracle);
}

TEST_CASE("sweeps that reverse are integrated by pieces") {
  // Two-point pieces interpolate linearly, so the directed integrals are exact:
  // forward 0, backward -0.75 + 0 + 0.375.
  SweepCurve fwd{{{1, 1}, {-1, -1}}};
  SweepCurve back{{{-1, -1}, {0.5, 0}, {0.25, 0}, {1, 1}}};
  CHECK(loop_area(fwd, back, 2001) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(loop_area(back, fwd, 2001) == doctest::Approx(0.375).epsilon(1e-12));
  SweepCurve repeat{{{-1, 0}, {0, 0}, {0, 1}}};
  CHECK_THROWS_AS(loop_area(fwd, repeat), ValidationError);
}

TEST_CASE("loop report on synthetic traces") {
  auto profile = synthetic_profile();
  auto up = [](double h) { return std::tanh(2 * (h + 0.5)); };
  auto down = [](double h) { return std::tanh(2 * (h - 0.5)); };
  // M_fwd(H) = -M_back(-H) exactly for this pair.
  auto t = trace(up, down, 2.0, 50);
  auto rep = loop_report(t, 0.5, profile);
  CHECK(rep.symmetry_deviation < 1e-12);
  CHECK(rep.closure_gap == doctest::Approx(std::abs(up(1.96) - down(2.0))));
  CHECK(rep.gamma_over_j == doctest::Approx(1.0));
  CHECK(rep.area > 0);

  // Closed loop: the first forward value equals the last backward value.
  auto closed = t;
  closed[50].obs.mean_mz = 0.75;
  closed.back().obs.mean_mz = 0.75;
  CHECK(loop_report(closed, 0.5, profile).closure_gap == 0.0);

  // Asymmetric loop.
  auto skew = trace(up, [](double h) { return std::tanh(2 * (h - 0.8)); }, 2.0, 50);
  CHECK(loop_report(skew, 0.5, profile).symmetry_deviation > 0.1);

  // Invalid records are skipped; initial-ramp records never count.
  auto holes = t;
  holes[70].valid = false;
  holes[70].obs.mean_mz = std::nan("");
  CHECK(std::isfinite(loop_report(holes, 0.5, profile).area));
  CHECK(sweep_curve(t, SweepTag::InitialRamp).points.size() == 50);
  CHECK(sweep_curve(t, SweepTag::Forward).points.size() == 100);

  std::vector<TraceRecord> only_forward(t.begin(), t.begin() + 150);
  CHECK_THROWS_AS(loop_report(only_forward, 0.5, profile), ValidationError);
}

TEST_CASE("loop report table") {
  std::vector<LoopReport> reps{{0.3, 9.0, 0.1, 0.0, 0.01}, {0.5, 1.0, 2.5, 0.02, 0.0}};
  std::ostringstream out;
  write_loop_reports(out, reps);
  CHECK(out.str() == "s,gamma_over_j,area,closure_gap,symmetry_deviation\n0.3,9,0.1,0,0.01\n0.5,1,2.5,0.02,0\n");
}
