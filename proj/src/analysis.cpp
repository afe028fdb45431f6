#include "qahyst/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "qahyst/errors.hpp"

namespace qahyst {

namespace {

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

Pchip::Pchip(std::span<const double> xs, std::span<const double> ys) : xs_(xs.begin(), xs.end()), ys_(ys.begin(), ys.end()) {
  const std::size_t n = xs_.size();
  if (n < 2) throw ValidationError("pchip needs at least two points");
  if (ys_.size() != n) throw ValidationError("pchip xs and ys differ in length");
  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(xs_[k]) || !std::isfinite(ys_[k])) throw ValidationError("pchip data must be finite");
  if (xs_[1] < xs_[0]) {
    std::reverse(xs_.begin(), xs_.end());
    std::reverse(ys_.begin(), ys_.end());
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (xs_[k] == xs_[k - 1]) throw ValidationError(fmt::format("pchip: duplicate x = {}", xs_[k]));
    if (xs_[k] < xs_[k - 1]) throw ValidationError("pchip: xs must be strictly monotone");
  }

  std::vector<double> h(n - 1), m(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = xs_[k + 1] - xs_[k];
    m[k] = (ys_[k + 1] - ys_[k]) / h[k];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = m[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (sign(m[k - 1]) * sign(m[k]) <= 0) continue;
    const double w1 = 2 * h[k] + h[k - 1];
    const double w2 = h[k] + 2 * h[k - 1];
    d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
  }
  auto edge = [](double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (sign(d) != sign(m0)) return 0.0;
    if (sign(m0) != sign(m1) && std::abs(d) > 3 * std::abs(m0)) return 3 * m0;
    return d;
  };
  d_[0] = edge(h[0], h[1], m[0], m[1]);
  d_[n - 1] = edge(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
}

double Pchip::operator()(double x) const {
  if (!(x >= xs_.front() && x <= xs_.back())) throw RangeError(fmt::format("pchip: x = {} outside data range", x));
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t k = it == xs_.end() ? xs_.size() - 2 : static_cast<std::size_t>(it - xs_.begin()) - 1;
  if (x == xs_[k]) return ys_[k];
  const double hk = xs_[k + 1] - xs_[k];
  const double t = (x - xs_[k]) / hk;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * ys_[k] + h10 * hk * d_[k] + h01 * ys_[k + 1] + h11 * hk * d_[k + 1];
}

double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  double total = 0.0;
  for (std::size_t k = 1; k < xs.size(); ++k) total += 0.5 * (xs[k] - xs[k - 1]) * (ys[k] + ys[k - 1]);
  return total;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k)
    v[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  if (n > 1) v.back() = hi;
  return v;
}

/// Splits at direction reversals; the reversal point belongs to both pieces.
std::vector<SweepCurve> monotone_pieces(const SweepCurve& c) {
  std::vector<SweepCurve> pieces;
  SweepCurve cur;
  int dir = 0;
  for (const auto& p : c.points) {
    if (cur.points.empty()) {
      cur.points.push_back(p);
      continue;
    }
    int step = sign(p.h - cur.points.back().h);
    if (step == 0) throw ValidationError(fmt::format("sweep repeats field value {}", p.h));
    if (dir != 0 && step != dir) {
      auto last = cur.points.back();
      pieces.push_back(std::move(cur));
      cur = SweepCurve{{last}};
    }
    dir = step;
    cur.points.push_back(p);
  }
  if (!cur.points.empty()) pieces.push_back(std::move(cur));
  return pieces;
}

Pchip interpolant(const SweepCurve& c) {
  std::vector<double> hs, ms;
  for (const auto& p : c.points) {
    hs.push_back(p.h);
    ms.push_back(p.m);
  }
  return Pchip(hs, ms);
}

/// Directed integral of M dH along one monotone piece.
double path_integral(const SweepCurve& piece, std::size_t n_interp) {
  if (piece.points.size() < 2) return 0.0;
  auto f = interpolant(piece);
  auto hs = linspace(piece.points.front().h, piece.points.back().h, n_interp);
  std::vector<double> ms(hs.size());
  for (std::size_t k = 0; k < hs.size(); ++k) ms[k] = f(hs[k]);
  return trapezoid(hs, ms);
}

std::pair<double, double> span_of(const SweepCurve& c) {
  auto [lo, hi] = std::minmax_element(c.points.begin(), c.points.end(),
                                      [](const SweepPoint& a, const SweepPoint& b) { return a.h < b.h; });
  return {lo->h, hi->h};
}

}  // namespace

double loop_area(const SweepCurve& forward, const SweepCurve& backward, std::size_t n_interp) {
  if (forward.points.size() < 2 || backward.points.size() < 2)
    throw ValidationError("each sweep needs at least two points");
  if (n_interp < 2) throw ValidationError("n_interp must be at least 2");
  auto [flo, fhi] = span_of(forward);
  auto [blo, bhi] = span_of(backward);
  const double lo = std::max(flo, blo), hi = std::min(fhi, bhi);
  if (!(hi > lo)) throw ValidationError("forward and backward sweeps share no field interval");

  auto fp = monotone_pieces(forward);
  auto bp = monotone_pieces(backward);
  if (fp.size() == 1 && bp.size() == 1) {
    auto f = interpolant(forward);
    auto b = interpolant(backward);
    auto hs = linspace(lo, hi, n_interp);
    std::vector<double> gap(hs.size());
    for (std::size_t k = 0; k < hs.size(); ++k) gap[k] = std::abs(b(hs[k]) - f(hs[k]));
    return trapezoid(hs, gap);
  }
  double circulation = 0.0;
  for (const auto& p : fp) circulation += path_integral(p, n_interp);
  for (const auto& p : bp) circulation += path_integral(p, n_interp);
  return std::abs(circulation);
}

SweepCurve sweep_curve(std::span<const TraceRecord> trace, SweepTag tag, LoopObservable what) {
  SweepCurve c;
  for (const auto& r : trace) {
    if (!r.valid || r.obs.sweep_tag != tag) continue;
    double v = what == LoopObservable::Magnetization ? r.obs.mean_mz
               : what == LoopObservable::Frustration ? r.obs.mean_f
                                                     : r.obs.mean_h_internal;
    c.points.push_back({r.obs.target_field, v});
  }
  return c;
}

LoopReport loop_report(std::span<const TraceRecord> trace, double s, const DeviceProfile& profile,
                       std::size_t n_interp) {
  auto fwd = sweep_curve(trace, SweepTag::Forward);
  auto back = sweep_curve(trace, SweepTag::Backward);
  if (fwd.points.size() < 2) throw ValidationError("trace lacks a forward sweep");
  if (back.points.size() < 2) throw ValidationError("trace lacks a backward sweep");

  LoopReport rep;
  rep.s_value = s;
  rep.gamma_over_j = gamma_over_j(profile, s);
  rep.area = loop_area(fwd, back, n_interp);
  rep.closure_gap = std::abs(fwd.points.front().m - back.points.back().m);

  auto fp = monotone_pieces(fwd);
  auto bp = monotone_pieces(back);
  if (fp.size() == 1 && bp.size() == 1) {
    auto [flo, fhi] = span_of(fwd);
    auto [blo, bhi] = span_of(back);
    // H must lie in the forward span and -H in the backward span.
    const double lo = std::max(flo, -bhi), hi = std::min(fhi, -blo);
    if (hi >= lo) {
      auto f = interpolant(fwd);
      auto b = interpolant(back);
      for (double h : linspace(lo, hi, n_interp))
        rep.symmetry_deviation = std::max(rep.symmetry_deviation, std::abs(f(h) + b(-h)) / 2);
    }
  }
  return rep;
}

void write_loop_reports(std::ostream& out, std::span<const LoopReport> reports) {
  out << "s,gamma_over_j,area,closure_gap,symmetry_deviation\n";
  for (const auto& r : reports)
    out << fmt::format("{},{},{},{},{}\n", r.s_value, r.gamma_over_j, r.area, r.closure_gap, r.symmetry_deviation);
}

}  // namespace qahyst
