#include "qahyst/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "qahyst/errors.hpp"

namespace qahyst {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(double w, double h) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      w, h);
}

const char* observable_label(LoopObservable what) {
  switch (what) {
    case LoopObservable::Magnetization: return "M_z";
    case LoopObservable::Frustration: return "F";
    case LoopObservable::InternalField: return "h_internal";
  }
  return "";
}

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
    return;
  }
  double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string out;
  const double left = kLeft, right = kWidth - kRight, top = kTop, bottom = kHeight - kBottom;
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n", left, top,
                     right - left, bottom - top);
  for (int i = 0; i <= 4; ++i) {
    double x = f.x0 + (f.x1 - f.x0) * i / 4.0, y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", f.px(x), bottom + 16, x);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6, f.py(y) + 4, y);
  }
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", (left + right) / 2,
                     kHeight - 12, escape(xlabel));
  out += fmt::format(
      "<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
      (top + bottom) / 2, (top + bottom) / 2, escape(ylabel));
  return out;
}

std::string polyline(const Frame& f, const SweepCurve& c, const char* color, const char* marker) {
  std::string pts;
  for (const auto& p : c.points) pts += fmt::format("{:.2f},{:.2f} ", f.px(p.h), f.py(p.m));
  std::string out = fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", pts, color);
  // Short arrowed segments at a few positions show the sweep direction.
  const std::size_t n = c.points.size();
  if (n >= 4) {
    for (int k = 1; k <= 3; ++k) {
      std::size_t i = n * k / 4;
      if (i == 0 || i >= n) continue;
      const auto& a = c.points[i - 1];
      const auto& b = c.points[i];
      out += fmt::format(
          "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" marker-end=\"url(#{})\"/>\n",
          f.px(a.h), f.py(a.m), f.px(b.h), f.py(b.m), color, marker);
    }
  }
  return out;
}

std::array<double, 3> colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                               {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  double u = t - static_cast<double>(i);
  std::array<double, 3> rgb{};
  for (int c = 0; c < 3; ++c) rgb[c] = stops[i][c] + u * (stops[i + 1][c] - stops[i][c]);
  return rgb;
}

}  // namespace

std::string render_loop_svg(std::span<const TraceRecord> trace, LoopObservable what, const std::string& title) {
  auto fwd = sweep_curve(trace, SweepTag::Forward, what);
  auto back = sweep_curve(trace, SweepTag::Backward, what);
  if (fwd.points.empty() && back.points.empty()) throw ValidationError("trace has no forward or backward records");

  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto* c : {&fwd, &back})
    for (const auto& p : c->points) {
      f.x0 = std::min(f.x0, p.h);
      f.x1 = std::max(f.x1, p.h);
      f.y0 = std::min(f.y0, p.m);
      f.y1 = std::max(f.y1, p.m);
    }
  pad(f.x0, f.x1);
  pad(f.y0, f.y1);

  std::string out = header(kWidth, kHeight);
  out += "<defs>\n";
  for (auto [id, color] : {std::pair{"af", "#1f77b4"}, std::pair{"ab", "#d62728"}})
    out += fmt::format(
        "<marker id=\"{}\" viewBox=\"0 0 10 10\" refX=\"5\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" "
        "orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"{}\"/></marker>\n",
        id, color);
  out += "</defs>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += axes(f, "H", observable_label(what));
  if (f.y0 < 0 && f.y1 > 0)
    out += fmt::format("<line x1=\"{}\" x2=\"{}\" y1=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#bbb\" stroke-dasharray=\"3,3\"/>\n",
                       kLeft, kWidth - kRight, f.py(0), f.py(0));
  out += polyline(f, fwd, "#1f77b4", "af");
  out += polyline(f, back, "#d62728", "ab");
  out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"#1f77b4\">forward</text>\n", kWidth - kRight - 130, kTop + 16);
  out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"#d62728\">backward</text>\n", kWidth - kRight - 70, kTop + 16);
  if (!title.empty())
    out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", kWidth / 2,
                       escape(title));
  out += "</svg>\n";
  return out;
}

std::string render_heatmap_svg(const StructureFactorGrid& grid, const HeatmapOptions& options) {
  const std::size_t g = grid.grid_size;
  if (g == 0 || grid.values.size() != g * g) throw ValidationError("structure-factor grid is empty");
  if (options.cap && !(*options.cap > 0)) throw ValidationError("cap must be positive");

  std::vector<double> shown(grid.values);
  if (options.cap)
    for (double& v : shown) v = std::min(v, *options.cap);
  double hi = *std::max_element(shown.begin(), shown.end());
  double floor_value = std::numeric_limits<double>::infinity();
  for (double v : shown)
    if (v > 0) floor_value = std::min(floor_value, v);
  if (!std::isfinite(floor_value)) floor_value = 1.0;
  floor_value = std::max(floor_value, hi * 1e-4);
  auto scale = [&](double v) {
    if (options.log_scale) {
      if (hi <= floor_value) return 1.0;
      return (std::log10(std::max(v, floor_value)) - std::log10(floor_value)) /
             (std::log10(hi) - std::log10(floor_value));
    }
    double lo = *std::min_element(shown.begin(), shown.end());
    return hi > lo ? (v - lo) / (hi - lo) : 1.0;
  };

  const double side = 440, left = 70, top = 40, bar = 18;
  const double cell = side / static_cast<double>(g);
  std::string out = header(left + side + 110, top + side + 55);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t iy = 0; iy < g; ++iy)
    for (std::size_t ix = 0; ix < g; ++ix) {
      auto rgb = colormap(scale(shown[iy * g + ix]));
      // Row iy = 0 is q_min, drawn at the bottom.
      out += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#{:02x}{:02x}{:02x}\"/>\n",
          left + ix * cell, top + (g - 1 - iy) * cell, cell + 0.05, cell + 0.05, static_cast<int>(rgb[0]),
          static_cast<int>(rgb[1]), static_cast<int>(rgb[2]));
    }
  auto qx = [&](double q) { return left + (q - grid.q_min) / (grid.q_max - grid.q_min) * side; };
  auto qy = [&](double q) { return top + side - (q - grid.q_min) / (grid.q_max - grid.q_min) * side; };
  if (options.zone_box && grid.q_max > grid.q_min) {
    const double pi = std::numbers::pi;
    double x0 = qx(std::max(-pi, grid.q_min)), x1 = qx(std::min(pi, grid.q_max));
    double y0 = qy(std::min(pi, grid.q_max)), y1 = qy(std::max(-pi, grid.q_min));
    out += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"white\" "
        "stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n",
        x0, y0, x1 - x0, y1 - y0);
  }
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n", left, top,
                     side, side);
  for (int i = 0; i <= 4; ++i) {
    double q = grid.q_min + (grid.q_max - grid.q_min) * i / 4.0;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", qx(q),
                       top + side + 16, q);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6, qy(q) + 4, q);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">q_x</text>\n", left + side / 2, top + side + 40);
  out += fmt::format("<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">q_y</text>\n",
                     top + side / 2);

  const double bx = left + side + 20;
  for (int i = 0; i < 100; ++i) {
    auto rgb = colormap((i + 0.5) / 100.0);
    out += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"{}\" height=\"{:.2f}\" fill=\"#{:02x}{:02x}{:02x}\"/>\n", bx,
                       top + side * (99 - i) / 100.0, bar, side / 100.0 + 0.05, static_cast<int>(rgb[0]),
                       static_cast<int>(rgb[1]), static_cast<int>(rgb[2]));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\">{:.3g}</text>\n", bx + bar + 4, top + 10, hi);
  out += fmt::format("<text x=\"{}\" y=\"{}\">{:.3g}</text>\n", bx + bar + 4, top + side,
                     options.log_scale ? floor_value : *std::min_element(shown.begin(), shown.end()));
  if (options.log_scale) out += fmt::format("<text x=\"{}\" y=\"{}\">log</text>\n", bx, top + side + 16);
  std::string title = options.title;
  if (options.cap) title += fmt::format("{}capped at {}", title.empty() ? "" : ", ", *options.cap);
  if (!title.empty())
    out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", left + side / 2,
                       escape(title));
  out += "</svg>\n";
  return out;
}

}  // namespace qahyst
