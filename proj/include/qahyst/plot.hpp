#pragma once

#include <optional>
#include <span>
#include <string>

#include "qahyst/analysis.hpp"
#include "qahyst/observables.hpp"

namespace qahyst {

/// Forward and backward sweeps as two polylines with direction arrows.
/// Throws ValidationError when the trace has no loop records.
std::string render_loop_svg(std::span<const TraceRecord> trace, LoopObservable what = LoopObservable::Magnetization,
                            const std::string& title = {});

struct HeatmapOptions {
  bool log_scale = true;
  /// Values above the cap are drawn at the cap; the grid itself is untouched.
  std::optional<double> cap;
  /// Dashed outline of q in [-pi, pi]^2.
  bool zone_box = true;
  std::string title;
};

std::string render_heatmap_svg(const StructureFactorGrid& grid, const HeatmapOptions& options = {});

}  // namespace qahyst
