#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qahyst/analysis.hpp"
#include "qahyst/device.hpp"
#include "qahyst/dynamics.hpp"
#include "qahyst/model.hpp"
#include "qahyst/errors.hpp"
#include "qahyst/schedule.hpp"

namespace qahyst {

enum class ModelFamily { Ferromagnet, RandomBond };

struct ModelSpec {
  ModelFamily family = ModelFamily::Ferromagnet;
  /// Either a lattice (rows, cols) or an edge-list path.
  std::size_t rows = 16;
  std::size_t cols = 16;
  std::string edge_list;
  std::uint64_t seed = 1;
  /// Uniform programmed h; its sign sets the field direction.
  double field = 1.0;
};

/// Mirrors the JSON config document key for key (see configs/).
struct ExperimentConfig {
  ModelSpec model;
  /// "synthetic" or a profile CSV path.
  std::string profile = "synthetic";
  EngineConfig engine;
  std::vector<double> s_values{0.5};
  /// Defaults to the profile's h_gain_max.
  std::optional<double> h_max;
  std::size_t n_samples = 2000;
  TimelineOptions timeline;
  std::uint64_t base_seed = 1;
  std::string output_dir = "out";
  bool store_raw_samples = false;
  /// Keep the first `msf_samples` readouts per slice for structure-factor work (0 = off).
  std::size_t msf_samples = 0;
  bool export_schedules = false;
  /// Sampling threads; 0 = hardware concurrency. Results do not depend on it.
  unsigned workers = 0;
};

/// Throws ValidationError for unknown keys, wrong types or invalid values.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

std::shared_ptr<const Graph> build_graph(const ModelSpec& spec);
IsingModel build_model(const ModelSpec& spec);
DeviceProfile resolve_profile(const std::string& ref);

struct HysteresisTrace {
  double s = 0.0;
  std::vector<TraceRecord> records;
  /// Config echo, seeds, profile, model fingerprint, timestamps.
  std::string manifest_json;
  std::string trace_path;
};

/// Trace CSV columns: slice_index,time_us,H_field,sweep_tag,mean_Mz,std_Mz,mean_F,mean_h_internal,n_samples.
/// Invalid slices are written with nan statistics and n_samples 0.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records);
std::vector<TraceRecord> read_trace_csv(std::istream& in);
std::vector<TraceRecord> read_trace_file(const std::string& path);

std::string trace_file_name(double s);

using ProgressFn = std::function<void(double s, std::size_t slice, std::size_t total)>;

/// For every (deduplicated) s: compiles the timeline, samples and summarizes each
/// slice, appends per-slice JSON lines, then atomically writes the trace CSV and
/// manifest. Slices are independent; no state carries between them.
std::vector<HysteresisTrace> run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Recomputes a single slice's record from the configuration.
TraceRecord rerun_slice(const ExperimentConfig& config, double s, std::size_t slice_index);

struct AreaSweepResult {
  std::vector<LoopReport> reports;  // sorted by s
  std::vector<std::string> missing;
  std::vector<std::string> warnings;
};

/// One LoopReport per trace, duplicates by s dropped with a warning, traces
/// that cannot be analyzed listed in `missing`.
AreaSweepResult area_sweep(const std::vector<HysteresisTrace>& traces, const DeviceProfile& profile);

/// Reads trace CSVs and their manifests (for s) from paths.
std::vector<HysteresisTrace> load_traces(const std::vector<std::string>& paths, std::vector<std::string>& missing);

}  // namespace qahyst
