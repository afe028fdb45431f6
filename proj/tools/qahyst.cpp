// qahyst: build models, run hysteresis experiments, analyze and plot traces.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "qahyst/analysis.hpp"
#include "qahyst/errors.hpp"
#include "qahyst/observables.hpp"
#include "qahyst/plot.hpp"
#include "qahyst/runner.hpp"
#include "qahyst/sample_io.hpp"
#include "qahyst/version.hpp"

namespace fs = std::filesystem;
using namespace qahyst;

namespace {

/// Writes to `path`, or standard output when the path is empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The manifest next to a trace CSV, if present.
std::optional<nlohmann::json> trace_manifest(const std::string& trace) {
  fs::path p(trace);
  p.replace_extension(".manifest.json");
  std::ifstream in(p);
  if (!in) return std::nullopt;
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    throw ParseError("unreadable manifest " + p.string());
  }
}

DeviceProfile profile_for_trace(const std::string& trace, const std::string& override_ref) {
  if (!override_ref.empty()) return resolve_profile(override_ref);
  if (auto m = trace_manifest(trace); m && m->contains("config")) return resolve_profile((*m)["config"].value("profile", "synthetic"));
  return synthetic_profile();
}

struct SampleSource {
  std::string samples;
  std::uint32_t slice = 0;
  std::size_t rows = 0, cols = 0;
  std::string edge_list;
};

std::vector<SpinConfiguration> load_slice(const SampleSource& src) {
  auto records = read_samples(src.samples);
  auto configs = samples_for_slice(records, src.slice);
  if (configs.empty()) throw ValidationError(fmt::format("no samples stored for slice {}", src.slice));
  return configs;
}

/// Lattice geometry from flags, falling back to the sample sidecar.
ModelSpec sample_geometry(const SampleSource& src) {
  ModelSpec spec;
  spec.edge_list = src.edge_list;
  if (src.rows && src.cols) {
    spec.rows = src.rows;
    spec.cols = src.cols;
    return spec;
  }
  if (!src.edge_list.empty()) return spec;
  fs::path side(src.samples);
  side.replace_extension(".json");
  std::ifstream in(side);
  if (!in) throw ValidationError("lattice geometry unknown: pass --rows/--cols or --edge-list");
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("model")) throw ParseError("bad sample sidecar " + side.string());
  const auto& m = j["model"];
  if (m.contains("edge_list")) {
    spec.edge_list = m["edge_list"].get<std::string>();
  } else {
    spec.rows = m.at("lattice").at(0).get<std::size_t>();
    spec.cols = m.at("lattice").at(1).get<std::size_t>();
  }
  return spec;
}

LoopObservable observable_from_string(const std::string& text) {
  if (text == "mz") return LoopObservable::Magnetization;
  if (text == "f") return LoopObservable::Frustration;
  if (text == "h") return LoopObservable::InternalField;
  throw ValidationError("unknown observable '" + text + "' (expected mz, f or h)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic hysteresis experiments on simulated annealers"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kVersion));

  // model
  auto* model_cmd = app.add_subcommand("model", "Write an Ising model file");
  std::string model_config, model_out;
  std::string family = "ferromagnet", edge_list;
  std::size_t rows = 16, cols = 16;
  std::optional<std::uint64_t> model_seed;
  double field = 1.0;
  model_cmd->add_option("--config", model_config, "Experiment config; its model section is used");
  model_cmd->add_option("--family", family, "ferromagnet or random_bond");
  model_cmd->add_option("--rows", rows, "Lattice rows");
  model_cmd->add_option("--cols", cols, "Lattice columns");
  model_cmd->add_option("--edge-list", edge_list, "Hardware-style edge list instead of a lattice");
  model_cmd->add_option("--seed", model_seed, "Random-bond seed");
  model_cmd->add_option("--field", field, "Uniform programmed h");
  model_cmd->add_option("--out", model_out, "Output file (default: stdout)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a hysteresis experiment");
  std::string run_config, run_out, run_engine;
  std::optional<std::uint64_t> run_seed;
  std::optional<unsigned> run_workers;
  std::vector<double> run_s;
  std::optional<std::size_t> run_samples;
  bool quiet = false;
  run_cmd->add_option("--config", run_config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", run_out, "Output directory");
  run_cmd->add_option("--seed", run_seed, "Base seed");
  run_cmd->add_option("--workers", run_workers, "Sampling threads (0 = all cores)");
  run_cmd->add_option("--engine", run_engine, "metropolis or piqmc");
  run_cmd->add_option("--s", run_s, "Anneal fractions (replaces s_values)");
  run_cmd->add_option("--n-samples", run_samples, "Samples per slice");
  run_cmd->add_flag("--quiet", quiet, "No progress output");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Loop report for one trace");
  std::string analyze_trace, analyze_out, analyze_profile;
  std::size_t analyze_interp = 10000;
  analyze_cmd->add_option("--trace", analyze_trace, "Trace CSV")->required();
  analyze_cmd->add_option("--out", analyze_out, "Report CSV (default: stdout)");
  analyze_cmd->add_option("--profile", analyze_profile, "Device profile (default: from manifest)");
  analyze_cmd->add_option("--interp", analyze_interp, "Interpolation points");

  // msf
  auto* msf_cmd = app.add_subcommand("msf", "Structure factor of stored samples");
  SampleSource msf_src;
  std::string msf_out, msf_norm = "per-site";
  std::size_t grid_size = 200, msf_navg = 100;
  msf_cmd->add_option("--samples", msf_src.samples, "Raw sample file")->required();
  msf_cmd->add_option("--slice", msf_src.slice, "Slice index")->required();
  msf_cmd->add_option("--rows", msf_src.rows, "Lattice rows");
  msf_cmd->add_option("--cols", msf_src.cols, "Lattice columns");
  msf_cmd->add_option("--edge-list", msf_src.edge_list, "Edge list with node positions");
  msf_cmd->add_option("--grid", grid_size, "Grid points per axis");
  msf_cmd->add_option("--navg", msf_navg, "Samples averaged");
  msf_cmd->add_option("--normalization", msf_norm, "per-site or raw");
  msf_cmd->add_option("--out", msf_out, "Grid file (default: stdout)");

  // corr
  auto* corr_cmd = app.add_subcommand("corr", "Axis correlation function of stored samples");
  SampleSource corr_src;
  std::string corr_out, corr_axis = "x";
  std::size_t corr_navg = 100;
  std::optional<std::size_t> corr_max_r, corr_fit;
  bool connected = false;
  corr_cmd->add_option("--samples", corr_src.samples, "Raw sample file")->required();
  corr_cmd->add_option("--slice", corr_src.slice, "Slice index")->required();
  corr_cmd->add_option("--rows", corr_src.rows, "Lattice rows");
  corr_cmd->add_option("--cols", corr_src.cols, "Lattice columns");
  corr_cmd->add_option("--axis", corr_axis, "x or y");
  corr_cmd->add_option("--navg", corr_navg, "Samples averaged");
  corr_cmd->add_option("--max-r", corr_max_r, "Largest separation");
  corr_cmd->add_option("--fit", corr_fit, "Fit a correlation length over r = 1..R");
  corr_cmd->add_flag("--connected", connected, "Subtract and normalize by the mean spin");
  corr_cmd->add_option("--out", corr_out, "CSV (default: stdout)");

  // area-sweep
  auto* sweep_cmd = app.add_subcommand("area-sweep", "Loop reports for many traces");
  std::vector<std::string> sweep_traces;
  std::string sweep_out, sweep_profile;
  sweep_cmd->add_option("--trace", sweep_traces, "Trace CSVs")->required();
  sweep_cmd->add_option("--profile", sweep_profile, "Device profile (default: from first manifest)");
  sweep_cmd->add_option("--out", sweep_out, "Report CSV (default: stdout)");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Render a trace loop or a structure-factor grid as SVG");
  std::string plot_trace, plot_msf, plot_out, plot_obs = "mz", plot_title;
  std::optional<double> cap;
  bool linear = false;
  auto* trace_opt = plot_cmd->add_option("--trace", plot_trace, "Trace CSV");
  auto* msf_opt = plot_cmd->add_option("--msf", plot_msf, "Structure-factor grid file");
  trace_opt->excludes(msf_opt);
  plot_cmd->add_option("--observable", plot_obs, "mz, f or h (trace plots)");
  plot_cmd->add_option("--cap", cap, "Clip heatmap values above this");
  plot_cmd->add_flag("--linear", linear, "Linear heatmap colour scale");
  plot_cmd->add_option("--title", plot_title, "Plot title");
  plot_cmd->add_option("--out", plot_out, "SVG file (default: stdout)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*model_cmd) {
      ModelSpec spec;
      if (!model_config.empty()) spec = load_config_file(model_config).model;
      if (model_cmd->count("--family")) spec.family = family == "random_bond" ? ModelFamily::RandomBond
                                                   : family == "ferromagnet"
                                                       ? ModelFamily::Ferromagnet
                                                       : throw ValidationError("unknown family '" + family + "'");
      if (model_cmd->count("--rows")) spec.rows = rows;
      if (model_cmd->count("--cols")) spec.cols = cols;
      if (!edge_list.empty()) spec.edge_list = edge_list;
      if (model_seed) spec.seed = *model_seed;
      if (model_cmd->count("--field")) spec.field = field;
      auto model = build_model(spec);
      std::ostringstream out;
      write_model(out, model, spec.edge_list);
      emit(model_out, out.str());
    } else if (*run_cmd) {
      auto config = load_config_file(run_config);
      if (!run_out.empty()) config.output_dir = run_out;
      if (run_seed) config.base_seed = *run_seed;
      if (run_workers) config.workers = *run_workers;
      if (!run_engine.empty()) config.engine.kind = engine_kind_from_string(run_engine);
      if (!run_s.empty()) config.s_values = run_s;
      if (run_samples) {
        if (*run_samples == 0) throw ValidationError("--n-samples must be at least 1");
        config.n_samples = *run_samples;
      }
      validate(config.engine);
      ProgressFn progress;
      if (!quiet)
        progress = [](double s, std::size_t done, std::size_t total) {
          if (done % 50 == 0 || done == total) std::cerr << fmt::format("s={} slice {}/{}\n", s, done, total);
        };
      for (const auto& trace : run_experiment(config, progress)) std::cout << trace.trace_path << '\n';
    } else if (*analyze_cmd) {
      auto records = read_trace_file(analyze_trace);
      auto manifest = trace_manifest(analyze_trace);
      if (!manifest || !manifest->contains("s")) throw ValidationError("trace manifest with s is required");
      auto profile = profile_for_trace(analyze_trace, analyze_profile);
      auto report = loop_report(records, (*manifest)["s"].get<double>(), profile, analyze_interp);
      std::ostringstream out;
      write_loop_reports(out, std::span<const LoopReport>(&report, 1));
      emit(analyze_out, out.str());
    } else if (*msf_cmd) {
      auto configs = load_slice(msf_src);
      auto spec = sample_geometry(msf_src);
      auto graph = build_graph(spec);
      auto grid = structure_factor(configs, graph->coords(), grid_size, msf_navg, msf_normalization_from_string(msf_norm));
      std::ostringstream out;
      write_structure_factor(out, grid);
      emit(msf_out, out.str());
    } else if (*corr_cmd) {
      auto configs = load_slice(corr_src);
      auto spec = sample_geometry(corr_src);
      if (!spec.edge_list.empty()) throw ValidationError("correlations need a square lattice");
      Axis axis = corr_axis == "x"   ? Axis::X
                  : corr_axis == "y" ? Axis::Y
                                     : throw ValidationError("axis must be x or y");
      auto c = correlation_axis(configs, spec.rows, spec.cols, axis, corr_navg, connected, corr_max_r);
      std::ostringstream out;
      out << "r,C\n";
      for (std::size_t r = 0; r < c.size(); ++r) out << fmt::format("{},{}\n", r, c[r]);
      if (corr_fit) out << fmt::format("# xi={}\n", fit_correlation_length(c, *corr_fit));
      emit(corr_out, out.str());
    } else if (*sweep_cmd) {
      std::vector<std::string> missing;
      auto traces = load_traces(sweep_traces, missing);
      if (traces.empty()) throw ValidationError("no readable traces");
      auto profile = profile_for_trace(traces.front().trace_path, sweep_profile);
      auto result = area_sweep(traces, profile);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& m : result.missing) std::cerr << "missing: " << m << '\n';
      for (const auto& m : missing) std::cerr << "missing: " << m << '\n';
      std::ostringstream out;
      write_loop_reports(out, result.reports);
      emit(sweep_out, out.str());
    } else if (*plot_cmd) {
      if (plot_trace.empty() && plot_msf.empty()) throw ValidationError("plot needs --trace or --msf");
      if (!plot_trace.empty()) {
        auto records = read_trace_file(plot_trace);
        if (records.empty()) throw ValidationError("trace is empty");
        emit(plot_out, render_loop_svg(records, observable_from_string(plot_obs), plot_title));
      } else {
        std::istringstream in(slurp(plot_msf));
        auto grid = read_structure_factor(in);
        HeatmapOptions opt;
        opt.cap = cap;
        opt.log_scale = !linear;
        opt.title = plot_title;
        emit(plot_out, render_heatmap_svg(grid, opt));
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
