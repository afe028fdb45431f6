#include "qahyst/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qahyst/errors.hpp"
#include "qahyst/observables.hpp"
#include "qahyst/sample_io.hpp"
#include "qahyst/version.hpp"

namespace qahyst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string family_name(ModelFamily f) { return f == ModelFamily::Ferromagnet ? "ferromagnet" : "random_bond"; }

ModelFamily family_from_string(const std::string& text) {
  if (text == "ferromagnet") return ModelFamily::Ferromagnet;
  if (text == "random_bond") return ModelFamily::RandomBond;
  throw ValidationError("unknown model family '" + text + "' (expected ferromagnet or random_bond)");
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ValidationError(fmt::format("unknown key '{}' in {}", it.key(), where));
}

template <class T>
void read(const json& obj, const char* key, T& into, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    into = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("{}.{} has the wrong type", where, key));
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  reject_unknown(doc,
                 {"model", "profile", "engine", "s_values", "h_max", "n_samples", "timeline", "base_seed",
                  "output_dir", "store_raw_samples", "msf_samples", "export_schedules", "workers"},
                 "config");

  if (doc.contains("model")) {
    const auto& m = doc["model"];
    reject_unknown(m, {"family", "lattice", "edge_list", "seed", "field"}, "model");
    std::string family = family_name(c.model.family);
    read(m, "family", family, "model");
    c.model.family = family_from_string(family);
    if (m.contains("lattice")) {
      std::vector<std::size_t> dims;
      read(m, "lattice", dims, "model");
      if (dims.size() != 2 || dims[0] == 0 || dims[1] == 0)
        throw ValidationError("model.lattice must be [rows, cols] with positive entries");
      c.model.rows = dims[0];
      c.model.cols = dims[1];
    }
    read(m, "edge_list", c.model.edge_list, "model");
    read(m, "seed", c.model.seed, "model");
    read(m, "field", c.model.field, "model");
  }
  read(doc, "profile", c.profile, "config");
  if (doc.contains("engine")) {
    const auto& e = doc["engine"];
    reject_unknown(e, {"kind", "beta", "trotter_slices", "sweeps_per_microsecond", "readout"}, "engine");
    std::string kind = to_string(c.engine.kind), readout = to_string(c.engine.readout);
    read(e, "kind", kind, "engine");
    read(e, "readout", readout, "engine");
    c.engine.kind = engine_kind_from_string(kind);
    c.engine.readout = readout_from_string(readout);
    read(e, "beta", c.engine.inv_temperature, "engine");
    read(e, "trotter_slices", c.engine.trotter_slices, "engine");
    read(e, "sweeps_per_microsecond", c.engine.sweeps_per_microsecond, "engine");
  }
  read(doc, "s_values", c.s_values, "config");
  if (doc.contains("h_max") && !doc["h_max"].is_null()) {
    double h = 0;
    read(doc, "h_max", h, "config");
    c.h_max = h;
  }
  read(doc, "n_samples", c.n_samples, "config");
  if (doc.contains("timeline")) {
    const auto& t = doc["timeline"];
    reject_unknown(t, {"total_time", "ramp_time", "pause_time", "gquench_time", "points_per_segment",
                       "max_hgain_slope"},
                   "timeline");
    read(t, "total_time", c.timeline.total_time_us, "timeline");
    read(t, "ramp_time", c.timeline.ramp_time_us, "timeline");
    read(t, "pause_time", c.timeline.pause_time_us, "timeline");
    read(t, "gquench_time", c.timeline.gquench_time_us, "timeline");
    read(t, "points_per_segment", c.timeline.points_per_segment, "timeline");
    if (t.contains("max_hgain_slope") && !t["max_hgain_slope"].is_null()) {
      double cap = 0;
      read(t, "max_hgain_slope", cap, "timeline");
      c.timeline.max_hgain_slope = cap;
    }
  }
  read(doc, "base_seed", c.base_seed, "config");
  read(doc, "output_dir", c.output_dir, "config");
  read(doc, "store_raw_samples", c.store_raw_samples, "config");
  read(doc, "msf_samples", c.msf_samples, "config");
  read(doc, "export_schedules", c.export_schedules, "config");
  read(doc, "workers", c.workers, "config");

  if (c.s_values.empty()) throw ValidationError("s_values must not be empty");
  for (double s : c.s_values)
    if (!(s > 0.0 && s <= 1.0)) throw ValidationError(fmt::format("s value {} outside (0, 1]", s));
  if (c.n_samples == 0) throw ValidationError("n_samples must be at least 1");
  if (std::abs(c.model.field) > 1.0 || c.model.field == 0.0)
    throw ValidationError("model.field must be nonzero with magnitude <= 1");
  validate(c.engine);
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"family", family_name(c.model.family)}, {"seed", c.model.seed}, {"field", c.model.field}};
  if (c.model.edge_list.empty())
    j["model"]["lattice"] = {c.model.rows, c.model.cols};
  else
    j["model"]["edge_list"] = c.model.edge_list;
  j["profile"] = c.profile;
  j["engine"] = {{"kind", to_string(c.engine.kind)},
                 {"beta", c.engine.inv_temperature},
                 {"trotter_slices", c.engine.trotter_slices},
                 {"sweeps_per_microsecond", c.engine.sweeps_per_microsecond},
                 {"readout", to_string(c.engine.readout)}};
  j["s_values"] = c.s_values;
  j["h_max"] = c.h_max ? json(*c.h_max) : json(nullptr);
  j["n_samples"] = c.n_samples;
  j["timeline"] = {{"total_time", c.timeline.total_time_us},
                   {"ramp_time", c.timeline.ramp_time_us},
                   {"pause_time", c.timeline.pause_time_us},
                   {"gquench_time", c.timeline.gquench_time_us},
                   {"points_per_segment", c.timeline.points_per_segment},
                   {"max_hgain_slope",
                    c.timeline.max_hgain_slope ? json(*c.timeline.max_hgain_slope) : json(nullptr)}};
  j["base_seed"] = c.base_seed;
  j["output_dir"] = c.output_dir;
  j["store_raw_samples"] = c.store_raw_samples;
  j["msf_samples"] = c.msf_samples;
  j["export_schedules"] = c.export_schedules;
  j["workers"] = c.workers;
  return j.dump(2);
}

std::shared_ptr<const Graph> build_graph(const ModelSpec& spec) {
  if (!spec.edge_list.empty()) return std::make_shared<const Graph>(load_edge_list_file(spec.edge_list));
  return std::make_shared<const Graph>(square_lattice(spec.rows, spec.cols));
}

IsingModel build_model(const ModelSpec& spec) {
  auto graph = build_graph(spec);
  auto base = spec.family == ModelFamily::Ferromagnet ? ferromagnet(graph) : random_bond(graph, spec.seed);
  return set_uniform_fields(base, spec.field);
}

DeviceProfile resolve_profile(const std::string& ref) {
  if (ref.empty() || ref == "synthetic") return synthetic_profile();
  return load_profile_file(ref);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << "slice_index,time_us,H_field,sweep_tag,mean_Mz,std_Mz,mean_F,mean_h_internal,n_samples\n";
  for (const auto& r : records) {
    const auto& o = r.obs;
    if (r.valid)
      out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.slice_index, r.time_us, o.target_field,
                         to_string(o.sweep_tag), o.mean_mz, o.std_mz, o.mean_f, o.mean_h_internal, o.n_samples);
    else
      out << fmt::format("{},{},{},{},nan,nan,nan,nan,0\n", r.slice_index, r.time_us, o.target_field,
                         to_string(o.sweep_tag));
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<TraceRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("slice_index,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 9) throw ParseError(fmt::format("expected 9 columns, got {}", cells.size()), line_no);
    try {
      TraceRecord r;
      r.slice_index = std::stoul(cells[0]);
      r.time_us = std::stod(cells[1]);
      r.obs.target_field = std::stod(cells[2]);
      r.obs.sweep_tag = sweep_tag_from_string(cells[3]);
      r.obs.n_samples = std::stoul(cells[8]);
      r.valid = r.obs.n_samples > 0;
      if (r.valid) {
        r.obs.mean_mz = std::stod(cells[4]);
        r.obs.std_mz = std::stod(cells[5]);
        r.obs.mean_f = std::stod(cells[6]);
        r.obs.mean_h_internal = std::stod(cells[7]);
      }
      out.push_back(r);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("malformed trace row", line_no);
    }
  }
  return out;
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  return read_trace_csv(in);
}

std::string trace_file_name(double s) { return fmt::format("trace_s{:.3f}.csv", s); }

namespace {

std::string stem_for(double s) { return fmt::format("s{:.3f}", s); }

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::vector<double> unique_s(const std::vector<double>& values) {
  std::vector<double> out;
  for (double s : values) {
    if (std::find(out.begin(), out.end(), s) != out.end()) {
      std::cerr << fmt::format("warning: duplicate s = {} ignored\n", s);
      continue;
    }
    out.push_back(s);
  }
  return out;
}

json record_json(const TraceRecord& r, const std::string& error) {
  json j{{"slice_index", r.slice_index}, {"time_us", r.time_us}, {"H_field", r.obs.target_field},
         {"sweep_tag", to_string(r.obs.sweep_tag)}, {"valid", r.valid}};
  if (r.valid) {
    j["mean_Mz"] = r.obs.mean_mz;
    j["std_Mz"] = r.obs.std_mz;
    j["mean_F"] = r.obs.mean_f;
    j["mean_h_internal"] = r.obs.mean_h_internal;
    j["n_samples"] = r.obs.n_samples;
  } else {
    j["error"] = error;
  }
  return j;
}

struct Prepared {
  IsingModel model;
  DeviceProfile profile;
  double h_max;
};

Prepared prepare(const ExperimentConfig& config) {
  validate(config.engine);
  auto profile = resolve_profile(config.profile);
  double h_max = config.h_max.value_or(profile.h_gain_max);
  return {build_model(config.model), std::move(profile), h_max};
}

TimelineOptions timeline_options(const ExperimentConfig& config) {
  auto opt = config.timeline;
  opt.field_coefficient = config.model.field;
  return opt;
}

}  // namespace

TraceRecord rerun_slice(const ExperimentConfig& config, double s, std::size_t k) {
  auto prep = prepare(config);
  auto tl = build_timeline(prep.profile, s, prep.h_max, timeline_options(config));
  auto slice = slice_at(tl, k);
  auto set = sample_slice(prep.model, prep.profile, slice, config.engine, config.base_seed, config.n_samples,
                          config.workers);
  return {k, tl.slice_times[k], summarize(prep.model, set, slice.sweep_tag), true};
}

std::vector<HysteresisTrace> run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  auto prep = prepare(config);
  const fs::path dir(config.output_dir);
  {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
  const std::size_t keep = config.store_raw_samples ? config.n_samples : std::min(config.msf_samples, config.n_samples);

  std::vector<HysteresisTrace> traces;
  for (double s : unique_s(config.s_values)) {
    auto tl = build_timeline(prep.profile, s, prep.h_max, timeline_options(config));
    const auto stem = stem_for(s);
    const fs::path trace_path = dir / trace_file_name(s);
    const fs::path partial_marker = fs::path(trace_path) += ".partial";

    HysteresisTrace trace;
    trace.s = s;
    trace.trace_path = trace_path.string();
    const std::string started = utc_now();

    try {
      std::ofstream progress_log(dir / ("trace_" + stem + ".jsonl"), std::ios::trunc);
      if (!progress_log) throw IoError("cannot open progress log in " + dir.string());
      std::optional<SampleWriter> raw;
      if (keep > 0) raw.emplace((dir / ("samples_" + stem + ".bin")).string(), prep.model.spin_count());
      std::optional<std::ofstream> schedules;
      if (config.export_schedules) schedules.emplace(dir / ("schedules_" + stem + ".jsonl"), std::ios::trunc);

      std::vector<std::size_t> invalid;
      for (std::size_t k = 0; k < tl.slice_count(); ++k) {
        TraceRecord rec;
        rec.slice_index = k;
        rec.time_us = tl.slice_times[k];
        rec.obs.target_field = tl.slice_fields[k];
        rec.obs.sweep_tag = tl.slice_tags[k];
        std::string error;
        try {
          auto slice = slice_at(tl, k);
          if (schedules) *schedules << slice_to_json(slice) << '\n';
          auto set = sample_slice(prep.model, prep.profile, slice, config.engine, config.base_seed,
                                  config.n_samples, config.workers);
          rec.obs = summarize(prep.model, set, slice.sweep_tag);
          if (raw) raw->append(set, keep);
        } catch (const IoError&) {
          throw;
        } catch (const std::ios_base::failure& e) {
          throw IoError(e.what());
        } catch (const std::exception& e) {
          rec.valid = false;
          error = e.what();
          invalid.push_back(k);
        }
        trace.records.push_back(rec);
        progress_log << record_json(rec, error).dump() << '\n';
        progress_log.flush();
        if (!progress_log) throw IoError("write to progress log failed");
        if (progress) progress(s, k + 1, tl.slice_count());
      }
      if (raw) raw->flush();

      std::ostringstream csv;
      write_trace_csv(csv, trace.records);
      write_atomically(trace_path, csv.str());

      json manifest;
      manifest["artifact"] = "qahyst";
      manifest["version"] = kVersion;
      manifest["config"] = json::parse(config_to_json(config));
      manifest["s"] = s;
      manifest["h_max"] = prep.h_max;
      manifest["profile"] = prep.profile.name;
      manifest["gamma_over_j"] = prep.profile.b(s) > 0 ? json(gamma_over_j(prep.profile, s)) : json(nullptr);
      manifest["model_fingerprint"] = prep.model.fingerprint();
      manifest["spin_count"] = prep.model.spin_count();
      manifest["slice_count"] = tl.slice_count();
      manifest["loop_begin"] = tl.loop_begin();
      manifest["seed_derivation"] = "seed_seq(base_seed lo/hi, slice_index lo/hi, sample_index lo/hi)";
      manifest["base_seed"] = config.base_seed;
      manifest["invalid_slices"] = invalid;
      manifest["raw_samples_per_slice"] = keep;
      manifest["started_utc"] = started;
      manifest["finished_utc"] = utc_now();
      trace.manifest_json = manifest.dump(2);
      write_atomically(dir / ("trace_" + stem + ".manifest.json"), trace.manifest_json);
      if (raw) {
        json side{{"spin_count", prep.model.spin_count()},
                  {"model_fingerprint", prep.model.fingerprint()},
                  {"engine", manifest["config"]["engine"]},
                  {"profile", prep.profile.name},
                  {"model", manifest["config"]["model"]},
                  {"s", s},
                  {"records_per_slice", keep}};
        write_atomically(dir / ("samples_" + stem + ".json"), side.dump(2));
      }
    } catch (const IoError& e) {
      std::ofstream marker(partial_marker);
      marker << "partial trace: " << e.what() << '\n';
      throw;
    }
    std::error_code ec;
    fs::remove(partial_marker, ec);
    traces.push_back(std::move(trace));
  }
  return traces;
}

AreaSweepResult area_sweep(const std::vector<HysteresisTrace>& traces, const DeviceProfile& profile) {
  AreaSweepResult out;
  std::set<double> seen;
  for (const auto& t : traces) {
    if (!seen.insert(t.s).second) {
      out.warnings.push_back(fmt::format("duplicate s = {} dropped", t.s));
      continue;
    }
    try {
      out.reports.push_back(loop_report(t.records, t.s, profile));
    } catch (const std::exception& e) {
      out.missing.push_back(fmt::format("s = {}: {}", t.s, e.what()));
    }
  }
  std::sort(out.reports.begin(), out.reports.end(),
            [](const LoopReport& a, const LoopReport& b) { return a.s_value < b.s_value; });
  return out;
}

std::vector<HysteresisTrace> load_traces(const std::vector<std::string>& paths, std::vector<std::string>& missing) {
  std::vector<HysteresisTrace> out;
  for (const auto& p : paths) {
    fs::path path(p);
    fs::path manifest = path;
    manifest.replace_extension(".manifest.json");
    try {
      std::ifstream in(manifest);
      if (!in) throw std::runtime_error("no manifest " + manifest.string());
      auto j = json::parse(in);
      HysteresisTrace t;
      t.s = j.at("s").get<double>();
      t.manifest_json = j.dump(2);
      t.records = read_trace_file(p);
      t.trace_path = p;
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      missing.push_back(p + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qahyst
