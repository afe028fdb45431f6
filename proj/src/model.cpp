#include "qahyst/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "qahyst/errors.hpp"

namespace qahyst {

IsingModel::IsingModel(std::shared_ptr<const Graph> graph, std::vector<double> couplings, std::vector<double> fields)
    : graph_(std::move(graph)), couplings_(std::move(couplings)), fields_(std::move(fields)) {
  if (!graph_) throw ValidationError("model requires a graph");
  if (couplings_.size() != graph_->edge_count())
    throw ValidationError(
        fmt::format("{} couplings given for {} edges", couplings_.size(), graph_->edge_count()));
  if (fields_.size() != graph_->node_count())
    throw ValidationError(fmt::format("{} fields given for {} nodes", fields_.size(), graph_->node_count()));
  for (std::size_t k = 0; k < couplings_.size(); ++k) {
    if (!(std::abs(couplings_[k]) <= 1.0)) throw ValidationError(fmt::format("coupling {} out of range [-1, 1]", k));
    if (couplings_[k] == 0.0) throw ValidationError(fmt::format("coupling {} is zero", k));
  }
  for (std::size_t i = 0; i < fields_.size(); ++i)
    if (!(std::abs(fields_[i]) <= 1.0)) throw ValidationError(fmt::format("field {} out of range [-1, 1]", i));
}

double IsingModel::energy(std::span<const std::int8_t> spins) const {
  double e = 0.0;
  for (std::size_t i = 0; i < fields_.size(); ++i) e += fields_[i] * spins[i];
  auto edges = graph_->edges();
  for (std::size_t k = 0; k < edges.size(); ++k) e += couplings_[k] * spins[edges[k].u] * spins[edges[k].v];
  return e;
}

std::string IsingModel::fingerprint() const {
  std::ostringstream text;
  write_model(text, *this);
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char ch : text.str()) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return fmt::format("{:016x}", hash);
}

IsingModel ferromagnet(std::shared_ptr<const Graph> graph) {
  if (!graph) throw ValidationError("model requires a graph");
  std::vector<double> j(graph->edge_count(), -1.0);
  std::vector<double> h(graph->node_count(), 0.0);
  return IsingModel(std::move(graph), std::move(j), std::move(h));
}

IsingModel random_bond(std::shared_ptr<const Graph> graph, std::uint64_t seed) {
  if (!graph) throw ValidationError("model requires a graph");
  std::mt19937_64 rng(seed);
  const std::size_t n = graph->edge_count();
  double majority = -1.0;
  if (n % 2 == 1 && (rng() & 1u)) majority = 1.0;
  std::vector<double> j(n, -majority);
  std::fill(j.begin(), j.begin() + static_cast<std::ptrdiff_t>(n - n / 2), majority);
  std::shuffle(j.begin(), j.end(), rng);
  std::vector<double> h(graph->node_count(), 0.0);
  return IsingModel(std::move(graph), std::move(j), std::move(h));
}

IsingModel set_uniform_fields(const IsingModel& model, double value) {
  if (!(std::abs(value) <= 1.0)) throw ValidationError(fmt::format("uniform field {} outside [-1, 1]", value));
  std::vector<double> h(model.spin_count(), value);
  return IsingModel(model.graph_ptr(), {model.couplings().begin(), model.couplings().end()}, std::move(h));
}

IsingModel negate_fields(const IsingModel& model) {
  std::vector<double> h(model.fields().begin(), model.fields().end());
  for (auto& v : h) v = -v;
  return IsingModel(model.graph_ptr(), {model.couplings().begin(), model.couplings().end()}, std::move(h));
}

void write_model(std::ostream& out, const IsingModel& model, const std::string& graph_ref) {
  if (!graph_ref.empty()) out << "graph " << graph_ref << '\n';
  out << "nodes " << model.spin_count() << '\n';
  for (std::size_t i = 0; i < model.spin_count(); ++i) out << fmt::format("h {} {}\n", i, model.fields()[i]);
  auto edges = model.graph().edges();
  for (std::size_t k = 0; k < edges.size(); ++k)
    out << fmt::format("J {} {} {}\n", edges[k].u, edges[k].v, model.couplings()[k]);
}

IsingModel read_model(std::istream& in, std::shared_ptr<const Graph> graph) {
  std::size_t nodes = 0;
  std::vector<std::pair<std::size_t, double>> hs;
  std::vector<std::pair<Edge, double>> js;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line.substr(0, line.find('#')));
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "graph") continue;
    if (key == "nodes") {
      if (!(ss >> nodes)) throw ParseError("bad 'nodes' line", line_no);
    } else if (key == "h") {
      std::size_t i;
      double v;
      if (!(ss >> i >> v)) throw ParseError("bad 'h' line", line_no);
      hs.emplace_back(i, v);
    } else if (key == "J") {
      NodeIndex u, v;
      double w;
      if (!(ss >> u >> v >> w)) throw ParseError("bad 'J' line", line_no);
      js.push_back({{u, v}, w});
    } else {
      throw ParseError("unknown record '" + key + "'", line_no);
    }
    std::string extra;
    if (ss >> extra) throw ParseError("trailing fields", line_no);
  }
  if (nodes == 0) throw ParseError("model file lacks a 'nodes N' record");

  if (!graph) {
    std::vector<Edge> edges;
    for (const auto& [e, w] : js) edges.push_back(e);
    graph = std::make_shared<const Graph>(nodes, std::move(edges));
  }
  if (graph->node_count() != nodes) throw ValidationError("model node count does not match graph");
  if (js.size() != graph->edge_count()) throw ValidationError("model coupling count does not match graph");

  std::vector<double> h(nodes, 0.0);
  for (const auto& [i, v] : hs) {
    if (i >= nodes) throw ValidationError(fmt::format("field index {} out of range", i));
    h[i] = v;
  }
  std::vector<double> j(graph->edge_count());
  auto edges = graph->edges();
  for (std::size_t k = 0; k < js.size(); ++k) {
    const auto& [e, w] = js[k];
    bool same = (edges[k].u == e.u && edges[k].v == e.v) || (edges[k].u == e.v && edges[k].v == e.u);
    if (!same) throw ValidationError(fmt::format("coupling {} is on ({}, {}), graph edge differs", k, e.u, e.v));
    j[k] = w;
  }
  return IsingModel(std::move(graph), std::move(j), std::move(h));
}

}  // namespace qahyst
