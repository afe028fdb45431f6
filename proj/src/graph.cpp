#include "qahyst/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "qahyst/errors.hpp"

namespace qahyst {

Graph::Graph(std::size_t node_count, std::vector<Edge> edges, std::optional<std::vector<Point2>> coords,
             std::vector<std::string> names)
    : node_count_(node_count), edges_(std::move(edges)), coords_(std::move(coords)), names_(std::move(names)) {
  if (node_count_ == 0) throw ValidationError("graph must have at least one node");
  if (!names_.empty() && names_.size() != node_count_)
    throw ValidationError("name table size does not match node count");

  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const auto& e : edges_) {
    if (e.u >= node_count_ || e.v >= node_count_)
      throw ValidationError(fmt::format("edge ({}, {}) references a node outside [0, {})", e.u, e.v, node_count_));
    if (e.u == e.v) throw ValidationError(fmt::format("self-loop on node {}", e.u));
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second)
      throw ValidationError(fmt::format("duplicate edge ({}, {})", e.u, e.v));
  }

  if (coords_) {
    if (coords_->size() != node_count_) throw ValidationError("coordinate table size does not match node count");
    std::set<std::pair<double, double>> positions;
    for (std::size_t i = 0; i < coords_->size(); ++i) {
      const auto& p = (*coords_)[i];
      if (!positions.emplace(p.x, p.y).second)
        throw ValidationError(fmt::format("node {} shares position ({}, {}) with another node", i, p.x, p.y));
    }
  }

  // CSR adjacency, neighbors sorted per node.
  std::vector<std::vector<std::pair<NodeIndex, std::uint32_t>>> lists(node_count_);
  for (std::uint32_t id = 0; id < edges_.size(); ++id) {
    lists[edges_[id].u].emplace_back(edges_[id].v, id);
    lists[edges_[id].v].emplace_back(edges_[id].u, id);
  }
  offsets_.assign(node_count_ + 1, 0);
  adj_nodes_.reserve(2 * edges_.size());
  adj_edges_.reserve(2 * edges_.size());
  for (std::size_t i = 0; i < node_count_; ++i) {
    std::sort(lists[i].begin(), lists[i].end());
    for (const auto& [n, id] : lists[i]) {
      adj_nodes_.push_back(n);
      adj_edges_.push_back(id);
    }
    offsets_[i + 1] = adj_nodes_.size();
  }
}

bool Graph::has_edge(NodeIndex u, NodeIndex v) const noexcept {
  if (u >= node_count_ || v >= node_count_) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::span<const Point2> Graph::coords() const {
  if (!coords_) throw ValidationError("graph has no node coordinates");
  return *coords_;
}

std::string Graph::label(NodeIndex i) const { return names_.empty() ? std::to_string(i) : names_.at(i); }

std::optional<NodeIndex> Graph::find_label(const std::string& label) const {
  if (names_.empty()) {
    NodeIndex idx = 0;
    std::istringstream ss(label);
    if (ss >> idx && ss.eof() && idx < node_count_) return idx;
    return std::nullopt;
  }
  auto it = std::find(names_.begin(), names_.end(), label);
  if (it == names_.end()) return std::nullopt;
  return static_cast<NodeIndex>(it - names_.begin());
}

Graph square_lattice(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw ValidationError("lattice dimensions must be positive");
  std::vector<Edge> edges;
  edges.reserve(rows * (cols - 1) + cols * (rows - 1));
  std::vector<Point2> coords(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      auto i = static_cast<NodeIndex>(r * cols + c);
      coords[i] = {static_cast<double>(c), static_cast<double>(r)};
      if (c + 1 < cols) edges.push_back({i, i + 1});
      if (r + 1 < rows) edges.push_back({i, static_cast<NodeIndex>(i + cols)});
    }
  }
  return Graph(rows * cols, std::move(edges), std::move(coords));
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line.substr(0, line.find('#')));
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(fmt::format("expected a number, got '{}'", tok), line_no);
}

}  // namespace

Graph load_edge_list(std::istream& in) {
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeIndex> index;
  std::map<NodeIndex, Point2> positions;
  std::vector<Edge> edges;
  std::set<std::pair<NodeIndex, NodeIndex>> seen;

  auto intern = [&](const std::string& label) {
    auto [it, fresh] = index.emplace(label, static_cast<NodeIndex>(names.size()));
    if (fresh) names.push_back(label);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() == 2) {
      NodeIndex u = intern(tok[0]);
      NodeIndex v = intern(tok[1]);
      if (u == v) throw ValidationError(fmt::format("self-loop on '{}' (line {})", tok[0], line_no));
      if (!seen.emplace(std::min(u, v), std::max(u, v)).second)
        throw ValidationError(fmt::format("duplicate edge '{} {}' (line {})", tok[0], tok[1], line_no));
      edges.push_back({u, v});
    } else if (tok.size() == 3) {
      NodeIndex u = intern(tok[0]);
      Point2 p{parse_double(tok[1], line_no), parse_double(tok[2], line_no)};
      if (!positions.emplace(u, p).second)
        throw ValidationError(fmt::format("position of '{}' given twice (line {})", tok[0], line_no));
    } else {
      throw ParseError(fmt::format("expected 'u v' or 'u x y', got {} fields", tok.size()), line_no);
    }
  }
  if (names.empty()) throw ParseError("edge list contains no nodes");

  std::optional<std::vector<Point2>> coords;
  if (!positions.empty()) {
    if (positions.size() != names.size())
      throw ValidationError(
          fmt::format("positions given for {} of {} nodes; supply all or none", positions.size(), names.size()));
    coords.emplace(names.size());
    for (const auto& [i, p] : positions) (*coords)[i] = p;
  }
  const std::size_t n = names.size();
  return Graph(n, std::move(edges), std::move(coords), std::move(names));
}

Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list '" + path + "'");
  return load_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& graph) {
  out << "# nodes " << graph.node_count() << " edges " << graph.edge_count() << '\n';
  if (graph.has_coords()) {
    auto xy = graph.coords();
    for (NodeIndex i = 0; i < graph.node_count(); ++i)
      out << graph.label(i) << ' ' << fmt::format("{} {}", xy[i].x, xy[i].y) << '\n';
  }
  for (const auto& e : graph.edges()) out << graph.label(e.u) << ' ' << graph.label(e.v) << '\n';
}

GridEmbedding load_grid_embedding(std::istream& in, const Graph& host) {
  GridEmbedding emb;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<bool> filled;
  std::set<NodeIndex> used;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (!have_header) {
      if (tok.size() != 2) throw ParseError("embedding header must be 'rows cols'", line_no);
      auto rows = parse_double(tok[0], line_no), cols = parse_double(tok[1], line_no);
      if (rows < 1 || cols < 1 || rows != static_cast<std::size_t>(rows) || cols != static_cast<std::size_t>(cols))
        throw ParseError("embedding dimensions must be positive integers", line_no);
      emb.rows = static_cast<std::size_t>(rows);
      emb.cols = static_cast<std::size_t>(cols);
      emb.mapping.assign(emb.rows * emb.cols, 0);
      filled.assign(emb.rows * emb.cols, false);
      have_header = true;
      continue;
    }
    if (tok.size() != 3) throw ParseError("expected 'row col node'", line_no);
    auto r = parse_double(tok[0], line_no), c = parse_double(tok[1], line_no);
    if (r < 0 || c < 0 || r >= emb.rows || c >= emb.cols || r != static_cast<std::size_t>(r) ||
        c != static_cast<std::size_t>(c))
      throw ParseError(fmt::format("grid cell ({}, {}) outside {}x{}", tok[0], tok[1], emb.rows, emb.cols), line_no);
    auto node = host.find_label(tok[2]);
    if (!node) throw ValidationError(fmt::format("node '{}' not in host graph (line {})", tok[2], line_no));
    auto cell = static_cast<std::size_t>(r) * emb.cols + static_cast<std::size_t>(c);
    if (filled[cell]) throw ValidationError(fmt::format("grid cell ({}, {}) mapped twice (line {})", r, c, line_no));
    if (!used.insert(*node).second)
      throw ValidationError(fmt::format("host node '{}' mapped twice (line {})", tok[2], line_no));
    filled[cell] = true;
    emb.mapping[cell] = *node;
  }
  if (!have_header) throw ParseError("embedding file is empty");
  if (std::find(filled.begin(), filled.end(), false) != filled.end())
    throw ValidationError("embedding leaves grid cells unmapped");
  return emb;
}

namespace {

void check_mapping(const Graph& host, const GridEmbedding& emb) {
  if (emb.rows == 0 || emb.cols == 0 || emb.mapping.size() != emb.rows * emb.cols)
    throw ValidationError("embedding mapping does not cover the grid");
  std::set<NodeIndex> used;
  for (auto n : emb.mapping) {
    if (n >= host.node_count()) throw ValidationError(fmt::format("embedding maps to unknown host node {}", n));
    if (!used.insert(n).second) throw ValidationError(fmt::format("host node {} mapped twice", n));
  }
}

}  // namespace

EmbeddingReport verify_grid_embedding(const Graph& host, const GridEmbedding& emb) {
  check_mapping(host, emb);
  EmbeddingReport report;

  std::unordered_map<NodeIndex, std::size_t> cell_of;
  for (std::size_t k = 0; k < emb.mapping.size(); ++k) cell_of.emplace(emb.mapping[k], k);

  auto grid_adjacent = [&](std::size_t a, std::size_t b) {
    auto ra = a / emb.cols, ca = a % emb.cols, rb = b / emb.cols, cb = b % emb.cols;
    return (ra == rb && (ca + 1 == cb || cb + 1 == ca)) || (ca == cb && (ra + 1 == rb || rb + 1 == ra));
  };

  for (std::size_t r = 0; r < emb.rows; ++r) {
    for (std::size_t c = 0; c < emb.cols; ++c) {
      auto here = emb.at(r, c);
      if (c + 1 < emb.cols && !host.has_edge(here, emb.at(r, c + 1))) report.missing_edges.push_back({here, emb.at(r, c + 1)});
      if (r + 1 < emb.rows && !host.has_edge(here, emb.at(r + 1, c))) report.missing_edges.push_back({here, emb.at(r + 1, c)});
    }
  }
  for (const auto& e : host.edges()) {
    auto a = cell_of.find(e.u), b = cell_of.find(e.v);
    if (a == cell_of.end() || b == cell_of.end()) continue;
    if (!grid_adjacent(a->second, b->second)) report.extra_edges.push_back(e);
  }
  report.ok = report.missing_edges.empty() && report.extra_edges.empty();
  return report;
}

Graph embedded_grid(const Graph& host, const GridEmbedding& emb) {
  check_mapping(host, emb);
  std::unordered_map<NodeIndex, NodeIndex> local;
  std::vector<Point2> coords(emb.mapping.size());
  std::vector<std::string> names(emb.mapping.size());
  for (std::size_t k = 0; k < emb.mapping.size(); ++k) {
    local.emplace(emb.mapping[k], static_cast<NodeIndex>(k));
    coords[k] = {static_cast<double>(k % emb.cols), static_cast<double>(k / emb.cols)};
    names[k] = host.label(emb.mapping[k]);
  }
  std::vector<Edge> edges;
  for (const auto& e : host.edges()) {
    auto a = local.find(e.u), b = local.find(e.v);
    if (a != local.end() && b != local.end()) edges.push_back({a->second, b->second});
  }
  return Graph(emb.mapping.size(), std::move(edges), std::move(coords), std::move(names));
}

}  // namespace qahyst
