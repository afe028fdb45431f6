#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qahyst {

using NodeIndex = std::uint32_t;

struct Edge {
  NodeIndex u;
  NodeIndex v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Position in lattice-constant units.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Undirected simple graph with dense node indices and an optional planar layout.
///
/// Immutable after construction. Edge order is preserved as given, so per-edge
/// data (couplings) can be stored in parallel arrays indexed by edge id.
class Graph {
 public:
  /// Throws ValidationError on self-loops, duplicate edges, out-of-range
  /// endpoints, coincident coordinates or mismatched table sizes.
  Graph(std::size_t node_count, std::vector<Edge> edges,
        std::optional<std::vector<Point2>> coords = std::nullopt,
        std::vector<std::string> names = {});

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Neighbors of `i`, sorted ascending.
  std::span<const NodeIndex> neighbors(NodeIndex i) const noexcept {
    return {adj_nodes_.data() + offsets_[i], adj_nodes_.data() + offsets_[i + 1]};
  }
  /// Edge ids aligned with neighbors(i).
  std::span<const std::uint32_t> incident_edges(NodeIndex i) const noexcept {
    return {adj_edges_.data() + offsets_[i], adj_edges_.data() + offsets_[i + 1]};
  }
  std::size_t degree(NodeIndex i) const noexcept { return offsets_[i + 1] - offsets_[i]; }
  bool has_edge(NodeIndex u, NodeIndex v) const noexcept;

  bool has_coords() const noexcept { return coords_.has_value(); }
  /// Throws ValidationError when the graph carries no layout.
  std::span<const Point2> coords() const;

  /// Original labels from an imported file; empty for generated graphs.
  std::span<const std::string> names() const noexcept { return names_; }
  /// Label of node i: its imported name, or the decimal index.
  std::string label(NodeIndex i) const;
  std::optional<NodeIndex> find_label(const std::string& label) const;

  double average_degree() const noexcept {
    return node_count_ ? 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(node_count_) : 0.0;
  }

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
  std::optional<std::vector<Point2>> coords_;
  std::vector<std::string> names_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeIndex> adj_nodes_;
  std::vector<std::uint32_t> adj_edges_;
};

/// Open-boundary rows x cols square grid. Node (r, c) has index r * cols + c and
/// coordinate (x = c, y = r).
Graph square_lattice(std::size_t rows, std::size_t cols);

/// Reads the text edge-list format.
///
///   # comment
///   u v        edge between labels u and v
///   u x y      position of node u (declares it if it has no edges)
///
/// Labels are arbitrary tokens, re-indexed densely in first-appearance order.
/// Coordinates must be given for every node or for none.
Graph load_edge_list(std::istream& in);
Graph load_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& graph);

/// Rectangular window of grid coordinates mapped onto host nodes.
struct GridEmbedding {
  std::size_t rows = 0;
  std::size_t cols = 0;
  /// Row-major host node per grid cell: mapping[r * cols + c].
  std::vector<NodeIndex> mapping;

  NodeIndex at(std::size_t r, std::size_t c) const { return mapping.at(r * cols + c); }
};

/// `rows cols` header followed by `row col node` triples. Node tokens are
/// resolved through the host's label table. Throws ParseError/ValidationError
/// for unmapped cells, repeated cells or repeated host nodes.
GridEmbedding load_grid_embedding(std::istream& in, const Graph& host);

struct EmbeddingReport {
  bool ok = false;
  /// Grid-adjacent pairs with no host coupler.
  std::vector<Edge> missing_edges;
  /// Host couplers between mapped nodes that are not grid-adjacent.
  std::vector<Edge> extra_edges;
};

/// Checks that the induced host subgraph on the mapped nodes is exactly the
/// open-boundary grid. Reported edges use host node indices.
EmbeddingReport verify_grid_embedding(const Graph& host, const GridEmbedding& emb);

/// Subgraph induced by the embedding, laid out on integer grid coordinates,
/// with node k corresponding to mapping[k].
Graph embedded_grid(const Graph& host, const GridEmbedding& emb);

}  // namespace qahyst
