#pragma once

#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qahyst/graph.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("qahyst_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Random simple graph with exactly n nodes and m edges, written as an edge
/// list with named nodes ("q<i>"), mimicking a vendor export.
inline std::string random_edge_list(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::ostringstream out;
  // A spanning path first so every node appears.
  for (std::size_t i = 0; i + 1 < n && edges.size() < m; ++i) edges.emplace(i, i + 1);
  while (edges.size() < m) {
    auto a = pick(rng), b = pick(rng);
    if (a == b) continue;
    edges.emplace(std::min(a, b), std::max(a, b));
  }
  out << "# synthetic hardware-style graph\n";
  for (auto [a, b] : edges) out << 'q' << a << " q" << b << '\n';
  return out.str();
}

}  // namespace testing
