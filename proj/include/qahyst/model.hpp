#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qahyst/graph.hpp"

namespace qahyst {

/// Programmable Ising coefficients on a graph, in the device's normalized
/// range: |J_ij| <= 1 and |h_i| <= 1.
///
/// Energy convention matches the annealer Hamiltonian,
///   E(sigma) = sum_i h_i sigma_i + sum_<ij> J_ij sigma_i sigma_j,
/// so J = -1 is ferromagnetic and a positive h favors sigma = -1.
class IsingModel {
 public:
  IsingModel(std::shared_ptr<const Graph> graph, std::vector<double> couplings, std::vector<double> fields);

  const Graph& graph() const noexcept { return *graph_; }
  std::shared_ptr<const Graph> graph_ptr() const noexcept { return graph_; }
  std::span<const double> couplings() const noexcept { return couplings_; }
  std::span<const double> fields() const noexcept { return fields_; }
  std::size_t spin_count() const noexcept { return graph_->node_count(); }
  std::size_t coupling_count() const noexcept { return graph_->edge_count(); }

  /// Classical energy of a +-1 configuration.
  double energy(std::span<const std::int8_t> spins) const;

  /// Stable content hash (FNV-1a over the coefficient text) for manifests.
  std::string fingerprint() const;

 private:
  std::shared_ptr<const Graph> graph_;
  std::vector<double> couplings_;
  std::vector<double> fields_;
};

IsingModel ferromagnet(std::shared_ptr<const Graph> graph);

/// Exactly floor(N_e/2) couplings of one sign and ceil(N_e/2) of the other,
/// shuffled by a seeded permutation. For odd N_e a seeded coin picks which sign
/// gets the extra edge.
IsingModel random_bond(std::shared_ptr<const Graph> graph, std::uint64_t seed);

/// Copy of `model` with every h_i = value. Throws ValidationError if |value| > 1.
IsingModel set_uniform_fields(const IsingModel& model, double value);

/// Copy of `model` with all fields negated.
IsingModel negate_fields(const IsingModel& model);

/// Text form: `nodes N`, then `h i value` and `J i j value` lines (edge order
/// preserved). Doubles are written with round-trip precision.
void write_model(std::ostream& out, const IsingModel& model, const std::string& graph_ref = {});

/// Reads the text form. If `graph` is null the graph is rebuilt from the J lines.
IsingModel read_model(std::istream& in, std::shared_ptr<const Graph> graph = nullptr);

}  // namespace qahyst
