#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qahyst/device.hpp"
#include "qahyst/model.hpp"
#include "qahyst/schedule.hpp"

namespace qahyst {

/// Measured z-basis readout, one +-1 entry per spin.
struct SpinConfiguration {
  std::vector<std::int8_t> spins;

  std::size_t size() const noexcept { return spins.size(); }
  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;
};

enum class EngineKind { Metropolis, Piqmc };
enum class Readout { RandomReplica, Majority };

std::string to_string(EngineKind kind);
std::string to_string(Readout readout);
EngineKind engine_kind_from_string(const std::string& text);
Readout readout_from_string(const std::string& text);

struct EngineConfig {
  EngineKind kind = EngineKind::Metropolis;
  /// Inverse temperature in 1/GHz, the units of A(s) and B(s).
  double inv_temperature = 2.0;
  /// Imaginary-time replicas (piqmc only).
  int trotter_slices = 20;
  /// Monte Carlo sweeps per microsecond of schedule time.
  double sweeps_per_microsecond = 100.0;
  Readout readout = Readout::RandomReplica;
};

/// Throws ValidationError for beta <= 0, sweep rate <= 0, or piqmc with P < 2.
void validate(const EngineConfig& engine);

/// Evolves a fresh random state through arbitrary anneal/h-gain waveforms and
/// returns the final z-basis configuration.
///
/// Time advances in micro-steps of the device time resolution; at each step the
/// waveforms are read at the step midpoint and the engine performs
/// sweeps_per_microsecond * step sweeps (fractional remainders carry over) on
///   E(sigma) = (B(s)/2) [ g(t) sum_i h_i sigma_i + sum_<ij> J_ij sigma_i sigma_j ]
/// with transverse scale Gamma = A(s)/2 used by piqmc only.
SpinConfiguration simulate(const IsingModel& model, const DeviceProfile& profile, const Waveform& anneal,
                           const Waveform& hgain, const EngineConfig& engine, std::uint64_t seed);

SpinConfiguration simulate_slice(const IsingModel& model, const DeviceProfile& profile, const SliceSchedule& slice,
                                 const EngineConfig& engine, std::uint64_t seed);

/// Per-sample seed from (base_seed, slice_index, sample_index), independent of
/// execution order.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t slice_index, std::uint64_t sample_index);

struct SampleSet {
  std::vector<SpinConfiguration> samples;
  std::size_t slice_index = 0;
  double target_field = 0.0;
  std::uint64_t base_seed = 0;
  /// Seed used for each sample, aligned with samples.
  std::vector<std::uint64_t> seeds;
};

/// n_samples independent simulate_slice runs spread over `workers` threads
/// (0 = hardware concurrency). Output is identical for any worker count.
SampleSet sample_slice(const IsingModel& model, const DeviceProfile& profile, const SliceSchedule& slice,
                       const EngineConfig& engine, std::uint64_t base_seed, std::size_t n_samples = 2000,
                       unsigned workers = 1);

/// Runs fn(i) for i in [0, count) on up to `workers` threads; 0 = hardware
/// concurrency. Rethrows the first exception after all workers join.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn);

}  // namespace qahyst

#include "qahyst/detail/parallel.hpp"
