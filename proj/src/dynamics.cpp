#include "qahyst/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "qahyst/errors.hpp"

namespace qahyst {

std::string to_string(EngineKind kind) { return kind == EngineKind::Metropolis ? "metropolis" : "piqmc"; }
std::string to_string(Readout readout) { return readout == Readout::RandomReplica ? "random-replica" : "majority"; }

EngineKind engine_kind_from_string(const std::string& text) {
  if (text == "metropolis") return EngineKind::Metropolis;
  if (text == "piqmc") return EngineKind::Piqmc;
  throw ValidationError("unknown engine '" + text + "' (expected metropolis or piqmc)");
}

Readout readout_from_string(const std::string& text) {
  if (text == "random-replica") return Readout::RandomReplica;
  if (text == "majority") return Readout::Majority;
  throw ValidationError("unknown readout '" + text + "' (expected random-replica or majority)");
}

void validate(const EngineConfig& e) {
  if (!(e.inv_temperature > 0) || !std::isfinite(e.inv_temperature))
    throw ValidationError("inverse temperature must be positive");
  if (!(e.sweeps_per_microsecond > 0) || !std::isfinite(e.sweeps_per_microsecond))
    throw ValidationError("sweeps_per_microsecond must be positive");
  if (e.kind == EngineKind::Piqmc && e.trotter_slices < 2)
    throw ValidationError(fmt::format("piqmc needs at least 2 Trotter slices, got {}", e.trotter_slices));
}

namespace {

// Imaginary-time coupling above this is treated as the classical (Gamma -> 0) limit.
constexpr double kMaxReplicaCoupling = 30.0;

struct Adjacency {
  std::vector<std::uint32_t> offset;
  std::vector<std::uint32_t> nbr;
  std::vector<double> j;

  explicit Adjacency(const IsingModel& model) {
    const auto& g = model.graph();
    offset.reserve(g.node_count() + 1);
    offset.push_back(0);
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
      auto nb = g.neighbors(i);
      auto ids = g.incident_edges(i);
      for (std::size_t k = 0; k < nb.size(); ++k) {
        nbr.push_back(nb[k]);
        j.push_back(model.couplings()[ids[k]]);
      }
      offset.push_back(static_cast<std::uint32_t>(nbr.size()));
    }
  }

  double coupling_field(const std::int8_t* spins, std::size_t i) const {
    double sum = 0.0;
    for (auto k = offset[i]; k < offset[i + 1]; ++k) sum += j[k] * spins[nbr[k]];
    return sum;
  }
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// 53-bit uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }
  std::int8_t spin() { return (engine_() >> 63) ? std::int8_t{1} : std::int8_t{-1}; }

 private:
  std::mt19937_64 engine_;
};

/// Instantaneous Hamiltonian coefficients at one micro-step.
struct StepParams {
  double coupling_scale;  // B(s)/2
  double field_scale;     // B(s)/2 * g(t)
  double gamma;           // A(s)/2
};

/// Memo of exp(-x) for the few distinct energy changes seen within one sweep.
/// Exact: a miss falls back to std::exp.
class BoltzmannCache {
 public:
  void clear() { size_ = 0; }

  double operator()(double x) {
    for (std::size_t k = 0; k < size_; ++k)
      if (keys_[k] == x) return values_[k];
    double v = std::exp(-x);
    if (size_ < kSlots) {
      keys_[size_] = x;
      values_[size_++] = v;
    }
    return v;
  }

 private:
  static constexpr std::size_t kSlots = 24;
  std::array<double, kSlots> keys_{};
  std::array<double, kSlots> values_{};
  std::size_t size_ = 0;
};

inline bool accept(double beta_delta, Rng& rng, BoltzmannCache& cache) {
  return beta_delta <= 0.0 || rng.uniform() < cache(beta_delta);
}

class MetropolisEngine {
 public:
  MetropolisEngine(const IsingModel& model, const EngineConfig& cfg, Rng& rng)
      : adj_(model), fields_(model.fields().begin(), model.fields().end()), beta_(cfg.inv_temperature), rng_(rng) {
    spins_.resize(model.spin_count());
    for (auto& s : spins_) s = rng_.spin();
  }

  void sweep(const StepParams& p) {
    const std::size_t n = spins_.size();
    cache_.clear();
    for (std::size_t i = 0; i < n; ++i) {
      double local = p.coupling_scale * adj_.coupling_field(spins_.data(), i) + p.field_scale * fields_[i];
      double delta = -2.0 * spins_[i] * local;
      if (accept(beta_ * delta, rng_, cache_)) spins_[i] = static_cast<std::int8_t>(-spins_[i]);
    }
  }

  SpinConfiguration readout() const { return {spins_}; }

 private:
  Adjacency adj_;
  std::vector<double> fields_;
  double beta_;
  Rng& rng_;
  std::vector<std::int8_t> spins_;
  BoltzmannCache cache_;
};

/// Suzuki-Trotter path-integral sampler: P coupled classical replicas with
/// action S = (beta/P) sum_k E(sigma^k) - K sum_k sum_i sigma_i^k sigma_i^{k+1},
/// K = -(1/2) ln tanh(beta Gamma / P), periodic in k. A sweep performs one
/// single-spin update per (replica, site) followed by one world-line flip per site.
class PiqmcEngine {
 public:
  PiqmcEngine(const IsingModel& model, const EngineConfig& cfg, Rng& rng)
      : adj_(model),
        fields_(model.fields().begin(), model.fields().end()),
        beta_(cfg.inv_temperature),
        replicas_(static_cast<std::size_t>(cfg.trotter_slices)),
        n_(model.spin_count()),
        readout_(cfg.readout),
        rng_(rng) {
    spins_.resize(replicas_ * n_);
    for (auto& s : spins_) s = rng_.spin();
    local_.resize(replicas_);
  }

  void sweep(const StepParams& p) {
    const double bs = beta_ / static_cast<double>(replicas_);
    const double x = beta_ * p.gamma / static_cast<double>(replicas_);
    const double k_perp = x > 0.0 ? std::min(kMaxReplicaCoupling, -0.5 * std::log(std::tanh(x))) : kMaxReplicaCoupling;

    cache_.clear();
    for (std::size_t k = 0; k < replicas_; ++k) {
      std::int8_t* cur = replica(k);
      const std::int8_t* prev = replica((k + replicas_ - 1) % replicas_);
      const std::int8_t* next = replica((k + 1) % replicas_);
      for (std::size_t i = 0; i < n_; ++i) {
        double local = p.coupling_scale * adj_.coupling_field(cur, i) + p.field_scale * fields_[i];
        double delta = bs * (-2.0 * cur[i] * local) + 2.0 * k_perp * cur[i] * (prev[i] + next[i]);
        if (accept(delta, rng_, cache_)) cur[i] = static_cast<std::int8_t>(-cur[i]);
      }
    }
    for (std::size_t i = 0; i < n_; ++i) {
      double delta = 0.0;
      for (std::size_t k = 0; k < replicas_; ++k) {
        const std::int8_t* cur = replica(k);
        local_[k] = p.coupling_scale * adj_.coupling_field(cur, i) + p.field_scale * fields_[i];
        delta += -2.0 * cur[i] * local_[k];
      }
      if (accept(bs * delta, rng_, cache_))
        for (std::size_t k = 0; k < replicas_; ++k) replica(k)[i] = static_cast<std::int8_t>(-replica(k)[i]);
    }
  }

  SpinConfiguration readout() {
    SpinConfiguration out;
    if (readout_ == Readout::RandomReplica) {
      const std::int8_t* r = replica(static_cast<std::size_t>(rng_.below(replicas_)));
      out.spins.assign(r, r + n_);
      return out;
    }
    out.spins.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      int sum = 0;
      for (std::size_t k = 0; k < replicas_; ++k) sum += replica(k)[i];
      out.spins[i] = sum > 0 ? 1 : (sum < 0 ? -1 : replica(0)[i]);
    }
    return out;
  }

 private:
  std::int8_t* replica(std::size_t k) { return spins_.data() + k * n_; }
  const std::int8_t* replica(std::size_t k) const { return spins_.data() + k * n_; }

  Adjacency adj_;
  std::vector<double> fields_;
  double beta_;
  std::size_t replicas_;
  std::size_t n_;
  Readout readout_;
  Rng& rng_;
  std::vector<std::int8_t> spins_;
  std::vector<double> local_;
  BoltzmannCache cache_;
};

template <class Engine>
SpinConfiguration evolve(Engine& engine, const DeviceProfile& profile, const Waveform& anneal, const Waveform& hgain,
                         double sweeps_per_us) {
  const double dt = profile.time_resolution_us;
  const double t0 = anneal.start_time();
  const double t1 = anneal.end_time();
  const auto steps = static_cast<std::int64_t>(std::llround((t1 - t0) / dt));
  double carry = 0.0;
  for (std::int64_t n = 0; n < steps; ++n) {
    const double t = std::min(t1, t0 + (static_cast<double>(n) + 0.5) * dt);
    const double s = std::clamp(anneal(t), 0.0, 1.0);
    const double half_b = 0.5 * profile.b(s);
    const StepParams p{half_b, half_b * hgain(t), 0.5 * profile.a(s)};
    carry += sweeps_per_us * dt;
    const auto sweeps = static_cast<std::int64_t>(std::floor(carry + 1e-9));
    carry -= static_cast<double>(sweeps);
    for (std::int64_t k = 0; k < sweeps; ++k) engine.sweep(p);
  }
  return engine.readout();
}

}  // namespace

SpinConfiguration simulate(const IsingModel& model, const DeviceProfile& profile, const Waveform& anneal,
                           const Waveform& hgain, const EngineConfig& engine, std::uint64_t seed) {
  validate(engine);
  if (anneal.size() == 0 || hgain.size() == 0) throw ValidationError("empty schedule waveform");
  if (hgain.start_time() > anneal.start_time() || hgain.end_time() < anneal.end_time())
    throw ValidationError("h-gain waveform must cover the anneal waveform's time span");
  Rng rng(seed);
  if (engine.kind == EngineKind::Metropolis) {
    MetropolisEngine e(model, engine, rng);
    return evolve(e, profile, anneal, hgain, engine.sweeps_per_microsecond);
  }
  PiqmcEngine e(model, engine, rng);
  return evolve(e, profile, anneal, hgain, engine.sweeps_per_microsecond);
}

SpinConfiguration simulate_slice(const IsingModel& model, const DeviceProfile& profile, const SliceSchedule& slice,
                                 const EngineConfig& engine, std::uint64_t seed) {
  return simulate(model, profile, slice.anneal, slice.hgain, engine, seed);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t slice_index, std::uint64_t sample_index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(base_seed), hi(base_seed), lo(slice_index), hi(slice_index), lo(sample_index),
                    hi(sample_index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

SampleSet sample_slice(const IsingModel& model, const DeviceProfile& profile, const SliceSchedule& slice,
                       const EngineConfig& engine, std::uint64_t base_seed, std::size_t n_samples, unsigned workers) {
  if (n_samples == 0) throw ValidationError("n_samples must be at least 1");
  validate(engine);
  SampleSet set;
  set.slice_index = slice.slice_index;
  set.target_field = slice.target_field;
  set.base_seed = base_seed;
  set.samples.resize(n_samples);
  set.seeds.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) set.seeds[k] = derive_seed(base_seed, slice.slice_index, k);
  parallel_for(n_samples, workers,
               [&](std::size_t k) { set.samples[k] = simulate_slice(model, profile, slice, engine, set.seeds[k]); });
  return set;
}

}  // namespace qahyst
