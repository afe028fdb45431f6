#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "qahyst/dynamics.hpp"
#include "qahyst/errors.hpp"

using namespace qahyst;

namespace {

const DeviceProfile& profile() {
  static const DeviceProfile p = synthetic_profile();
  return p;
}

/// Constant s and g for `duration` microseconds.
SliceSchedule hold(double s, double g, double duration) {
  SliceSchedule sl;
  sl.anneal = constant_waveform(s, duration);
  sl.hgain = constant_waveform(g, duration);
  sl.total_time_us = duration;
  return sl;
}

std::shared_ptr<const Graph> chain(std::size_t n) {
  std::vector<Edge> e;
  for (NodeIndex i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return std::make_shared<const Graph>(Graph(n, e));
}

std::uint32_t state_of(const SpinConfiguration& c) {
  std::uint32_t s = 0;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.spins[i] > 0) s |= 1u << i;
  return s;
}

struct Stats {
  double mean = 0, se = 0;
};

template <class F>
Stats stats(const SampleSet& set, F f) {
  double sum = 0, sum2 = 0;
  for (const auto& c : set.samples) {
    double v = f(c);
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(set.samples.size());
  double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n)};
}

double mz(const SpinConfiguration& c) {
  double s = 0;
  for (auto v : c.spins) s += v;
  return -s / static_cast<double>(c.size());
}

}  // namespace

TEST_CASE("engine configuration") {
  EngineConfig e;
  CHECK_NOTHROW(validate(e));
  e.inv_temperature = 0;
  CHECK_THROWS_AS(validate(e), ValidationError);
  e = {};
  e.sweeps_per_microsecond = -1;
  CHECK_THROWS_AS(validate(e), ValidationError);
  e = {};
  e.kind = EngineKind::Piqmc;
  e.trotter_slices = 1;
  CHECK_THROWS_AS(validate(e), ValidationError);
  e.trotter_slices = 2;
  CHECK_NOTHROW(validate(e));
  CHECK(engine_kind_from_string("piqmc") == EngineKind::Piqmc);
  CHECK(readout_from_string("majority") == Readout::Majority);
  CHECK_THROWS_AS(engine_kind_from_string("annealer"), ValidationError);
}

TEST_CASE("sign convention on a single ferromagnetic edge") {
  auto m = set_uniform_fields(ferromagnet(chain(2)), 1.0);
  EngineConfig cold;
  cold.inv_temperature = 50.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto c = simulate_slice(m, profile(), hold(1.0, 1.0, 1.0), cold, seed);
    CHECK(c.spins == std::vector<std::int8_t>{-1, -1});
  }
}

TEST_CASE("metropolis matches Boltzmann enumeration on a 2x2 ferromagnet") {
  auto m = set_uniform_fields(ferromagnet(std::make_shared<const Graph>(square_lattice(2, 2))), 1.0);
  const double beta = 0.1, g = 0.2, scale = profile().b(1.0) / 2;
  EngineConfig e;
  e.inv_temperature = beta;
  auto set = sample_slice(m, profile(), hold(1.0, g, 1.0), e, 5, 20000);
  auto p = oracle::boltzmann(m, beta, scale, g);
  double m_exact = 0, e_exact = 0;
  for (std::uint32_t s = 0; s < 16; ++s) {
    double sum = 0;
    for (int i = 0; i < 4; ++i) sum += (s >> i) & 1 ? 1 : -1;
    m_exact += p[s] * (-sum / 4);
    e_exact += p[s] * oracle::classical_energy(m, s, scale, g);
  }
  auto ms = stats(set, mz);
  auto es = stats(set, [&](const SpinConfiguration& c) { return oracle::classical_energy(m, state_of(c), scale, g); });
  CHECK(std::abs(ms.mean - m_exact) < 3 * ms.se);
  CHECK(std::abs(es.mean - e_exact) < 3 * es.se);
}

TEST_CASE("metropolis detailed balance: chi-square on a 3-spin model") {
  auto g = std::make_shared<const Graph>(Graph(3, {{0, 1}, {1, 2}, {0, 2}}));
  IsingModel m(g, {-1.0, 0.5, 0.8}, {0.3, -0.6, 0.1});
  const double beta = 0.15, gain = 1.0, scale = profile().b(1.0) / 2;
  EngineConfig e;
  e.inv_temperature = beta;
  const std::size_t n = 100000;
  auto set = sample_slice(m, profile(), hold(1.0, gain, 0.5), e, 17, n);
  std::vector<double> counts(8, 0.0);
  for (const auto& c : set.samples) counts[state_of(c)] += 1;
  auto p = oracle::boltzmann(m, beta, scale, gain);
  double chi2 = 0;
  for (int s = 0; s < 8; ++s) {
    double expect = p[s] * n;
    chi2 += (counts[s] - expect) * (counts[s] - expect) / expect;
  }
  // 99th percentile of chi-square with 7 degrees of freedom.
  CHECK(chi2 < 18.475);
}

TEST_CASE("piqmc matches dense diagonalization on a 4-spin transverse-field chain") {
  auto m = set_uniform_fields(ferromagnet(chain(4)), 1.0);
  const double s = 0.5, g = 0.5, beta = 2.0;
  EngineConfig e;
  e.kind = EngineKind::Piqmc;
  e.trotter_slices = 64;
  e.inv_temperature = beta;
  auto set = sample_slice(m, profile(), hold(s, g, 1.5), e, 23, 8000);
  auto exact = oracle::transverse_field_sz(m, beta, profile().b(s) / 2, g, profile().gamma(s));
  for (std::size_t i = 0; i < 4; ++i) {
    auto st = stats(set, [&](const SpinConfiguration& c) { return static_cast<double>(c.spins[i]); });
    CHECK(std::abs(st.mean - exact[i]) < 0.05);
  }
}

TEST_CASE("piqmc without transverse field reduces to the classical sampler") {
  auto g = std::make_shared<const Graph>(square_lattice(2, 3));
  auto m = set_uniform_fields(random_bond(g, 4), 0.5);
  const double beta = 0.15, gain = 0.6, scale = profile().b(1.0) / 2;
  REQUIRE(profile().a(1.0) == 0.0);
  EngineConfig classical;
  classical.inv_temperature = beta;
  EngineConfig quantum = classical;
  quantum.kind = EngineKind::Piqmc;
  quantum.trotter_slices = 4;
  auto a = sample_slice(m, profile(), hold(1.0, gain, 1.0), classical, 3, 6000);
  auto b = sample_slice(m, profile(), hold(1.0, gain, 1.0), quantum, 3, 6000);
  auto energy = [&](const SpinConfiguration& c) { return oracle::classical_energy(m, state_of(c), scale, gain); };
  auto ea = stats(a, energy), eb = stats(b, energy);
  auto ma = stats(a, mz), mb = stats(b, mz);
  CHECK(std::abs(ea.mean - eb.mean) < 3 * std::hypot(ea.se, eb.se));
  CHECK(std::abs(ma.mean - mb.mean) < 3 * std::hypot(ma.se, mb.se));
}

TEST_CASE("field reversal mirrors the magnetization") {
  auto g = std::make_shared<const Graph>(square_lattice(3, 3));
  auto m = set_uniform_fields(random_bond(g, 8), 0.7);
  auto flipped = negate_fields(m);
  std::vector<std::int8_t> spins(9), neg(9);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    for (std::size_t i = 0; i < 9; ++i) {
      spins[i] = rng() & 1 ? 1 : -1;
      neg[i] = static_cast<std::int8_t>(-spins[i]);
    }
    CHECK(m.energy(spins) == flipped.energy(neg));
  }
  for (auto kind : {EngineKind::Metropolis, EngineKind::Piqmc}) {
    EngineConfig e;
    e.kind = kind;
    e.inv_temperature = 0.3;
    e.trotter_slices = 8;
    auto a = stats(sample_slice(m, profile(), hold(0.8, 0.5, 0.5), e, 1, 3000), mz);
    auto b = stats(sample_slice(flipped, profile(), hold(0.8, 0.5, 0.5), e, 2, 3000), mz);
    CHECK(std::abs(a.mean + b.mean) < 3 * std::hypot(a.se, b.se));
    CHECK(std::abs(a.mean) > 0.05);
  }
}

TEST_CASE("sample sets are deterministic and worker independent") {
  auto m = set_uniform_fields(random_bond(std::make_shared<const Graph>(square_lattice(4, 4)), 1), 1.0);
  auto tl = build_timeline(profile(), 0.5, 2.0);
  auto sl = slice_at(tl, 130);
  for (auto kind : {EngineKind::Metropolis, EngineKind::Piqmc}) {
    EngineConfig e;
    e.kind = kind;
    e.trotter_slices = 4;
    auto a = sample_slice(m, profile(), sl, e, 99, 24, 1);
    auto b = sample_slice(m, profile(), sl, e, 99, 24, 1);
    auto c = sample_slice(m, profile(), sl, e, 99, 24, 3);
    auto d = sample_slice(m, profile(), sl, e, 100, 24, 1);
    CHECK(a.samples == b.samples);
    CHECK(a.samples == c.samples);
    CHECK(a.seeds == c.seeds);
    CHECK(a.samples != d.samples);
    CHECK(a.slice_index == 130);
    CHECK(a.target_field == sl.target_field);
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
      CHECK(simulate_slice(m, profile(), sl, e, a.seeds[k]) == a.samples[k]);
      for (auto v : a.samples[k].spins) CHECK((v == 1 || v == -1));
    }
  }
}

TEST_CASE("sample counts and errors") {
  auto m = ferromagnet(std::make_shared<const Graph>(square_lattice(2, 2)));
  EngineConfig e;
  auto sl = hold(0.9, 0.0, 0.05);
  CHECK(sample_slice(m, profile(), sl, e, 1, 2000).samples.size() == 2000);
  CHECK_THROWS_AS(sample_slice(m, profile(), sl, e, 1, 0), ValidationError);
  e.kind = EngineKind::Piqmc;
  e.trotter_slices = 1;
  CHECK_THROWS_AS(sample_slice(m, profile(), sl, e, 1, 4), ValidationError);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1ull << 32, 0, 0));
}

TEST_CASE("majority readout") {
  auto m = set_uniform_fields(ferromagnet(chain(3)), 1.0);
  EngineConfig e;
  e.kind = EngineKind::Piqmc;
  e.readout = Readout::Majority;
  e.trotter_slices = 5;
  e.inv_temperature = 20.0;
  auto c = simulate_slice(m, profile(), hold(1.0, 1.0, 1.0), e, 4);
  CHECK(c.spins == std::vector<std::int8_t>{-1, -1, -1});
}
