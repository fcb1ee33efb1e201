#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/enumeration.hpp"
#include "tbrw/walker.hpp"

using namespace tbrw;

namespace {

std::string depth_series_of(const TrajectoryRecord& rec) {
  std::string key;
  for (const auto& s : rec.series) key += std::to_string(s.depth);
  return key;
}

std::string key_of(const std::vector<int>& series) {
  std::string key;
  for (int d : series) key += std::to_string(d);
  return key;
}

}  // namespace

TEST_CASE("growth happens before the move") {
  // At n = 0 the tree must already contain the fresh leaves when the edge is
  // chosen: from a looped single vertex with xi = 5 the tree has 6 vertices
  // after one step, every time.
  const EnvironmentSpec env{ConstantEnv{5}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GrowingTree tree = GrowingTree::single_vertex_with_loop();
    WalkerState state;
    state.s = 1;
    const RandomStream stream = RandomStream::for_replica(seed, 0);
    const RandomStream env_stream = stream.derive(kEnvLane);
    Rng walk = stream.derive(kWalkLane).sequence();
    step(state, tree, env, env_stream, walk);
    CHECK(tree.vertex_count() == 6);
    CHECK(state.time == 1);
  }
}

TEST_CASE("leaf with fresh growth moves down half the time") {
  const EnvironmentSpec env{ConstantEnv{1}};
  std::size_t down = 0;
  const std::size_t n = 100'000;
  for (std::size_t i = 0; i < n; ++i) {
    GrowingTree tree = GrowingTree::path(1, false);
    WalkerState state;
    state.position = 1;  // degree-1 leaf
    state.s = 1;
    const RandomStream stream = RandomStream::for_replica(7, i);
    const RandomStream env_stream = stream.derive(kEnvLane);
    Rng walk = stream.derive(kWalkLane).sequence();
    const MoveOutcome out = step(state, tree, env, env_stream, walk);
    REQUIRE(tree.degree(1) >= 2);
    if (out.kind == MoveOutcome::Kind::ToFreshLeaf)
      ++down;
    else
      REQUIRE(out.kind == MoveOutcome::Kind::ToParent);
  }
  const double p = static_cast<double>(down) / n;
  CHECK(std::abs(p - 0.5) < 4.0 * std::sqrt(0.25 / n));
}

TEST_CASE("no growth off the epoch") {
  const EnvironmentSpec env{ConstantEnv{3}};
  GrowingTree tree = GrowingTree::star_with_loop(2);
  WalkerState state;
  state.s = 2;
  const RandomStream stream = RandomStream::for_replica(11, 0);
  const RandomStream env_stream = stream.derive(kEnvLane);
  Rng walk = stream.derive(kWalkLane).sequence();
  step(state, tree, env, env_stream, walk);   // n=0: grows
  const std::uint64_t count_after_grow = tree.vertex_count();
  CHECK(count_after_grow == 6);
  step(state, tree, env, env_stream, walk);   // n=1: odd, no growth
  CHECK(tree.vertex_count() == count_after_grow);
}

TEST_CASE("joint law at horizon 2 matches exhaustive enumeration") {
  // (T_2, X_2) for s=1, Ber(1/2): canonical state fingerprints.
  const auto law = oracle::state_law(oracle::FlatTree::single_vertex_with_loop(),
                                     0, oracle::bernoulli_env(0.5), 1, 2);
  const std::size_t n = 400'000;
  std::map<std::string, double> mc;
  const EnvironmentSpec env{BernoulliEnv{0.5}};
  for (std::size_t i = 0; i < n; ++i) {
    GrowingTree tree = GrowingTree::single_vertex_with_loop();
    WalkerState state;
    state.s = 1;
    const RandomStream stream = RandomStream::for_replica(1001, i);
    const RandomStream env_stream = stream.derive(kEnvLane);
    Rng walk = stream.derive(kWalkLane).sequence();
    step(state, tree, env, env_stream, walk);
    step(state, tree, env, env_stream, walk);
    // Same canonical fingerprint as the oracle: sorted depth multiset plus
    // the walker depth. Pristine leaves enter with their known depth.
    std::vector<int> depths;
    for (VertexId v = 0; v < tree.materialized_count(); ++v) {
      depths.push_back(static_cast<int>(tree.depth(v)));
      for (std::uint64_t p = 0; p < tree.pristine_count(v); ++p)
        depths.push_back(static_cast<int>(tree.depth(v)) + 1);
    }
    std::sort(depths.begin(), depths.end());
    std::string key = "d=";
    for (int d : depths) key += std::to_string(d) + ",";
    key += "|x=" + std::to_string(tree.depth(state.position));
    mc[key] += 1.0 / n;
  }
  for (const auto& [key, p] : mc) REQUIRE(law.count(key) == 1);
  for (const auto& [key, p] : law) {
    const double q = mc.count(key) ? mc.at(key) : 0.0;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(p - q) <= 4.5 * se + 1e-9);
  }
}

TEST_CASE("depth series law matches enumeration for several configs") {
  struct Config {
    std::uint32_t s;
    oracle::BranchFn oracle_env;
    EnvironmentSpec env;
  };
  const std::vector<Config> configs = {
      {1, oracle::bernoulli_env(0.5), EnvironmentSpec{BernoulliEnv{0.5}}},
      {2, oracle::constant_env(1), EnvironmentSpec{ConstantEnv{1}}},
      {3, oracle::bernoulli_env(0.5), EnvironmentSpec{BernoulliEnv{0.5}}},
  };
  const std::uint32_t horizon = 3;
  const std::size_t n = 150'000;
  for (const auto& cfg : configs) {
    const auto law =
        oracle::depth_series_law(oracle::FlatTree::single_vertex_with_loop(),
                                 0, cfg.oracle_env, cfg.s, horizon);
    std::map<std::string, double> mc;
    RunOptions opt;
    opt.horizon = horizon;
    for (std::size_t i = 0; i < n; ++i) {
      const auto rec = run(GrowingTree::single_vertex_with_loop(), kRoot,
                           cfg.env, cfg.s, opt,
                           RandomStream::for_replica(2024, i));
      mc[depth_series_of(rec)] += 1.0 / n;
    }
    for (const auto& [series, p] : law) {
      const double q = mc.count(key_of(series)) ? mc.at(key_of(series)) : 0.0;
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      CHECK(std::abs(p - q) <= 4.5 * se + 1e-9);
    }
  }
}

TEST_CASE("horizon zero leaves the record empty") {
  RunOptions opt;
  opt.horizon = 0;
  const auto rec = run(GrowingTree::single_vertex_with_loop(), kRoot,
                       EnvironmentSpec{ConstantEnv{1}}, 1, opt,
                       RandomStream::for_replica(3, 0));
  CHECK(rec.series.empty());
  CHECK(rec.crossing_times.empty());
  CHECK(rec.hits.empty());
}

TEST_CASE("series times are strictly increasing and depth <= height") {
  RunOptions opt;
  opt.horizon = 5000;
  opt.stride = 7;
  const auto rec = run(GrowingTree::single_vertex_with_loop(), kRoot,
                       EnvironmentSpec{BernoulliEnv{0.5}}, 2, opt,
                       RandomStream::for_replica(5, 0));
  for (std::size_t i = 0; i < rec.series.size(); ++i) {
    if (i > 0) REQUIRE(rec.series[i].n > rec.series[i - 1].n);
    REQUIRE(rec.series[i].depth <= rec.series[i].height);
  }
}

TEST_CASE("parity changes exactly at self-loop crossings") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RunOptions opt;
    opt.horizon = 20'000;
    opt.stride = 20'000;
    const auto rec = run(GrowingTree::star_with_loop(2), kRoot,
                         EnvironmentSpec{BernoulliEnv{0.5}}, 2, opt,
                         RandomStream::for_replica(seed, 0));
    CHECK(rec.parity_mismatches == 0);
  }
}

TEST_CASE("return times never report zero") {
  // eta of the start vertex is a return time, at least 1.
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto hit =
        first_hitting_time(GrowingTree::star_with_loop(2), kRoot, kRoot,
                           EnvironmentSpec{ConstantEnv{1}}, 2, 10'000,
                           RandomStream::for_replica(13, i));
    REQUIRE(!hit.censored);
    REQUIRE(hit.value >= 1);
  }
}

TEST_CASE("one-step hitting probability is 1/degree") {
  // Walker adjacent to the target on a static tree (xi = 0): a path
  // root(loop)-1-2 with the walker at 1; P(eta_root = 1) = 1/2.
  std::size_t immediate = 0;
  const std::size_t n = 100'000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto hit =
        first_hitting_time(GrowingTree::path(2, true), 1, kRoot,
                           EnvironmentSpec{ConstantEnv{0}}, 2, 1,
                           RandomStream::for_replica(17, i));
    if (!hit.censored && hit.value == 1) ++immediate;
  }
  const double p = static_cast<double>(immediate) / n;
  CHECK(std::abs(p - 0.5) < 4.0 * std::sqrt(0.25 / n));
}

TEST_CASE("hitting times respect the budget") {
  const auto hit =
      first_hitting_time(GrowingTree::path(30, true), 30, kRoot,
                         EnvironmentSpec{ConstantEnv{1}}, 1, 10,
                         RandomStream::for_replica(19, 0));
  CHECK(hit.censored);
  CHECK(hit.value == 10);
}

TEST_CASE("exit time requires even s and a leaf") {
  CHECK_THROWS_AS(exit_time(1, EnvironmentSpec{ConstantEnv{0}}, 3, 10,
                            RandomStream::for_replica(1, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(exit_time(0, EnvironmentSpec{ConstantEnv{0}}, 2, 10,
                            RandomStream::for_replica(1, 0)),
                  std::invalid_argument);
}

TEST_CASE("exit-time pmf matches enumeration for a static star") {
  // ell = 1, s = 2, xi = 0: exits happen via loop-then-leaf, so
  // P(tau = 2k) = (3/4)^{k-1} * 1/4. The enumeration oracle confirms the
  // closed form and the simulator must match both.
  const auto pmf = oracle::exit_time_pmf(1, oracle::constant_env(0), 2, 6);
  CHECK(pmf.at("t=2") == doctest::Approx(0.25));
  CHECK(pmf.at("t=4") == doctest::Approx(0.1875));
  CHECK(pmf.at("t=6") == doctest::Approx(9.0 / 64));

  const std::size_t n = 200'000;
  std::map<std::string, double> mc;
  for (std::size_t i = 0; i < n; ++i) {
    const auto tau = exit_time(1, EnvironmentSpec{ConstantEnv{0}}, 2, 6,
                               RandomStream::for_replica(23, i));
    mc[tau.censored ? "survive" : "t=" + std::to_string(tau.value)] += 1.0 / n;
  }
  for (const auto& [key, p] : pmf) {
    const double q = mc.count(key) ? mc.at(key) : 0.0;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(p - q) <= 4.5 * se + 1e-9);
  }
}

TEST_CASE("exit-time pmf matches enumeration with growth") {
  const auto pmf = oracle::exit_time_pmf(1, oracle::constant_env(1), 2, 6);
  const std::size_t n = 200'000;
  std::map<std::string, double> mc;
  for (std::size_t i = 0; i < n; ++i) {
    const auto tau = exit_time(1, EnvironmentSpec{ConstantEnv{1}}, 2, 6,
                               RandomStream::for_replica(29, i));
    mc[tau.censored ? "survive" : "t=" + std::to_string(tau.value)] += 1.0 / n;
  }
  double total = 0.0;
  for (const auto& [key, p] : pmf) total += p;
  CHECK(total == doctest::Approx(1.0));
  for (const auto& [key, p] : pmf) {
    const double q = mc.count(key) ? mc.at(key) : 0.0;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(p - q) <= 4.5 * se + 1e-9);
  }
}

TEST_CASE("records are deterministic and stride-invariant") {
  const EnvironmentSpec env{BernoulliEnv{0.5}};
  RunOptions coarse;
  coarse.horizon = 4000;
  coarse.stride = 400;
  coarse.targets = {kRoot};
  RunOptions fine = coarse;
  fine.stride = 1;
  const auto a = run(GrowingTree::path(3, true), 3, env, 2, coarse,
                     RandomStream::for_replica(31, 5));
  const auto b = run(GrowingTree::path(3, true), 3, env, 2, coarse,
                     RandomStream::for_replica(31, 5));
  const auto c = run(GrowingTree::path(3, true), 3, env, 2, fine,
                     RandomStream::for_replica(31, 5));
  CHECK(nlohmann::json(a).dump() == nlohmann::json(b).dump());
  CHECK(a.hits == c.hits);  // sampling stride never changes hitting times
  CHECK(a.crossing_times == c.crossing_times);
  CHECK(a.final_depth == c.final_depth);
}

TEST_CASE("targets record first hits only") {
  RunOptions opt;
  opt.horizon = 2000;
  opt.targets = {0, 1};
  const auto rec = run(GrowingTree::path(2, true), 2,
                       EnvironmentSpec{ConstantEnv{1}}, 2, opt,
                       RandomStream::for_replica(37, 0));
  REQUIRE(rec.hits.count(1) == 1);
  CHECK(rec.hits.at(1) >= 1);
  if (rec.hits.count(0)) CHECK(rec.hits.at(0) > rec.hits.at(1));
}
