#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tbrw/analysis.hpp"
#include "tbrw/harness.hpp"

using namespace tbrw;

namespace {

std::vector<TrajectoryRecord> run_replicas(const GrowingTree& tree0,
                                           VertexId x0,
                                           const EnvironmentSpec& env,
                                           std::uint32_t s,
                                           const RunOptions& opt,
                                           std::size_t replicas,
                                           std::uint64_t seed) {
  std::vector<TrajectoryRecord> recs;
  recs.reserve(replicas);
  for (std::size_t i = 0; i < replicas; ++i)
    recs.push_back(run(tree0, x0, env, s, opt,
                       RandomStream::for_replica(seed, i)));
  return recs;
}

}  // namespace

TEST_CASE("speed of a walk that never leaves the root is zero") {
  // xi = 0 from a looped single vertex: the only edge is the loop.
  RunOptions opt;
  opt.horizon = 100;
  opt.stride = 10;
  const auto recs = run_replicas(GrowingTree::single_vertex_with_loop(), kRoot,
                                 EnvironmentSpec{ConstantEnv{0}}, 1, opt, 20,
                                 7);
  const SpeedEstimate est = estimate_speed(recs);
  CHECK(est.mean == 0.0);
  CHECK(est.ci99.lo == 0.0);
  CHECK(est.ci99.hi == 0.0);
  for (const auto& [n, med] : est.median_series) CHECK(med == 0.0);
}

TEST_CASE("speed rejects mixed configurations") {
  RunOptions a, b;
  a.horizon = 100;
  b.horizon = 200;
  auto recs = run_replicas(GrowingTree::single_vertex_with_loop(), kRoot,
                           EnvironmentSpec{ConstantEnv{1}}, 1, a, 2, 3);
  recs.push_back(run(GrowingTree::single_vertex_with_loop(), kRoot,
                     EnvironmentSpec{ConstantEnv{1}}, 1, b,
                     RandomStream::for_replica(3, 99)));
  CHECK_THROWS_AS(estimate_speed(recs), std::invalid_argument);
}

TEST_CASE("ballistic regime excludes zero speed") {
  RunOptions opt;
  opt.horizon = 20'000;
  opt.stride = 20'000;
  const auto recs = run_replicas(GrowingTree::single_vertex_with_loop(), kRoot,
                                 EnvironmentSpec{ConstantEnv{1}}, 1, opt, 60,
                                 11);
  const SpeedEstimate est = estimate_speed(recs);
  CHECK(est.ci99.lo > 0.1);
  CHECK(est.mean < 1.0);
  for (double v : est.per_replica) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("deterministic bounce is detected as a trap") {
  // Two-vertex path, xi = 0, s = 2: the walker alternates forever.
  RunOptions opt;
  opt.horizon = 4000;
  opt.trap_window = 1000;
  const auto rec = run(GrowingTree::path(1, false), kRoot,
                       EnvironmentSpec{ConstantEnv{0}}, 2, opt,
                       RandomStream::for_replica(13, 0));
  const TrapReport rep = detect_trap(rec, 1000, 2);
  CHECK(rep.trapped);
  REQUIRE(rep.center.has_value());
  // Monotone: a smaller window over the same record still reports the trap.
  CHECK(detect_trap(rec, 100, 2).trapped);
}

TEST_CASE("a mobile walk on a static tree is not trapped") {
  // xi = 0 from depth 1 of a 4-vertex path: the even-time position keeps
  // switching between depths 1 and 3, so no residue class pins.
  RunOptions opt;
  opt.horizon = 4000;
  opt.trap_window = 400;
  const auto rec = run(GrowingTree::path(3, false), 1,
                       EnvironmentSpec{ConstantEnv{0}}, 2, opt,
                       RandomStream::for_replica(17, 0));
  CHECK_FALSE(detect_trap(rec, 400, 2).trapped);
}

TEST_CASE("window pinning separates heavy growth from light growth") {
  // The proxy fires nearly always under the heavy-tailed environment and
  // much more rarely under thin growth at the same scale.
  RunOptions opt;
  opt.horizon = 10'000;
  opt.trap_window = 1000;
  std::size_t heavy = 0, light = 0;
  const std::size_t n = 40;
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = run(GrowingTree::single_vertex_with_loop(), kRoot,
                       EnvironmentSpec{PowerLawTailEnv{0.5, 1.0}}, 2, opt,
                       RandomStream::for_replica(18, i));
    if (detect_trap(h, 1000, 2).trapped) ++heavy;
    const auto l = run(GrowingTree::single_vertex_with_loop(), kRoot,
                       EnvironmentSpec{BernoulliEnv{0.5}}, 2, opt,
                       RandomStream::for_replica(19, i));
    if (detect_trap(l, 1000, 2).trapped) ++light;
  }
  CHECK(heavy >= n * 9 / 10);
  CHECK(light < heavy);
}

TEST_CASE("trap detection preconditions") {
  RunOptions opt;
  opt.horizon = 100;
  opt.trap_window = 10;
  const auto rec = run(GrowingTree::path(1, false), kRoot,
                       EnvironmentSpec{ConstantEnv{0}}, 2, opt,
                       RandomStream::for_replica(19, 0));
  CHECK_THROWS_AS(detect_trap(rec, 60, 2), std::invalid_argument);  // > h/2
  CHECK_THROWS_AS(detect_trap(rec, 2, 2), std::invalid_argument);   // < 2s
}

TEST_CASE("z process from hand-built logs") {
  TrajectoryRecord rec;
  rec.horizon = 10;
  rec.even_steps = {{0, 0}, {0, 0}, {0, 0}};
  const ZProcessRecord idle = extract_z_process(rec);
  CHECK(idle.z.empty());

  rec.even_steps = {{0, 0}, {0, 0}, {3, 2}};
  const ZProcessRecord one = extract_z_process(rec);
  REQUIRE(one.z.size() == 1);
  CHECK(one.z[0] == 3);
  CHECK(one.phi[0] == 2);
  CHECK(one.depths[0] == 2);

  TrajectoryRecord empty;
  empty.horizon = 10;
  CHECK_THROWS_AS(extract_z_process(empty), std::invalid_argument);
}

TEST_CASE("z segments stay in one parity class") {
  RunOptions opt;
  opt.horizon = 10'000;
  opt.stride = 10'000;
  opt.log_even_steps = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rec = run(GrowingTree::star_with_loop(1), kRoot,
                         EnvironmentSpec{ConstantEnv{1}}, 2, opt,
                         RandomStream::for_replica(seed, 0));
    const ZProcessRecord z = extract_z_process(rec);
    CHECK(z.segment_parity_consistent());
    for (std::size_t i = 1; i < z.z.size(); ++i) {
      REQUIRE(z.z[i] != z.z[i - 1]);
      REQUIRE(z.phi[i] > z.phi[i - 1]);
    }
  }
}

TEST_CASE("quasi-star epochs are counted from the growth log") {
  RunOptions opt;
  opt.horizon = 2000;
  opt.log_growth_epochs = true;
  const auto rec = run(GrowingTree::star_with_loop(3), kRoot,
                       EnvironmentSpec{BernoulliEnv{0.5}}, 2, opt,
                       RandomStream::for_replica(23, 0));
  const QuasiStarStats stats = quasi_star_stats(rec);
  CHECK(stats.growth_epochs == 1000);
  // The initial star root is itself a quasi-star, so the count is positive.
  CHECK(stats.quasi_star_epochs >= 1);
  CHECK(stats.quasi_star_epochs <= stats.growth_epochs);

  RunOptions bare;
  bare.horizon = 2000;
  const auto no_log = run(GrowingTree::star_with_loop(3), kRoot,
                          EnvironmentSpec{BernoulliEnv{0.5}}, 2, bare,
                          RandomStream::for_replica(23, 1));
  CHECK_THROWS_AS(quasi_star_stats(no_log), std::invalid_argument);
}

TEST_CASE("exit scaling in the linear regime") {
  const auto report = exit_scaling(1, EnvironmentSpec{BernoulliEnv{0.5}},
                                   {5, 20, 60}, 400, 100'000,
                                   RandomStream::for_replica(29, 0));
  CHECK(report.regime == "linear");
  REQUIRE(report.fit.has_value());
  CHECK(report.fit->slope > 0.0);
  CHECK(report.fit->r2 > 0.9);
  for (const auto& row : report.rows) CHECK(row.censor_rate < 0.01);
}

TEST_CASE("exit scaling in the infinite-mean regime") {
  // xi = k = 1: survival decays like 1/t, so means are censoring artifacts
  // and the report flags the regime instead of trusting them.
  const auto constant = exit_scaling(1, EnvironmentSpec{ConstantEnv{1}}, {1},
                                     4000, 100'000,
                                     RandomStream::for_replica(31, 0));
  CHECK(constant.regime == "infinite-mean");
  REQUIRE(constant.rows[0].tail.has_value());
  CHECK(constant.rows[0].tail->exponent > -1.4);
  CHECK(constant.rows[0].tail->exponent < -0.6);

  // Geometric with mean 2 > k: slope -k/mu = -1/2.
  const auto geo = exit_scaling(1, EnvironmentSpec{GeometricEnv{2.0}}, {1},
                                4000, 100'000,
                                RandomStream::for_replica(31, 1));
  REQUIRE(geo.rows[0].tail.has_value());
  CHECK(geo.rows[0].tail->exponent > -0.75);
  CHECK(geo.rows[0].tail->exponent < -0.25);
}

TEST_CASE("height stays flat without growth and histograms favor leaves") {
  RunOptions opt;
  opt.horizon = 1000;
  opt.stride = 100;
  const auto frozen = run_replicas(GrowingTree::path(2, true), kRoot,
                                   EnvironmentSpec{ConstantEnv{0}}, 2, opt, 10,
                                   37);
  const auto rep = height_and_degrees(frozen, {100, 1000});
  for (const auto& [n, median] : rep.height_medians) CHECK(median == 2.0);

  const auto grown = run_replicas(GrowingTree::single_vertex_with_loop(),
                                  kRoot, EnvironmentSpec{ConstantEnv{1}}, 1,
                                  opt, 10, 41);
  const auto rep2 = height_and_degrees(grown, {100, 1000});
  CHECK(rep2.height_medians[1].second > rep2.height_medians[0].second);
  std::uint64_t total = 0, leaves = 0;
  for (const auto& [deg, count] : rep2.degree_histogram) {
    total += count;
    if (deg == 1) leaves += count;
  }
  CHECK(leaves * 2 > total);

  CHECK_THROWS_AS(height_and_degrees(grown, {150}), std::invalid_argument);
}

TEST_CASE("reach probe is exactly zero when the budget cannot span 2r") {
  // alpha = 0.1, r = 5: budget floor(exp(5^0.1)) = 3 < 2r - 1.
  const auto rep = estimate_rl(5, 0.1, EnvironmentSpec{ConstantEnv{1}}, 1,
                               500, RandomStream::for_replica(43, 0));
  CHECK(rep.budget == 3);
  CHECK(rep.p_reach == 0.0);
}

TEST_CASE("reach probe for the minimal scale") {
  // r = 1, alpha = 0.5: budget floor(e) = 2. From a depth-1 leaf with
  // xi = 1 the first move reaches depth 2 with probability exactly 1/2
  // (fresh leaf vs parent), and no two-step path recovers a miss.
  const auto rep = estimate_rl(1, 0.5, EnvironmentSpec{ConstantEnv{1}}, 1,
                               20'000, RandomStream::for_replica(47, 0));
  CHECK(rep.budget == 2);
  CHECK(std::abs(rep.p_reach - 0.5) < 4.0 * std::sqrt(0.25 / 20'000.0));
}

TEST_CASE("climb probe stays rare at large r") {
  const auto rep = estimate_rl(16, 0.5, EnvironmentSpec{BernoulliEnv{0.5}}, 3,
                               2000, RandomStream::for_replica(53, 0));
  CHECK(rep.budget == 54);
  CHECK(rep.p_climb < 0.4);
  CHECK(rep.climb_ci.hi < 0.5);
}

TEST_CASE("rl probe rejects infeasible budgets naming the largest r") {
  try {
    estimate_rl(400, 0.9, EnvironmentSpec{ConstantEnv{1}}, 1, 10,
                RandomStream::for_replica(59, 0));
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("largest feasible r") !=
          std::string::npos);
  }
}

TEST_CASE("estimators are pure functions of their inputs") {
  RunOptions opt;
  opt.horizon = 2000;
  opt.stride = 200;
  opt.trap_window = 200;
  const auto recs = run_replicas(GrowingTree::single_vertex_with_loop(), kRoot,
                                 EnvironmentSpec{BernoulliEnv{0.5}}, 2, opt,
                                 20, 61);
  const nlohmann::json a = estimate_speed(recs);
  const nlohmann::json b = estimate_speed(recs);
  CHECK(a.dump() == b.dump());
  const nlohmann::json t1 = detect_trap(recs[0], 200, 2);
  const nlohmann::json t2 = detect_trap(recs[0], 200, 2);
  CHECK(t1.dump() == t2.dump());
}
