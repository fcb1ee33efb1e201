#include "tbrw/loopproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tbrw {

namespace {

std::uint64_t sat_add_u64(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t sum = a + b;
  return sum < a ? ~std::uint64_t{0} : sum;
}

}  // namespace

Backbone build_backbone(const GrowingTree& tree, VertexId z, VertexId x0) {
  if (z >= tree.materialized_count() || x0 >= tree.materialized_count())
    throw std::invalid_argument("build_backbone: vertex not materialized");
  if (!tree.is_ancestor(z, x0))
    throw std::invalid_argument("build_backbone: z is not an ancestor of x0");
  const std::uint32_t ell = tree.depth(x0) - tree.depth(z);
  if (ell < 2)
    throw std::invalid_argument(
        "build_backbone: z must be at distance >= 2 from x0");

  std::vector<VertexId> path(ell + 1);
  VertexId v = x0;
  for (std::uint32_t i = ell; i > 0; --i) {
    path[i] = v;
    v = tree.parent(v);
  }
  path[0] = v;  // == z

  Backbone b;
  b.loops.resize(ell + 1);
  for (std::uint32_t i = 0; i <= ell; ++i) {
    const std::uint64_t path_edges = (i == 0 || i == ell) ? 1 : 2;
    // Every incident edge that is not a path edge collapses to a loop: the
    // parent of z, off-path children, pristine leaves, the root self-loop.
    b.loops[i] = tree.degree(path[i]) - path_edges;
  }
  b.position = ell;
  return b;
}

bool loop_step(Backbone& b, const EnvironmentSpec& env, std::uint32_t s,
               const RandomStream& env_stream, Rng& walk_rng) {
  if (b.time % s == 0) {
    const std::uint64_t xi = sample_xi(env, b.time, env_stream);
    b.loops[b.position] = sat_add_u64(b.loops[b.position], xi);
  }
  const std::uint64_t deg = b.degree(b.position);
  const std::uint64_t idx = walk_rng.below(deg);
  b.time += 1;
  if (idx < b.loops[b.position]) return true;
  // Path edges come after the loops: first toward 0, then away from it.
  if (b.position > 0 && idx == b.loops[b.position])
    b.position -= 1;
  else
    b.position += 1;
  return false;
}

CensoredValue run_loop_process(Backbone b, const EnvironmentSpec& env,
                               std::uint32_t s, std::uint64_t budget,
                               const RandomStream& replica_stream) {
  if (s == 0) throw std::invalid_argument("run_loop_process: s must be >= 1");
  if (b.loops.size() < 2)
    throw std::invalid_argument("run_loop_process: backbone too short");
  if (!b.well_formed())
    throw std::invalid_argument(
        "run_loop_process: backbone has no loop at the far end");
  if (b.position == 0) return {0, false};

  const RandomStream env_stream = replica_stream.derive(kEnvLane);
  Rng walk_rng = replica_stream.derive(kWalkLane).sequence();
  while (b.time < budget) {
    loop_step(b, env, s, env_stream, walk_rng);
    if (b.position == 0) return {b.time, false};
  }
  return {budget, true};
}

std::pair<CensoredValue, CensoredValue> dominance_replica(
    const GrowingTree& tree0, VertexId z, VertexId x0, const Backbone& backbone,
    const EnvironmentSpec& env, std::uint32_t s, std::uint64_t budget,
    std::size_t replica, const RandomStream& root_stream) {
  const RandomStream walker_stream = root_stream.derive(2 * replica);
  const RandomStream loop_stream = root_stream.derive(2 * replica + 1);
  return {first_hitting_time(tree0, x0, z, env, s, budget, walker_stream),
          run_loop_process(backbone, env, s, budget, loop_stream)};
}

DominanceReport dominance_aggregate(std::uint64_t budget,
                                    const std::vector<CensoredValue>& eta_z,
                                    const std::vector<CensoredValue>& eta_loop) {
  std::vector<std::uint64_t> hits_z, hits_loop;
  for (const auto& v : eta_z)
    if (!v.censored) hits_z.push_back(v.value);
  for (const auto& v : eta_loop)
    if (!v.censored) hits_loop.push_back(v.value);
  std::sort(hits_z.begin(), hits_z.end());
  std::sort(hits_loop.begin(), hits_loop.end());

  DominanceReport rep;
  rep.replicas = eta_z.size();
  rep.budget = budget;
  if (rep.replicas > 0) {
    rep.eta_z_hit_fraction = static_cast<double>(hits_z.size()) /
                             static_cast<double>(rep.replicas);
    rep.eta_loop_hit_fraction = static_cast<double>(hits_loop.size()) /
                                static_cast<double>(rep.replicas);
  }

  // The gap CDF(eta_z) - CDF(eta_loop) can only rise at eta_z jump points,
  // so scanning those suffices for the maximum.
  const auto n = static_cast<double>(rep.replicas);
  double max_gap = 0.0;
  for (std::size_t i = 0; i < hits_z.size(); ++i) {
    const std::uint64_t t = hits_z[i];
    const double cdf_z = static_cast<double>(i + 1) / n;
    const auto below =
        std::upper_bound(hits_loop.begin(), hits_loop.end(), t) -
        hits_loop.begin();
    const double cdf_loop = static_cast<double>(below) / n;
    max_gap = std::max(max_gap, cdf_z - cdf_loop);
  }
  rep.max_violation = max_gap;
  // One-sided DKW per empirical CDF at 0.5% each, 99% jointly by union bound.
  const double eps =
      rep.replicas > 0 ? std::sqrt(std::log(1.0 / 0.005) / (2.0 * n)) : 0.0;
  rep.dkw_band = 2.0 * eps;
  rep.violated = rep.replicas > 0 && max_gap > rep.dkw_band;

  if (rep.replicas > 0 && budget > 0) {
    const auto cdf_at = [&](const std::vector<std::uint64_t>& xs,
                            std::uint64_t t) {
      return static_cast<double>(
                 std::upper_bound(xs.begin(), xs.end(), t) - xs.begin()) /
             n;
    };
    std::uint64_t last = 0;
    for (double g = 1.0; g <= static_cast<double>(budget); g *= 1.3) {
      const auto t = static_cast<std::uint64_t>(g);
      if (t == last) continue;
      last = t;
      rep.curve.push_back({t, cdf_at(hits_z, t), cdf_at(hits_loop, t)});
    }
    if (last != budget)
      rep.curve.push_back(
          {budget, cdf_at(hits_z, budget), cdf_at(hits_loop, budget)});
  }
  return rep;
}

DominanceReport dominance_check(const GrowingTree& tree0, VertexId z,
                                VertexId x0, const EnvironmentSpec& env,
                                std::uint32_t s, std::uint64_t budget,
                                std::size_t replicas,
                                const RandomStream& root_stream) {
  const Backbone backbone = build_backbone(tree0, z, x0);
  std::vector<CensoredValue> eta_z(replicas), eta_loop(replicas);
  for (std::size_t i = 0; i < replicas; ++i) {
    const auto [hz, hl] = dominance_replica(tree0, z, x0, backbone, env, s,
                                            budget, i, root_stream);
    eta_z[i] = hz;
    eta_loop[i] = hl;
  }
  return dominance_aggregate(budget, eta_z, eta_loop);
}

void to_json(nlohmann::json& j, const Backbone& b) {
  j = nlohmann::json{{"length", b.length()},
                     {"loops", b.loops},
                     {"position", b.position},
                     {"time", b.time}};
}

void to_json(nlohmann::json& j, const DominanceReport& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : r.curve)
    curve.push_back({{"t", p.t},
                     {"cdf_eta_z", p.cdf_eta_z},
                     {"cdf_eta_loop", p.cdf_eta_loop}});
  j = nlohmann::json{{"replicas", r.replicas},
                     {"budget", r.budget},
                     {"max_violation", r.max_violation},
                     {"dkw_band", r.dkw_band},
                     {"violated", r.violated},
                     {"eta_z_hit_fraction", r.eta_z_hit_fraction},
                     {"eta_loop_hit_fraction", r.eta_loop_hit_fraction},
                     {"cdf_curve", std::move(curve)}};
}

}  // namespace tbrw
