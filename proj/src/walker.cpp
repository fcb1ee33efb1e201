#include "tbrw/walker.hpp"

#include <stdexcept>

namespace tbrw {

MoveOutcome step(WalkerState& state, GrowingTree& tree,
                 const EnvironmentSpec& env, const RandomStream& env_stream,
                 Rng& walk_rng) {
  if (state.time % state.s == 0) {
    const std::uint64_t xi = sample_xi(env, state.time, env_stream);
    tree.add_leaves(state.position, xi);
  }
  const MoveOutcome outcome =
      tree.uniform_neighbor(state.position, walk_rng, state.time + 1);
  state.time += 1;
  if (outcome.kind == MoveOutcome::Kind::SelfLoop)
    state.self_loop_crossings += 1;
  else
    state.position = outcome.target;
  return outcome;
}

TrajectoryRecord run(GrowingTree tree, VertexId x0, const EnvironmentSpec& env,
                     std::uint32_t s, const RunOptions& options,
                     const RandomStream& replica_stream) {
  if (s == 0) throw std::invalid_argument("run: s must be >= 1");
  if (options.stride == 0) throw std::invalid_argument("run: stride must be >= 1");
  if (x0 >= tree.materialized_count())
    throw std::invalid_argument("run: x0 not materialized");

  const RandomStream env_stream = replica_stream.derive(kEnvLane);
  Rng walk_rng = replica_stream.derive(kWalkLane).sequence();

  WalkerState state;
  state.position = x0;
  state.s = s;

  TrajectoryRecord rec;
  rec.seed_key = replica_stream.key();
  rec.s = s;
  rec.horizon = options.horizon;
  rec.stride = options.stride;

  const std::uint64_t tail_from =
      options.trap_window >= options.horizon
          ? 1
          : options.horizon - options.trap_window + 1;

  if (x0 == kRoot) rec.last_root_visit = 0;
  if (options.log_even_steps)
    rec.even_steps.push_back({x0, tree.depth(x0)});

  for (std::uint64_t n = 0; n < options.horizon; ++n) {
    if (options.log_growth_epochs && n % s == 0)
      rec.growth_epochs.push_back(
          {n, tree.degree(state.position), tree.leaf_count(state.position)});
    const int parity_before = state.parity(tree);
    const MoveOutcome outcome = step(state, tree, env, env_stream, walk_rng);
    const bool crossed = outcome.kind == MoveOutcome::Kind::SelfLoop;
    if ((state.parity(tree) != parity_before) != crossed)
      ++rec.parity_mismatches;
    const std::uint64_t now = state.time;  // n + 1
    if (outcome.kind == MoveOutcome::Kind::SelfLoop)
      rec.crossing_times.push_back(now);
    if (state.position == kRoot) rec.last_root_visit = now;
    for (VertexId z : options.targets)
      if (state.position == z && !rec.hits.count(z)) rec.hits[z] = now;
    if (options.log_even_steps && now % 2 == 0)
      rec.even_steps.push_back({state.position, tree.depth(state.position)});
    if (options.trap_window > 0 && now >= tail_from)
      rec.tail_positions.push_back(state.position);
    if (now % options.stride == 0)
      rec.series.push_back({now, tree.depth(state.position), tree.height(),
                            tree.degree(state.position),
                            state.self_loop_crossings});
  }

  rec.final_depth = tree.depth(state.position);
  rec.final_time = state.time;
  rec.final_tree = {tree.vertex_count(), tree.height(), tree.degree(kRoot),
                    tree.materialized_count()};
  rec.degree_histogram = tree.degree_histogram();
  if (options.keep_snapshot) rec.tree_snapshot = tree.snapshot();
  return rec;
}

CensoredValue first_hitting_time(GrowingTree tree, VertexId x0, VertexId z,
                                 const EnvironmentSpec& env, std::uint32_t s,
                                 std::uint64_t budget,
                                 const RandomStream& replica_stream) {
  if (z >= tree.materialized_count())
    throw std::invalid_argument("first_hitting_time: z not materialized");
  if (x0 >= tree.materialized_count())
    throw std::invalid_argument("first_hitting_time: x0 not materialized");

  const RandomStream env_stream = replica_stream.derive(kEnvLane);
  Rng walk_rng = replica_stream.derive(kWalkLane).sequence();

  WalkerState state;
  state.position = x0;
  state.s = s;
  for (std::uint64_t n = 0; n < budget; ++n) {
    step(state, tree, env, env_stream, walk_rng);
    if (state.position == z) return {state.time, false};
  }
  return {budget, true};
}

CensoredValue exit_time(std::uint32_t ell, const EnvironmentSpec& env,
                        std::uint32_t s, std::uint64_t budget,
                        const RandomStream& replica_stream) {
  if (s == 0 || s % 2 != 0)
    throw std::invalid_argument("exit_time: s must be even");
  if (ell < 1) throw std::invalid_argument("exit_time: ell must be >= 1");

  GrowingTree tree = GrowingTree::star_with_loop(ell);
  const RandomStream env_stream = replica_stream.derive(kEnvLane);
  Rng walk_rng = replica_stream.derive(kWalkLane).sequence();

  WalkerState state;
  state.position = kRoot;
  state.s = s;
  for (std::uint64_t n = 0; n < budget; ++n) {
    step(state, tree, env, env_stream, walk_rng);
    if (state.time % 2 == 0 && state.position != kRoot)
      return {state.time, false};
  }
  return {budget, true};
}

void to_json(nlohmann::json& j, const TrajectoryRecord& r) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& s : r.series)
    series.push_back({{"n", s.n},
                      {"depth", s.depth},
                      {"height", s.height},
                      {"degree", s.degree},
                      {"crossings", s.crossings}});
  nlohmann::json hits = nlohmann::json::object();
  for (const auto& [z, n] : r.hits) hits[std::to_string(z)] = n;
  j = nlohmann::json{
      {"seed_key", r.seed_key},
      {"s", r.s},
      {"horizon", r.horizon},
      {"stride", r.stride},
      {"series", std::move(series)},
      {"crossing_times", r.crossing_times},
      {"hits", std::move(hits)},
      {"parity_mismatches", r.parity_mismatches},
      {"final_depth", r.final_depth},
      {"final_time", r.final_time},
      {"final_tree",
       {{"vertex_count", r.final_tree.vertex_count},
        {"height", r.final_tree.height},
        {"root_degree", r.final_tree.root_degree},
        {"materialized", r.final_tree.materialized}}},
  };
  if (r.last_root_visit) j["last_root_visit"] = *r.last_root_visit;
  if (!r.tree_snapshot.is_null()) j["tree"] = r.tree_snapshot;
}

void to_json(nlohmann::json& j, const CensoredValue& v) {
  j = nlohmann::json{{"value", v.value}, {"censored", v.censored}};
}

std::string to_jsonl(const TrajectoryRecord& r) {
  std::string out;
  for (const auto& s : r.series) {
    const nlohmann::json line{{"n", s.n},
                              {"depth", s.depth},
                              {"height", s.height},
                              {"degree", s.degree},
                              {"crossings", s.crossings}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace tbrw
