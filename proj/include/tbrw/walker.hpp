#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tbrw/env.hpp"
#include "tbrw/tree.hpp"
#include "json.hpp"

namespace tbrw {

/// Walker state. Growth happens at times n with n = 0 mod s, before the move,
/// so the move at such times is uniform over the edges of the grown tree;
/// n starts at 0 and growth happens already at n = 0. This order is fixed and
/// not configurable.
struct WalkerState {
  std::uint64_t time = 0;
  VertexId position = kRoot;
  std::uint32_t s = 1;
  std::uint64_t self_loop_crossings = 0;

  /// (time + depth) mod 2; changes exactly when the walker traverses the
  /// self-loop.
  int parity(const GrowingTree& tree) const {
    return static_cast<int>((time + tree.depth(position)) % 2);
  }
};

/// One transition: grow if due, then move uniformly. Returns the move.
MoveOutcome step(WalkerState& state, GrowingTree& tree,
                 const EnvironmentSpec& env, const RandomStream& env_stream,
                 Rng& walk_rng);

struct RunOptions {
  std::uint64_t horizon = 0;
  std::uint64_t stride = 1;
  /// Vertices whose first-hitting times (inf over n >= 1) get recorded.
  std::vector<VertexId> targets;
  /// Log (position, depth) at every even time, 0 included.
  bool log_even_steps = false;
  /// Log (n, degree, leaf_count) at the walker's vertex at each growth epoch,
  /// evaluated before the new leaves are attached.
  bool log_growth_epochs = false;
  /// Keep the positions of the final `trap_window` steps.
  std::uint64_t trap_window = 0;
  /// Export the final tree as a JSON snapshot on the record.
  bool keep_snapshot = false;
};

struct TrajectorySample {
  std::uint64_t n = 0;
  std::uint32_t depth = 0;
  std::uint32_t height = 0;
  std::uint64_t degree = 0;          // at the walker's position
  std::uint64_t crossings = 0;       // cumulative self-loop crossings
};

struct EvenStep {
  VertexId position;
  std::uint32_t depth;
};

struct GrowthEpoch {
  std::uint64_t n;
  std::uint64_t degree;
  std::uint64_t leaf_count;
};

struct TreeSummary {
  std::uint64_t vertex_count = 0;
  std::uint32_t height = 0;
  std::uint64_t root_degree = 0;
  std::uint32_t materialized = 0;
};

/// Sampled observables of one run. Series times are strictly increasing and
/// start at `stride` (a horizon of 0 leaves the series empty).
struct TrajectoryRecord {
  std::uint64_t seed_key = 0;
  std::uint32_t s = 1;
  std::uint64_t horizon = 0;
  std::uint64_t stride = 1;

  std::vector<TrajectorySample> series;
  /// Arrival times of self-loop traversals (the time index at which the
  /// walker sits after crossing).
  std::vector<std::uint64_t> crossing_times;
  /// First-hitting times for registered targets; absent if never hit.
  std::map<VertexId, std::uint64_t> hits;
  std::vector<EvenStep> even_steps;
  std::vector<GrowthEpoch> growth_epochs;
  /// Positions at times horizon - trap_window + 1 .. horizon.
  std::vector<VertexId> tail_positions;
  std::optional<std::uint64_t> last_root_visit;

  /// Steps at which (time + depth) mod 2 changed without a self-loop
  /// crossing, or stayed put across one. Always tracked; 0 on every lawful
  /// run.
  std::uint64_t parity_mismatches = 0;

  std::uint32_t final_depth = 0;
  std::uint64_t final_time = 0;
  TreeSummary final_tree;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> degree_histogram;
  nlohmann::json tree_snapshot;  // only with RunOptions::keep_snapshot
};

/// Run the process for options.horizon steps. Deterministic given the
/// replica stream.
TrajectoryRecord run(GrowingTree tree, VertexId x0, const EnvironmentSpec& env,
                     std::uint32_t s, const RunOptions& options,
                     const RandomStream& replica_stream);

/// A hitting or exit time, possibly censored at the budget.
struct CensoredValue {
  std::uint64_t value = 0;
  bool censored = false;
};

/// First time n >= 1 with X_n = z (a return time when z = x0). Throws
/// std::invalid_argument if z is not materialized in the initial tree.
CensoredValue first_hitting_time(GrowingTree tree, VertexId x0, VertexId z,
                                 const EnvironmentSpec& env, std::uint32_t s,
                                 std::uint64_t budget,
                                 const RandomStream& replica_stream);

/// First even time the walker is away from its start. Starts from a root
/// with `ell` leaves and a self-loop; requires even s and ell >= 1.
CensoredValue exit_time(std::uint32_t ell, const EnvironmentSpec& env,
                        std::uint32_t s, std::uint64_t budget,
                        const RandomStream& replica_stream);

void to_json(nlohmann::json& j, const TrajectoryRecord& r);
void to_json(nlohmann::json& j, const CensoredValue& v);

/// The sampled series as JSONL, one sample per line (the summary lives in
/// the record's JSON form).
std::string to_jsonl(const TrajectoryRecord& r);

}  // namespace tbrw
