#pragma once

#include <cstdint>
#include <vector>

#include "tbrw/env.hpp"
#include "tbrw/tree.hpp"
#include "tbrw/walker.hpp"
#include "json.hpp"

namespace tbrw {

/// A path of length `length()` whose vertices carry loop counters, the state
/// of the generalized loop process. Vertex 0 is the target end; a well-formed
/// backbone has at least one loop at the far end. Loops count once toward
/// degrees.
struct Backbone {
  std::vector<std::uint64_t> loops;  // indexed 0..length()
  std::uint32_t position = 0;
  std::uint64_t time = 0;

  std::uint32_t length() const {
    return static_cast<std::uint32_t>(loops.size() - 1);
  }
  std::uint64_t degree(std::uint32_t i) const {
    const std::uint64_t path_edges = (i == 0 || i == length()) ? 1 : 2;
    const std::uint64_t deg = loops[i] + path_edges;
    return deg < loops[i] ? ~std::uint64_t{0} : deg;
  }
  /// The backbone shape requires a loop at the far end. Extraction from a
  /// bare path reports the violation through this flag rather than inventing
  /// a loop.
  bool well_formed() const { return loops.back() >= 1; }
};

/// Extract the backbone between an ancestor z and x0: path vertices keep one
/// loop per off-path neighbor at distance one (pristine leaves included; the
/// root self-loop stays a loop). z maps to index 0, x0 to index length(), and
/// the process starts at x0's end. Throws std::invalid_argument unless z is
/// an ancestor of x0 at distance >= 2.
Backbone build_backbone(const GrowingTree& tree, VertexId z, VertexId x0);

/// One transition of the loop process: at times t = 0 mod s add loops at the
/// current position, then choose uniformly among the position's edges in the
/// grown backbone; a loop keeps the position. Returns true if the move used a
/// loop.
bool loop_step(Backbone& b, const EnvironmentSpec& env, std::uint32_t s,
               const RandomStream& env_stream, Rng& walk_rng);

/// First time t >= 0 at position 0 (so starting at 0 returns 0), censored at
/// the budget.
CensoredValue run_loop_process(Backbone b, const EnvironmentSpec& env,
                               std::uint32_t s, std::uint64_t budget,
                               const RandomStream& replica_stream);

/// Empirical check of first-order stochastic dominance between the tree
/// walker's hitting time of z and the loop process' hitting time of 0 on the
/// extracted backbone: CDF(eta_z)(t) <= CDF(eta_0)(t) should hold for all t.
/// A violation is flagged only when the gap exceeds the combined one-sided
/// Dvoretzky-Kiefer-Wolfowitz bands at 99% confidence.
struct DominanceCurvePoint {
  std::uint64_t t = 0;
  double cdf_eta_z = 0.0;
  double cdf_eta_loop = 0.0;
};

struct DominanceReport {
  std::size_t replicas = 0;
  std::uint64_t budget = 0;
  double max_violation = 0.0;  // max_t CDF(eta_z)(t) - CDF(eta_0)(t)
  double dkw_band = 0.0;
  bool violated = false;
  double eta_z_hit_fraction = 0.0;
  double eta_loop_hit_fraction = 0.0;
  /// Both empirical CDFs on a log-spaced time grid (the violation scan
  /// itself runs over every jump point, not just the grid).
  std::vector<DominanceCurvePoint> curve;
};

DominanceReport dominance_check(const GrowingTree& tree0, VertexId z,
                                VertexId x0, const EnvironmentSpec& env,
                                std::uint32_t s, std::uint64_t budget,
                                std::size_t replicas,
                                const RandomStream& root_stream);

/// The generation half of dominance_check, one replica at a time: replica i
/// must use root_stream.derive(2i) for the tree walker and
/// root_stream.derive(2i+1) for the loop process. Lets callers distribute
/// replicas over workers without changing the aggregate.
std::pair<CensoredValue, CensoredValue> dominance_replica(
    const GrowingTree& tree0, VertexId z, VertexId x0, const Backbone& backbone,
    const EnvironmentSpec& env, std::uint32_t s, std::uint64_t budget,
    std::size_t replica, const RandomStream& root_stream);

/// The aggregation half: order-insensitive in content but expects the
/// replica-indexed vectors.
DominanceReport dominance_aggregate(std::uint64_t budget,
                                    const std::vector<CensoredValue>& eta_z,
                                    const std::vector<CensoredValue>& eta_loop);

void to_json(nlohmann::json& j, const Backbone& b);
void to_json(nlohmann::json& j, const DominanceReport& r);

}  // namespace tbrw
