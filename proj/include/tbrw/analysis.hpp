#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tbrw/env.hpp"
#include "tbrw/stats.hpp"
#include "tbrw/walker.hpp"
#include "json.hpp"

namespace tbrw {

/// Terminal depth/n over replicas, with a 99% normal-approximation interval
/// and the per-time median of depth/n for liminf inspection.
struct SpeedEstimate {
  double mean = 0.0;
  Interval ci99;
  std::vector<double> per_replica;
  std::vector<std::pair<std::uint64_t, double>> median_series;
};

/// Records must share s, horizon and stride; throws std::invalid_argument
/// otherwise.
SpeedEstimate estimate_speed(const std::vector<TrajectoryRecord>& records);

struct TrapReport {
  bool trapped = false;
  std::optional<VertexId> center;
  std::uint32_t offset = 0;  // residue class mod s of the pinned times
  std::uint64_t window = 0;
};

/// Finite-horizon trapping proxy: trapped iff some vertex x and residue
/// k < s have X_{sn+k} = x at every logged time of that residue in the final
/// window. One-sided: it can false-negative, never false-positive on the
/// window. Requires a record with at least `window` tail positions and
/// horizon >= 2 * window.
TrapReport detect_trap(const TrajectoryRecord& record, std::uint64_t window,
                       std::uint32_t s);

/// The embedded jump chain of the even-step process: phi_k are the even-step
/// indices where Y_n = X_{2n} moves, z[k] = Y_{phi_k}. Self-loop crossings
/// partition the entries into segments on which the chain is homogeneous;
/// within a segment every visited vertex has the same depth parity.
struct ZProcessRecord {
  VertexId start = kRoot;
  std::vector<VertexId> z;
  std::vector<std::uint64_t> phi;
  std::vector<std::uint32_t> depths;
  std::vector<std::uint32_t> segment;   // crossings completed by time 2*phi_k
  std::vector<std::uint64_t> crossing_times;

  bool segment_parity_consistent() const;
};

/// Requires a record with the even-step log; throws otherwise.
ZProcessRecord extract_z_process(const TrajectoryRecord& record);

struct QuasiStarStats {
  std::uint64_t growth_epochs = 0;
  std::uint64_t quasi_star_epochs = 0;
};

/// Counts growth epochs at which the walker's vertex was a quasi-star
/// (evaluated before that epoch's leaves are attached). Requires the growth
/// epoch log.
QuasiStarStats quasi_star_stats(const TrajectoryRecord& record);

struct ExitScalingRow {
  std::uint64_t ell = 0;
  std::size_t replicas = 0;
  std::size_t censored = 0;
  double censor_rate = 0.0;
  double mean_uncensored = 0.0;
  double median_uncensored = 0.0;
  std::optional<TailFit> tail;
};

struct ExitScalingReport {
  std::uint32_t k = 0;
  std::uint64_t budget = 0;
  std::vector<ExitScalingRow> rows;
  std::optional<LinearFit> fit;  // mean exit time vs ell, when >= 2 rows fit
  std::optional<double> env_mean;
  std::string regime;  // "linear" when k > mean, "infinite-mean" otherwise
};

/// Exit times from a root with ell leaves and a self-loop, across an ell
/// grid, for s = 2k. Means are over uncensored replicas; heavy censoring is
/// reported rather than averaged away.
ExitScalingReport exit_scaling(std::uint32_t k, const EnvironmentSpec& env,
                               const std::vector<std::uint64_t>& ells,
                               std::size_t replicas, std::uint64_t budget,
                               const RandomStream& root_stream);

/// Generation half of exit_scaling: the value for row `row` of the ell grid,
/// replica `i`, which must come from root_stream.derive(row).derive(i).
CensoredValue exit_scaling_replica(std::uint32_t k, const EnvironmentSpec& env,
                                   std::uint64_t ell, std::uint64_t budget,
                                   std::size_t row, std::size_t replica,
                                   const RandomStream& root_stream);

/// Aggregation half of exit_scaling over replica-indexed rows of values.
ExitScalingReport exit_scaling_aggregate(
    std::uint32_t k, const EnvironmentSpec& env,
    const std::vector<std::uint64_t>& ells, std::uint64_t budget,
    const std::vector<std::vector<CensoredValue>>& values);

struct HeightDegreeReport {
  std::vector<std::pair<std::uint64_t, double>> height_medians;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> degree_histogram;
};

/// Median tree height at each checkpoint time plus the pooled degree
/// histogram of the final trees (pristine leaves included). Checkpoints must
/// be sample times of every record.
HeightDegreeReport height_and_degrees(
    const std::vector<TrajectoryRecord>& records,
    const std::vector<std::uint64_t>& checkpoints);

struct RlReport {
  std::uint32_t r = 0;
  double alpha = 0.0;
  std::uint64_t budget = 0;  // floor(exp(r^alpha))
  std::size_t replicas = 0;
  double p_reach = 0.0;      // depth >= 2r within budget, from a fresh leaf
  Interval reach_ci;
  double p_climb = 0.0;      // hit the depth-r ancestor within budget
  Interval climb_ci;
  std::vector<bool> reach_outcomes;  // per replica
  std::vector<bool> climb_outcomes;
};

/// Empirical escape/backtrack probabilities behind the ballisticity
/// criterion. The reach probe starts from a depth-1 leaf over a looped root
/// (the worst start: nothing below it exists yet); the climb probe starts at
/// the bottom of a depth-r path and targets the root. Throws
/// std::invalid_argument when exp(r^alpha) exceeds the feasible step budget,
/// naming the largest feasible r.
RlReport estimate_rl(std::uint32_t r, double alpha, const EnvironmentSpec& env,
                     std::uint32_t s, std::size_t replicas,
                     const RandomStream& root_stream);

void to_json(nlohmann::json& j, const SpeedEstimate& e);
void to_json(nlohmann::json& j, const TrapReport& t);
void to_json(nlohmann::json& j, const QuasiStarStats& q);
void to_json(nlohmann::json& j, const TailFit& f);
void to_json(nlohmann::json& j, const LinearFit& f);
void to_json(nlohmann::json& j, const ExitScalingRow& r);
void to_json(nlohmann::json& j, const ExitScalingReport& r);
void to_json(nlohmann::json& j, const HeightDegreeReport& r);
void to_json(nlohmann::json& j, const RlReport& r);
void to_json(nlohmann::json& j, const Interval& iv);

}  // namespace tbrw
