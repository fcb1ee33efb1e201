#include "tbrw/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace tbrw {

namespace {

constexpr std::uint64_t kMaxRlBudget = 1'000'000'000'000'000ull;  // 1e15 steps

}  // namespace

SpeedEstimate estimate_speed(const std::vector<TrajectoryRecord>& records) {
  SpeedEstimate est;
  if (records.empty()) return est;
  const auto& first = records.front();
  for (const auto& r : records)
    if (r.s != first.s || r.horizon != first.horizon ||
        r.stride != first.stride)
      throw std::invalid_argument("estimate_speed: mixed configurations");

  for (const auto& r : records) {
    const double v = r.final_time == 0
                         ? 0.0
                         : static_cast<double>(r.final_depth) /
                               static_cast<double>(r.final_time);
    est.per_replica.push_back(v);
  }
  est.mean = mean_of(est.per_replica);
  est.ci99 = mean_ci(est.per_replica);

  const std::size_t samples = first.series.size();
  for (std::size_t i = 0; i < samples; ++i) {
    std::vector<double> ratios;
    ratios.reserve(records.size());
    for (const auto& r : records) {
      const auto& s = r.series[i];
      ratios.push_back(static_cast<double>(s.depth) /
                       static_cast<double>(s.n));
    }
    est.median_series.emplace_back(first.series[i].n,
                                   median_of(std::move(ratios)));
  }
  return est;
}

TrapReport detect_trap(const TrajectoryRecord& record, std::uint64_t window,
                       std::uint32_t s) {
  if (s == 0) throw std::invalid_argument("detect_trap: s must be >= 1");
  if (window < 2 * s)
    throw std::invalid_argument("detect_trap: window must be >= 2s");
  if (record.horizon < 2 * window)
    throw std::invalid_argument("detect_trap: horizon must be >= 2*window");
  if (record.tail_positions.size() < window)
    throw std::invalid_argument("detect_trap: record lacks tail positions");

  TrapReport rep;
  rep.window = window;
  // tail_positions[i] is the position at time first_time + i.
  const std::uint64_t first_time =
      record.horizon - record.tail_positions.size() + 1;
  const std::size_t begin = record.tail_positions.size() - window;
  for (std::uint32_t k = 0; k < s; ++k) {
    bool constant = true;
    std::optional<VertexId> center;
    for (std::size_t i = begin; i < record.tail_positions.size(); ++i) {
      if ((first_time + i) % s != k) continue;
      const VertexId v = record.tail_positions[i];
      if (!center)
        center = v;
      else if (*center != v) {
        constant = false;
        break;
      }
    }
    if (constant && center) {
      rep.trapped = true;
      rep.center = center;
      rep.offset = k;
      return rep;
    }
  }
  return rep;
}

ZProcessRecord extract_z_process(const TrajectoryRecord& record) {
  if (record.even_steps.empty())
    throw std::invalid_argument("extract_z_process: record lacks even-step log");
  ZProcessRecord z;
  z.start = record.even_steps.front().position;
  z.crossing_times = record.crossing_times;

  VertexId current = z.start;
  std::size_t cross_idx = 0;
  for (std::size_t m = 1; m < record.even_steps.size(); ++m) {
    const EvenStep& stepm = record.even_steps[m];
    if (stepm.position == current) continue;
    current = stepm.position;
    z.z.push_back(stepm.position);
    z.phi.push_back(m);
    z.depths.push_back(stepm.depth);
    while (cross_idx < record.crossing_times.size() &&
           record.crossing_times[cross_idx] <= 2 * m)
      ++cross_idx;
    z.segment.push_back(static_cast<std::uint32_t>(cross_idx));
  }
  return z;
}

bool ZProcessRecord::segment_parity_consistent() const {
  for (std::size_t i = 1; i < z.size(); ++i)
    if (segment[i] == segment[i - 1] &&
        (depths[i] % 2) != (depths[i - 1] % 2))
      return false;
  return true;
}

QuasiStarStats quasi_star_stats(const TrajectoryRecord& record) {
  if (record.horizon > 0 && record.growth_epochs.empty())
    throw std::invalid_argument("quasi_star_stats: record lacks growth log");
  QuasiStarStats stats;
  stats.growth_epochs = record.growth_epochs.size();
  for (const auto& e : record.growth_epochs)
    if (e.leaf_count >= 1 && e.degree == e.leaf_count + 1)
      ++stats.quasi_star_epochs;
  return stats;
}

CensoredValue exit_scaling_replica(std::uint32_t k, const EnvironmentSpec& env,
                                   std::uint64_t ell, std::uint64_t budget,
                                   std::size_t row, std::size_t replica,
                                   const RandomStream& root_stream) {
  return exit_time(static_cast<std::uint32_t>(ell), env, 2 * k, budget,
                   root_stream.derive(row).derive(replica));
}

ExitScalingReport exit_scaling_aggregate(
    std::uint32_t k, const EnvironmentSpec& env,
    const std::vector<std::uint64_t>& ells, std::uint64_t budget,
    const std::vector<std::vector<CensoredValue>>& values) {
  if (k == 0) throw std::invalid_argument("exit_scaling: k must be >= 1");
  if (values.size() != ells.size())
    throw std::invalid_argument("exit_scaling: one value row per ell");

  ExitScalingReport rep;
  rep.k = k;
  rep.budget = budget;
  rep.env_mean = env.mean();
  rep.regime = rep.env_mean && static_cast<double>(k) > *rep.env_mean
                   ? "linear"
                   : "infinite-mean";

  std::vector<double> fit_x, fit_y;
  for (std::size_t row = 0; row < ells.size(); ++row) {
    std::vector<double> uncensored;
    for (const CensoredValue& v : values[row])
      if (!v.censored) uncensored.push_back(static_cast<double>(v.value));
    ExitScalingRow r;
    r.ell = ells[row];
    r.replicas = values[row].size();
    r.censored = r.replicas - uncensored.size();
    r.censor_rate = r.replicas == 0 ? 0.0
                                    : static_cast<double>(r.censored) /
                                          static_cast<double>(r.replicas);
    r.mean_uncensored = mean_of(uncensored);
    r.median_uncensored = median_of(uncensored);
    r.tail = fit_tail(values[row]);
    if (!uncensored.empty()) {
      fit_x.push_back(static_cast<double>(r.ell));
      fit_y.push_back(r.mean_uncensored);
    }
    rep.rows.push_back(std::move(r));
  }
  if (fit_x.size() >= 2) rep.fit = least_squares(fit_x, fit_y);
  return rep;
}

ExitScalingReport exit_scaling(std::uint32_t k, const EnvironmentSpec& env,
                               const std::vector<std::uint64_t>& ells,
                               std::size_t replicas, std::uint64_t budget,
                               const RandomStream& root_stream) {
  std::vector<std::vector<CensoredValue>> values(ells.size());
  for (std::size_t row = 0; row < ells.size(); ++row) {
    values[row].resize(replicas);
    for (std::size_t i = 0; i < replicas; ++i)
      values[row][i] = exit_scaling_replica(k, env, ells[row], budget, row, i,
                                            root_stream);
  }
  return exit_scaling_aggregate(k, env, ells, budget, values);
}

HeightDegreeReport height_and_degrees(
    const std::vector<TrajectoryRecord>& records,
    const std::vector<std::uint64_t>& checkpoints) {
  HeightDegreeReport rep;
  for (std::uint64_t t : checkpoints) {
    std::vector<double> heights;
    heights.reserve(records.size());
    for (const auto& r : records) {
      const auto it = std::find_if(
          r.series.begin(), r.series.end(),
          [&](const TrajectorySample& s) { return s.n == t; });
      if (it == r.series.end())
        throw std::invalid_argument(
            "height_and_degrees: checkpoint is not a sample time");
      heights.push_back(static_cast<double>(it->height));
    }
    rep.height_medians.emplace_back(t, median_of(std::move(heights)));
  }
  std::unordered_map<std::uint64_t, std::uint64_t> hist;
  for (const auto& r : records)
    for (const auto& [deg, count] : r.degree_histogram) hist[deg] += count;
  rep.degree_histogram.assign(hist.begin(), hist.end());
  std::sort(rep.degree_histogram.begin(), rep.degree_histogram.end());
  return rep;
}

RlReport estimate_rl(std::uint32_t r, double alpha, const EnvironmentSpec& env,
                     std::uint32_t s, std::size_t replicas,
                     const RandomStream& root_stream) {
  if (r == 0) throw std::invalid_argument("estimate_rl: r must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("estimate_rl: alpha must be in (0,1)");
  const double raw_budget = std::exp(std::pow(static_cast<double>(r), alpha));
  if (raw_budget > static_cast<double>(kMaxRlBudget)) {
    const std::uint32_t max_r = static_cast<std::uint32_t>(std::floor(
        std::pow(std::log(static_cast<double>(kMaxRlBudget)), 1.0 / alpha)));
    throw std::invalid_argument(
        "estimate_rl: exp(r^alpha) exceeds the step budget; largest feasible "
        "r is " +
        std::to_string(max_r));
  }
  RlReport rep;
  rep.r = r;
  rep.alpha = alpha;
  rep.budget = static_cast<std::uint64_t>(raw_budget);
  rep.replicas = replicas;

  const RandomStream reach_root = root_stream.derive(0);
  const RandomStream climb_root = root_stream.derive(1);

  std::uint64_t reached = 0;
  rep.reach_outcomes.resize(replicas, false);
  for (std::size_t i = 0; i < replicas; ++i) {
    const RandomStream rs = reach_root.derive(i);
    const RandomStream env_stream = rs.derive(kEnvLane);
    Rng walk_rng = rs.derive(kWalkLane).sequence();
    GrowingTree tree = GrowingTree::star_with_loop(1);
    WalkerState state;
    state.position = 1;  // the fresh leaf
    state.s = s;
    for (std::uint64_t n = 0; n < rep.budget; ++n) {
      step(state, tree, env, env_stream, walk_rng);
      if (tree.depth(state.position) >= 2ull * r) {
        ++reached;
        rep.reach_outcomes[i] = true;
        break;
      }
    }
  }
  rep.p_reach = replicas == 0 ? 0.0
                              : static_cast<double>(reached) /
                                    static_cast<double>(replicas);
  rep.reach_ci = wilson_interval(reached, replicas);

  std::uint64_t climbed = 0;
  rep.climb_outcomes.resize(replicas, false);
  for (std::size_t i = 0; i < replicas; ++i) {
    GrowingTree tree = GrowingTree::path(r, true);
    const CensoredValue hit = first_hitting_time(
        std::move(tree), r, kRoot, env, s, rep.budget, climb_root.derive(i));
    if (!hit.censored) {
      ++climbed;
      rep.climb_outcomes[i] = true;
    }
  }
  rep.p_climb = replicas == 0 ? 0.0
                              : static_cast<double>(climbed) /
                                    static_cast<double>(replicas);
  rep.climb_ci = wilson_interval(climbed, replicas);
  return rep;
}

void to_json(nlohmann::json& j, const Interval& iv) {
  j = nlohmann::json{{"lo", iv.lo}, {"hi", iv.hi}};
}

void to_json(nlohmann::json& j, const SpeedEstimate& e) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& [n, v] : e.median_series)
    series.push_back({{"n", n}, {"median_depth_over_n", v}});
  j = nlohmann::json{{"mean", e.mean},
                     {"ci99", e.ci99},
                     {"per_replica", e.per_replica},
                     {"median_series", std::move(series)}};
}

void to_json(nlohmann::json& j, const TrapReport& t) {
  j = nlohmann::json{{"trapped", t.trapped},
                     {"offset", t.offset},
                     {"window", t.window}};
  j["center"] = t.center ? nlohmann::json(*t.center) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const QuasiStarStats& q) {
  j = nlohmann::json{{"growth_epochs", q.growth_epochs},
                     {"quasi_star_epochs", q.quasi_star_epochs}};
}

void to_json(nlohmann::json& j, const TailFit& f) {
  j = nlohmann::json{{"exponent", f.exponent},
                     {"stderr", f.stderr_},
                     {"threshold", f.threshold},
                     {"points", f.points}};
}

void to_json(nlohmann::json& j, const LinearFit& f) {
  j = nlohmann::json{{"slope", f.slope},
                     {"intercept", f.intercept},
                     {"r2", f.r2},
                     {"slope_stderr", f.slope_stderr},
                     {"n", f.n}};
}

void to_json(nlohmann::json& j, const ExitScalingRow& r) {
  j = nlohmann::json{{"ell", r.ell},
                     {"replicas", r.replicas},
                     {"censored", r.censored},
                     {"censor_rate", r.censor_rate},
                     {"mean_uncensored", r.mean_uncensored},
                     {"median_uncensored", r.median_uncensored}};
  if (r.tail) j["tail"] = *r.tail;
}

void to_json(nlohmann::json& j, const ExitScalingReport& r) {
  j = nlohmann::json{{"k", r.k},
                     {"budget", r.budget},
                     {"rows", r.rows},
                     {"regime", r.regime}};
  if (r.fit) j["fit"] = *r.fit;
  if (r.env_mean) j["env_mean"] = *r.env_mean;
}

void to_json(nlohmann::json& j, const HeightDegreeReport& r) {
  nlohmann::json medians = nlohmann::json::array();
  for (const auto& [n, m] : r.height_medians)
    medians.push_back({{"n", n}, {"median_height", m}});
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [deg, count] : r.degree_histogram)
    hist.push_back({{"degree", deg}, {"count", count}});
  j = nlohmann::json{{"height_medians", std::move(medians)},
                     {"degree_histogram", std::move(hist)}};
}

void to_json(nlohmann::json& j, const RlReport& r) {
  j = nlohmann::json{{"r", r.r},
                     {"alpha", r.alpha},
                     {"budget", r.budget},
                     {"replicas", r.replicas},
                     {"p_reach", r.p_reach},
                     {"reach_ci", r.reach_ci},
                     {"p_climb", r.p_climb},
                     {"climb_ci", r.climb_ci}};
}

}  // namespace tbrw
