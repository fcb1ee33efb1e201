#include "tbrw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "tbrw/stats.hpp"
#include "tbrw/version.hpp"

namespace tbrw {

namespace fs = std::filesystem;

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Speed: return "speed";
    case ExperimentKind::Recurrence: return "recurrence";
    case ExperimentKind::Trap: return "trap";
    case ExperimentKind::ExitScaling: return "exit_scaling";
    case ExperimentKind::HittingTail: return "hitting_tail";
    case ExperimentKind::LoopDominance: return "loop_dominance";
    case ExperimentKind::Height: return "height";
    case ExperimentKind::RlProbe: return "rl_probe";
  }
  return "simulate";
}

ExperimentKind kind_from_name(const std::string& name) {
  if (name == "simulate") return ExperimentKind::Simulate;
  if (name == "speed") return ExperimentKind::Speed;
  if (name == "recurrence") return ExperimentKind::Recurrence;
  if (name == "trap") return ExperimentKind::Trap;
  if (name == "exit_scaling") return ExperimentKind::ExitScaling;
  if (name == "hitting_tail") return ExperimentKind::HittingTail;
  if (name == "loop_dominance") return ExperimentKind::LoopDominance;
  if (name == "height") return ExperimentKind::Height;
  if (name == "rl_probe") return ExperimentKind::RlProbe;
  throw ConfigError("unknown experiment kind: " + name);
}

GrowingTree build_tree(const TreeConfig& cfg) {
  if (cfg.shape == "single_vertex_with_loop")
    return GrowingTree::single_vertex_with_loop();
  if (cfg.shape == "star_with_loop") return GrowingTree::star_with_loop(cfg.ell);
  if (cfg.shape == "path") return GrowingTree::path(cfg.length, cfg.loop_at_root);
  if (cfg.shape == "explicit")
    return GrowingTree::from_edges(cfg.edges, cfg.root_self_loop);
  throw ConfigError("unknown tree shape: " + cfg.shape);
}

void ExperimentConfig::validate() const {
  if (schema != 1) throw ConfigError("unsupported config schema");
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (s < 1) throw ConfigError("s must be >= 1");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  try {
    env.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("environment: ") + e.what());
  }

  const bool trajectory_kind =
      kind == ExperimentKind::Simulate || kind == ExperimentKind::Speed ||
      kind == ExperimentKind::Recurrence || kind == ExperimentKind::Trap ||
      kind == ExperimentKind::Height;
  if (trajectory_kind) {
    GrowingTree t = build_tree(tree);
    if (x0 >= t.materialized_count())
      throw ConfigError("x0 is not a vertex of the initial tree");
    for (VertexId z : targets)
      if (z >= t.materialized_count())
        throw ConfigError("hitting target is not materialized");
  }

  switch (kind) {
    case ExperimentKind::Simulate:
      break;
    case ExperimentKind::Speed:
      if (horizon < 1) throw ConfigError("speed: horizon must be >= 1");
      break;
    case ExperimentKind::Recurrence: {
      if (horizon < 1) throw ConfigError("recurrence: horizon must be >= 1");
      for (std::uint64_t c : checkpoints)
        if (c == 0 || c % stride != 0 || c > horizon)
          throw ConfigError(
              "recurrence: checkpoints must be sample times within the horizon");
      break;
    }
    case ExperimentKind::Trap: {
      const std::uint64_t w = window == 0 ? horizon / 10 : window;
      if (w < 2ull * s) throw ConfigError("trap: window must be >= 2s");
      if (horizon < 2 * w)
        throw ConfigError("trap: horizon must be >= 2*window");
      break;
    }
    case ExperimentKind::ExitScaling:
      if (k < 1) throw ConfigError("exit_scaling: k must be >= 1");
      if (s != 2 * k) throw ConfigError("exit_scaling: s must equal 2k");
      if (ells.empty()) throw ConfigError("exit_scaling: ells must be non-empty");
      for (std::uint64_t l : ells)
        if (l < 1) throw ConfigError("exit_scaling: every ell must be >= 1");
      if (budget < 1) throw ConfigError("exit_scaling: budget must be >= 1");
      break;
    case ExperimentKind::HittingTail:
      if (ells.empty()) throw ConfigError("hitting_tail: ells must be non-empty");
      for (std::uint64_t l : ells)
        if (l < 2) throw ConfigError("hitting_tail: every ell must be >= 2");
      break;
    case ExperimentKind::LoopDominance:
      if (ell < 2) throw ConfigError("loop_dominance: ell must be >= 2");
      if (budget < 1) throw ConfigError("loop_dominance: budget must be >= 1");
      break;
    case ExperimentKind::Height: {
      if (horizon < 1) throw ConfigError("height: horizon must be >= 1");
      if (checkpoints.empty())
        throw ConfigError("height: checkpoints must be non-empty");
      for (std::uint64_t c : checkpoints)
        if (c == 0 || c % stride != 0 || c > horizon)
          throw ConfigError(
              "height: checkpoints must be sample times within the horizon");
      break;
    }
    case ExperimentKind::RlProbe:
      if (r < 1) throw ConfigError("rl_probe: r must be >= 1");
      if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("rl_probe: alpha must be in (0,1)");
      break;
  }
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
  nlohmann::json tree = {{"shape", cfg.tree.shape}};
  if (cfg.tree.shape == "star_with_loop") tree["ell"] = cfg.tree.ell;
  if (cfg.tree.shape == "path") {
    tree["length"] = cfg.tree.length;
    tree["loop_at_root"] = cfg.tree.loop_at_root;
  }
  if (cfg.tree.shape == "explicit") {
    tree["edges"] = cfg.tree.edges;
    tree["root_self_loop"] = cfg.tree.root_self_loop;
  }
  j = nlohmann::json{{"schema", cfg.schema},
                     {"kind", kind_name(cfg.kind)},
                     {"seed", cfg.seed},
                     {"replicas", cfg.replicas},
                     {"s", cfg.s},
                     {"env", cfg.env},
                     {"tree", std::move(tree)},
                     {"x0", cfg.x0},
                     {"horizon", cfg.horizon},
                     {"stride", cfg.stride}};
  if (cfg.budget != 0) j["budget"] = cfg.budget;
  if (cfg.window != 0) j["window"] = cfg.window;
  if (!cfg.ells.empty()) j["ells"] = cfg.ells;
  if (cfg.kind == ExperimentKind::ExitScaling) j["k"] = cfg.k;
  if (cfg.kind == ExperimentKind::LoopDominance) j["ell"] = cfg.ell;
  if (cfg.kind == ExperimentKind::RlProbe) {
    j["r"] = cfg.r;
    j["alpha"] = cfg.alpha;
  }
  if (!cfg.targets.empty()) j["targets"] = cfg.targets;
  if (!cfg.checkpoints.empty()) j["checkpoints"] = cfg.checkpoints;
  if (cfg.snapshot) j["snapshot"] = true;
  if (cfg.dump_trajectories) j["dump_trajectories"] = true;
  if (!cfg.out.empty()) j["out"] = cfg.out;
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
  cfg = ExperimentConfig{};
  try {
    if (j.contains("schema")) cfg.schema = j.at("schema").get<int>();
    cfg.kind = kind_from_name(j.at("kind").get<std::string>());
    if (!j.contains("seed")) throw ConfigError("config requires a seed");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("replicas"))
      cfg.replicas = j.at("replicas").get<std::size_t>();
    if (j.contains("s")) cfg.s = j.at("s").get<std::uint32_t>();
    if (j.contains("env")) cfg.env = j.at("env").get<EnvironmentSpec>();
    if (j.contains("tree")) {
      const auto& t = j.at("tree");
      cfg.tree.shape = t.value("shape", std::string("single_vertex_with_loop"));
      cfg.tree.ell = t.value("ell", 0u);
      cfg.tree.length = t.value("length", 0u);
      cfg.tree.loop_at_root = t.value("loop_at_root", true);
      cfg.tree.root_self_loop = t.value("root_self_loop", true);
      if (t.contains("edges"))
        cfg.tree.edges =
            t.at("edges").get<std::vector<std::pair<VertexId, VertexId>>>();
    }
    cfg.x0 = j.value("x0", kRoot);
    cfg.horizon = j.value("horizon", std::uint64_t{0});
    cfg.stride = j.value("stride", std::uint64_t{1});
    cfg.budget = j.value("budget", std::uint64_t{0});
    cfg.window = j.value("window", std::uint64_t{0});
    if (j.contains("ells"))
      cfg.ells = j.at("ells").get<std::vector<std::uint64_t>>();
    cfg.k = j.value("k", 1u);
    if (cfg.kind == ExperimentKind::ExitScaling) {
      if (!j.contains("s")) cfg.s = 2 * cfg.k;       // s is determined by k
      if (!j.contains("budget")) cfg.budget = 1'000'000;
    }
    cfg.ell = j.value("ell", 0u);
    cfg.r = j.value("r", 1u);
    cfg.alpha = j.value("alpha", 0.5);
    if (j.contains("targets"))
      cfg.targets = j.at("targets").get<std::vector<VertexId>>();
    if (j.contains("checkpoints"))
      cfg.checkpoints = j.at("checkpoints").get<std::vector<std::uint64_t>>();
    cfg.snapshot = j.value("snapshot", false);
    cfg.dump_trajectories = j.value("dump_trajectories", false);
    cfg.out = j.value("out", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  cfg.validate();
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> ticket{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = ticket.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<std::size_t>(workers, count);
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

RunOptions options_for(const ExperimentConfig& cfg) {
  RunOptions opt;
  opt.horizon = cfg.horizon;
  opt.stride = cfg.stride;
  opt.targets = cfg.targets;
  switch (cfg.kind) {
    case ExperimentKind::Trap:
      opt.trap_window = cfg.window == 0 ? cfg.horizon / 10 : cfg.window;
      break;
    case ExperimentKind::Simulate:
      opt.keep_snapshot = cfg.snapshot;
      break;
    default:
      break;
  }
  return opt;
}

std::vector<std::uint64_t> recurrence_checkpoints(const ExperimentConfig& cfg) {
  if (!cfg.checkpoints.empty()) return cfg.checkpoints;
  std::vector<std::uint64_t> cps;
  const std::uint64_t early = cfg.horizon / 100;
  if (early >= cfg.stride && early % cfg.stride == 0) cps.push_back(early);
  cps.push_back(cfg.horizon);
  return cps;
}

std::uint64_t crossings_at(const TrajectoryRecord& rec, std::uint64_t t) {
  for (const auto& s : rec.series)
    if (s.n == t) return s.crossings;
  throw ConfigError("checkpoint is not a sample time");
}

nlohmann::json trajectory_aggregate(const ExperimentConfig& cfg,
                                    const std::vector<TrajectoryRecord>& recs) {
  switch (cfg.kind) {
    case ExperimentKind::Speed: {
      const SpeedEstimate est = estimate_speed(recs);
      nlohmann::json j = est;
      j["replicas"] = recs.size();
      return j;
    }
    case ExperimentKind::Recurrence: {
      const auto cps = recurrence_checkpoints(cfg);
      std::size_t late_visits = 0;
      for (const auto& r : recs)
        if (r.last_root_visit && *r.last_root_visit >= cfg.horizon / 2 &&
            *r.last_root_visit <= cfg.horizon)
          ++late_visits;
      nlohmann::json medians = nlohmann::json::object();
      std::vector<double> med_values;
      for (std::uint64_t cp : cps) {
        std::vector<std::uint64_t> xs;
        xs.reserve(recs.size());
        for (const auto& r : recs) xs.push_back(crossings_at(r, cp));
        const double med = median_of_u64(std::move(xs));
        medians[std::to_string(cp)] = med;
        med_values.push_back(med);
      }
      nlohmann::json j{{"replicas", recs.size()},
                       {"late_root_visit_fraction",
                        static_cast<double>(late_visits) /
                            static_cast<double>(recs.size())},
                       {"crossings_median_at", std::move(medians)}};
      if (med_values.size() >= 2 && med_values.front() > 0.0)
        j["crossings_growth_ratio"] = med_values.back() / med_values.front();
      return j;
    }
    case ExperimentKind::Trap: {
      const std::uint64_t w = cfg.window == 0 ? cfg.horizon / 10 : cfg.window;
      std::size_t trapped = 0;
      for (const auto& r : recs)
        if (detect_trap(r, w, cfg.s).trapped) ++trapped;
      return {{"replicas", recs.size()},
              {"window", w},
              {"trapped_fraction", static_cast<double>(trapped) /
                                       static_cast<double>(recs.size())}};
    }
    case ExperimentKind::Height: {
      const HeightDegreeReport rep = height_and_degrees(recs, cfg.checkpoints);
      nlohmann::json j = rep;
      j["replicas"] = recs.size();
      return j;
    }
    default: {  // Simulate
      std::vector<double> depths, heights, crossings;
      for (const auto& r : recs) {
        depths.push_back(r.final_depth);
        heights.push_back(r.final_tree.height);
        crossings.push_back(static_cast<double>(r.crossing_times.size()));
      }
      std::uint64_t parity_mismatches = 0;
      for (const auto& r : recs) parity_mismatches += r.parity_mismatches;
      return {{"replicas", recs.size()},
              {"horizon", cfg.horizon},
              {"final_depth_median", median_of(std::move(depths))},
              {"final_height_median", median_of(std::move(heights))},
              {"crossings_median", median_of(std::move(crossings))},
              {"parity_mismatches", parity_mismatches}};
    }
  }
}

void run_trajectory_kind(const ExperimentConfig& cfg, unsigned workers,
                         RunResult& result) {
  const GrowingTree tree0 = build_tree(cfg.tree);
  const RunOptions opt = options_for(cfg);
  std::vector<TrajectoryRecord> recs(cfg.replicas);
  parallel_for(cfg.replicas, workers, [&](std::size_t i) {
    recs[i] = run(tree0, cfg.x0, cfg.env, cfg.s, opt,
                  RandomStream::for_replica(cfg.seed, i));
  });
  result.replica_lines.reserve(cfg.replicas);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    nlohmann::json line = recs[i];
    line["replica"] = i;
    result.replica_lines.push_back(line.dump());
    if (cfg.dump_trajectories)
      result.extra_files.emplace_back(
          ".replica" + std::to_string(i) + ".trajectory.jsonl",
          to_jsonl(recs[i]));
  }
  result.aggregate = trajectory_aggregate(cfg, recs);
}

void run_exit_scaling(const ExperimentConfig& cfg, unsigned workers,
                      RunResult& result) {
  const RandomStream root = RandomStream::for_replica(cfg.seed, 0);
  std::vector<std::vector<CensoredValue>> values(cfg.ells.size());
  for (auto& row : values) row.resize(cfg.replicas);
  parallel_for(cfg.ells.size() * cfg.replicas, workers, [&](std::size_t idx) {
    const std::size_t row = idx / cfg.replicas;
    const std::size_t i = idx % cfg.replicas;
    values[row][i] =
        exit_scaling_replica(cfg.k, cfg.env, cfg.ells[row], cfg.budget, row, i,
                             root);
  });
  for (std::size_t row = 0; row < values.size(); ++row)
    for (std::size_t i = 0; i < values[row].size(); ++i) {
      nlohmann::json line{{"ell", cfg.ells[row]},
                          {"replica", i},
                          {"tau_exit", values[row][i].value},
                          {"censored", values[row][i].censored}};
      result.replica_lines.push_back(line.dump());
    }
  result.aggregate =
      exit_scaling_aggregate(cfg.k, cfg.env, cfg.ells, cfg.budget, values);
}

void run_hitting_tail(const ExperimentConfig& cfg, unsigned workers,
                      RunResult& result) {
  const RandomStream root = RandomStream::for_replica(cfg.seed, 0);
  std::vector<std::vector<CensoredValue>> values(cfg.ells.size());
  std::vector<std::uint64_t> budgets(cfg.ells.size());
  for (std::size_t row = 0; row < cfg.ells.size(); ++row) {
    budgets[row] = static_cast<std::uint64_t>(
        std::floor(std::exp(std::sqrt(static_cast<double>(cfg.ells[row])))));
    values[row].resize(cfg.replicas);
  }
  parallel_for(cfg.ells.size() * cfg.replicas, workers, [&](std::size_t idx) {
    const std::size_t row = idx / cfg.replicas;
    const std::size_t i = idx % cfg.replicas;
    GrowingTree tree =
        GrowingTree::path(static_cast<std::uint32_t>(cfg.ells[row]), true);
    values[row][i] = first_hitting_time(
        std::move(tree), static_cast<VertexId>(cfg.ells[row]), kRoot, cfg.env,
        cfg.s, budgets[row], root.derive(row).derive(i));
  });

  nlohmann::json rows = nlohmann::json::array();
  double min_c = 0.0, max_c = 0.0;
  bool any_zero = false;
  for (std::size_t row = 0; row < cfg.ells.size(); ++row) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cfg.replicas; ++i) {
      if (!values[row][i].censored) ++hits;
      nlohmann::json line{{"ell", cfg.ells[row]},
                          {"replica", i},
                          {"eta", values[row][i].value},
                          {"censored", values[row][i].censored}};
      result.replica_lines.push_back(line.dump());
    }
    const double p = static_cast<double>(hits) /
                     static_cast<double>(cfg.replicas);
    const Interval iv = wilson_interval(hits, cfg.replicas);
    const double c = p * std::sqrt(static_cast<double>(cfg.ells[row]));
    if (p == 0.0) any_zero = true;
    if (row == 0) {
      min_c = max_c = c;
    } else {
      min_c = std::min(min_c, c);
      max_c = std::max(max_c, c);
    }
    rows.push_back({{"ell", cfg.ells[row]},
                    {"budget", budgets[row]},
                    {"replicas", cfg.replicas},
                    {"hits", hits},
                    {"p_hat", p},
                    {"wilson_lo", iv.lo},
                    {"wilson_hi", iv.hi},
                    {"fitted_c", c}});
  }
  nlohmann::json agg{{"rows", std::move(rows)}};
  if (!any_zero && min_c > 0.0) agg["stability_ratio"] = max_c / min_c;
  result.aggregate = std::move(agg);
}

/// The standard decorated path for dominance suites: a looped root, the
/// walker at the far end, one extra leaf on every interior path vertex and on
/// the far end itself (so the extracted backbone is well formed).
GrowingTree decorated_path(std::uint32_t ell) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId i = 1; i <= ell; ++i) edges.emplace_back(i - 1, i);
  VertexId next = ell + 1;
  for (VertexId i = 1; i <= ell; ++i) edges.emplace_back(i, next++);
  return GrowingTree::from_edges(edges, true);
}

void run_loop_dominance(const ExperimentConfig& cfg, unsigned workers,
                        RunResult& result) {
  const GrowingTree tree0 = decorated_path(cfg.ell);
  const VertexId x0 = cfg.ell;
  const Backbone backbone = build_backbone(tree0, kRoot, x0);
  const RandomStream root = RandomStream::for_replica(cfg.seed, 0);
  std::vector<CensoredValue> eta_z(cfg.replicas), eta_loop(cfg.replicas);
  parallel_for(cfg.replicas, workers, [&](std::size_t i) {
    const auto [hz, hl] = dominance_replica(tree0, kRoot, x0, backbone,
                                            cfg.env, cfg.s, cfg.budget, i,
                                            root);
    eta_z[i] = hz;
    eta_loop[i] = hl;
  });
  for (std::size_t i = 0; i < cfg.replicas; ++i) {
    nlohmann::json line{{"replica", i},
                        {"eta_z", eta_z[i].value},
                        {"eta_z_censored", eta_z[i].censored},
                        {"eta_loop", eta_loop[i].value},
                        {"eta_loop_censored", eta_loop[i].censored}};
    result.replica_lines.push_back(line.dump());
  }
  nlohmann::json agg = dominance_aggregate(cfg.budget, eta_z, eta_loop);
  agg["ell"] = cfg.ell;
  agg["s"] = cfg.s;
  agg["backbone"] = backbone;
  result.aggregate = std::move(agg);
}

void run_rl_probe(const ExperimentConfig& cfg, RunResult& result) {
  RlReport rep;
  try {
    rep = estimate_rl(cfg.r, cfg.alpha, cfg.env, cfg.s, cfg.replicas,
                      RandomStream::for_replica(cfg.seed, 0));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (std::size_t i = 0; i < cfg.replicas; ++i) {
    nlohmann::json line{{"replica", i},
                        {"reached", static_cast<bool>(rep.reach_outcomes[i])},
                        {"climbed", static_cast<bool>(rep.climb_outcomes[i])}};
    result.replica_lines.push_back(line.dump());
  }
  result.aggregate = rep;
}

std::string csv_for(const ExperimentConfig& cfg, const nlohmann::json& agg) {
  std::ostringstream csv;
  if (cfg.kind == ExperimentKind::ExitScaling) {
    csv << "ell,replicas,censored,censor_rate,mean_uncensored,"
           "median_uncensored\n";
    for (const auto& row : agg.at("rows")) {
      csv << row.at("ell").get<std::uint64_t>() << ','
          << row.at("replicas").get<std::size_t>() << ','
          << row.at("censored").get<std::size_t>() << ','
          << row.at("censor_rate").get<double>() << ','
          << row.at("mean_uncensored").get<double>() << ','
          << row.at("median_uncensored").get<double>() << '\n';
    }
  } else if (cfg.kind == ExperimentKind::HittingTail) {
    csv << "ell,budget,replicas,hits,p_hat,wilson_lo,wilson_hi,fitted_c\n";
    for (const auto& row : agg.at("rows")) {
      csv << row.at("ell").get<std::uint64_t>() << ','
          << row.at("budget").get<std::uint64_t>() << ','
          << row.at("replicas").get<std::size_t>() << ','
          << row.at("hits").get<std::size_t>() << ','
          << row.at("p_hat").get<double>() << ','
          << row.at("wilson_lo").get<double>() << ','
          << row.at("wilson_hi").get<double>() << ','
          << row.at("fitted_c").get<double>() << '\n';
    }
  }
  return csv.str();
}

void persist(const ExperimentConfig& cfg, const RunResult& result) {
  const fs::path base(cfg.out);
  std::error_code ec;
  if (base.has_parent_path())
    fs::create_directories(base.parent_path(), ec);  // best effort

  const auto write_file = [](const fs::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path.string());
    out << data;
    if (!out) throw IoError("cannot write output file: " + path.string());
  };

  write_file(fs::path(cfg.out + ".json"), result.document().dump(2) + "\n");
  std::string jsonl;
  for (const auto& line : result.replica_lines) {
    jsonl += line;
    jsonl += '\n';
  }
  write_file(fs::path(cfg.out + ".jsonl"), jsonl);
  if (cfg.kind == ExperimentKind::ExitScaling ||
      cfg.kind == ExperimentKind::HittingTail)
    write_file(fs::path(cfg.out + ".csv"), csv_for(cfg, result.aggregate));
  for (const auto& [suffix, content] : result.extra_files)
    write_file(fs::path(cfg.out + suffix), content);
}

}  // namespace

nlohmann::json RunResult::document() const {
  return {{"config", config}, {"aggregate", aggregate}, {"version", kVersion}};
}

nlohmann::json RunResult::full_document() const {
  nlohmann::json doc = document();
  doc["runtime"] = {{"wall_clock_ms", wall_clock_ms},
                    {"workers", workers},
                    {"version", kVersion}};
  return doc;
}

RunResult run_experiment(const ExperimentConfig& config, unsigned workers) {
  config.validate();
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const auto start = std::chrono::steady_clock::now();

  RunResult result;
  result.config = config;
  result.workers = workers;

  switch (config.kind) {
    case ExperimentKind::ExitScaling:
      run_exit_scaling(config, workers, result);
      break;
    case ExperimentKind::HittingTail:
      run_hitting_tail(config, workers, result);
      break;
    case ExperimentKind::LoopDominance:
      run_loop_dominance(config, workers, result);
      break;
    case ExperimentKind::RlProbe:
      run_rl_probe(config, result);
      break;
    default:
      run_trajectory_kind(config, workers, result);
      break;
  }

  result.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  if (!config.out.empty()) persist(config, result);
  return result;
}

}  // namespace tbrw
