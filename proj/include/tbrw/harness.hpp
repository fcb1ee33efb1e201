#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbrw/analysis.hpp"
#include "tbrw/env.hpp"
#include "tbrw/loopproc.hpp"
#include "tbrw/tree.hpp"
#include "tbrw/walker.hpp"
#include "json.hpp"

namespace tbrw {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  Simulate,
  Speed,
  Recurrence,
  Trap,
  ExitScaling,
  HittingTail,
  LoopDominance,
  Height,
  RlProbe,
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

struct TreeConfig {
  std::string shape = "single_vertex_with_loop";
  std::uint32_t ell = 0;        // star_with_loop
  std::uint32_t length = 0;     // path
  bool loop_at_root = true;     // path
  std::vector<std::pair<VertexId, VertexId>> edges;  // explicit
  bool root_self_loop = true;   // explicit

  bool operator==(const TreeConfig&) const = default;
};

GrowingTree build_tree(const TreeConfig& cfg);

/// A reproducible experiment description. The seed is mandatory; replica i
/// draws from the stream derived from (seed, i), so results are independent
/// of worker count and scheduling.
struct ExperimentConfig {
  int schema = 1;
  ExperimentKind kind = ExperimentKind::Simulate;
  std::uint64_t seed = 0;
  std::size_t replicas = 1;
  std::uint32_t s = 1;
  EnvironmentSpec env;
  TreeConfig tree;
  VertexId x0 = kRoot;
  std::uint64_t horizon = 0;
  std::uint64_t stride = 1;
  std::uint64_t budget = 0;
  std::uint64_t window = 0;                 // trap; 0 means horizon/10
  std::vector<std::uint64_t> ells;          // exit_scaling, hitting_tail
  std::uint32_t k = 1;                      // exit_scaling
  std::uint32_t ell = 0;                    // loop_dominance path length
  std::uint32_t r = 1;                      // rl_probe
  double alpha = 0.5;                       // rl_probe
  std::vector<VertexId> targets;            // simulate
  std::vector<std::uint64_t> checkpoints;   // recurrence, height
  bool snapshot = false;                    // simulate: embed final trees
  bool dump_trajectories = false;           // simulate: per-sample JSONL files
  std::string out;                          // output path prefix; "" = none

  /// Kind-specific completeness; throws ConfigError.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

struct RunResult {
  nlohmann::json config;             // canonical echo
  nlohmann::json aggregate;          // kind-specific report
  std::vector<std::string> replica_lines;  // JSONL payload, replica order
  /// Extra artifacts as (path suffix, content), e.g. per-replica trajectory
  /// sample files.
  std::vector<std::pair<std::string, std::string>> extra_files;
  double wall_clock_ms = 0.0;
  unsigned workers = 0;

  /// Config echo, aggregate and version; byte-identical across re-runs of
  /// the same config regardless of worker count. This is what <out>.json
  /// holds.
  nlohmann::json document() const;
  /// document() plus the non-deterministic {"runtime": {...}} section.
  nlohmann::json full_document() const;
};

/// Runs the experiment with work-stealing over replicas (workers = 0 picks
/// the hardware count) and, when config.out is set, persists
/// <out>.json (aggregate), <out>.jsonl (per-replica records) and, for
/// tabular kinds, <out>.csv.
RunResult run_experiment(const ExperimentConfig& config, unsigned workers = 0);

/// Ticket-based parallel map; fn(i) runs exactly once per i, on some worker.
/// Exceptions are rethrown on the caller.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace tbrw
