#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tbrw/harness.hpp"

using namespace tbrw;
namespace fs = std::filesystem;

namespace {

ExperimentConfig speed_config() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Speed;
  cfg.seed = 42;
  cfg.replicas = 12;
  cfg.s = 1;
  cfg.env = EnvironmentSpec{BernoulliEnv{0.5}};
  cfg.horizon = 3000;
  cfg.stride = 300;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config round trip") {
  std::vector<ExperimentConfig> configs;
  configs.push_back(speed_config());
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::ExitScaling;
    cfg.seed = 7;
    cfg.k = 1;
    cfg.s = 2;
    cfg.ells = {5, 10};
    cfg.replicas = 3;
    cfg.budget = 1000;
    cfg.env = EnvironmentSpec{GeometricEnv{2.0}};
    configs.push_back(cfg);
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::RlProbe;
    cfg.seed = 9;
    cfg.r = 2;
    cfg.alpha = 0.4;
    cfg.replicas = 5;
    cfg.env = EnvironmentSpec{ConstantEnv{1}};
    configs.push_back(cfg);
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Trap;
    cfg.seed = 3;
    cfg.s = 2;
    cfg.horizon = 1000;
    cfg.window = 100;
    cfg.env = EnvironmentSpec{PowerLawTailEnv{0.5, 1.0}};
    cfg.tree.shape = "star_with_loop";
    cfg.tree.ell = 2;
    configs.push_back(cfg);
  }
  for (const auto& cfg : configs) {
    const nlohmann::json j = cfg;
    const auto back = j.get<ExperimentConfig>();
    CHECK(back == cfg);
    CHECK(nlohmann::json(back).dump() == j.dump());
  }
}

TEST_CASE("config validation") {
  nlohmann::json j{{"kind", "speed"}, {"horizon", 100}};
  CHECK_THROWS_AS(j.get<ExperimentConfig>(), ConfigError);  // no seed

  j["seed"] = 1;
  CHECK_NOTHROW(j.get<ExperimentConfig>());

  j["replicas"] = 0;
  CHECK_THROWS_AS(j.get<ExperimentConfig>(), ConfigError);
  j["replicas"] = 2;

  j["kind"] = "exit_scaling";
  j["ells"] = {3};
  j["budget"] = 10;
  j["k"] = 1;
  j["s"] = 3;  // must be 2k
  CHECK_THROWS_AS(j.get<ExperimentConfig>(), ConfigError);
  j["s"] = 2;
  CHECK_NOTHROW(j.get<ExperimentConfig>());

  nlohmann::json bad{{"kind", "nonsense"}, {"seed", 1}};
  CHECK_THROWS_AS(bad.get<ExperimentConfig>(), ConfigError);

  nlohmann::json trap{{"kind", "trap"}, {"seed", 1}, {"s", 2},
                      {"horizon", 100}, {"window", 80}};
  CHECK_THROWS_AS(trap.get<ExperimentConfig>(), ConfigError);
}

TEST_CASE("identical configs produce byte-identical documents") {
  const ExperimentConfig cfg = speed_config();
  const RunResult a = run_experiment(cfg, 1);
  const RunResult b = run_experiment(cfg, 1);
  CHECK(a.document().dump() == b.document().dump());
  CHECK(a.replica_lines == b.replica_lines);
}

TEST_CASE("documents are independent of the worker count") {
  for (ExperimentKind kind :
       {ExperimentKind::Speed, ExperimentKind::ExitScaling,
        ExperimentKind::LoopDominance, ExperimentKind::HittingTail}) {
    ExperimentConfig cfg = speed_config();
    cfg.kind = kind;
    if (kind == ExperimentKind::ExitScaling) {
      cfg.s = 2;
      cfg.k = 1;
      cfg.ells = {3, 9};
      cfg.budget = 20'000;
      cfg.replicas = 40;
    } else if (kind == ExperimentKind::LoopDominance) {
      cfg.ell = 3;
      cfg.budget = 500;
      cfg.replicas = 60;
    } else if (kind == ExperimentKind::HittingTail) {
      cfg.ells = {4, 9};
      cfg.replicas = 200;
    }
    const RunResult serial = run_experiment(cfg, 1);
    const RunResult parallel = run_experiment(cfg, 4);
    CHECK(serial.document().dump() == parallel.document().dump());
    CHECK(serial.replica_lines == parallel.replica_lines);
  }
}

TEST_CASE("horizon zero still yields a well-formed result") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Simulate;
  cfg.seed = 5;
  cfg.replicas = 1;
  cfg.horizon = 0;
  cfg.env = EnvironmentSpec{ConstantEnv{1}};
  const RunResult result = run_experiment(cfg, 1);
  CHECK(result.aggregate.at("replicas") == 1);
  CHECK(result.replica_lines.size() == 1);
}

TEST_CASE("outputs are persisted") {
  const fs::path dir = fs::temp_directory_path() / "tbrw_harness_test";
  fs::remove_all(dir);
  ExperimentConfig cfg = speed_config();
  cfg.kind = ExperimentKind::ExitScaling;
  cfg.s = 2;
  cfg.k = 1;
  cfg.ells = {3, 9};
  cfg.budget = 10'000;
  cfg.replicas = 25;
  cfg.out = (dir / "exit").string();
  const RunResult result = run_experiment(cfg, 2);
  CHECK(fs::exists(dir / "exit.json"));
  CHECK(fs::exists(dir / "exit.jsonl"));
  CHECK(fs::exists(dir / "exit.csv"));

  const std::string jsonl = slurp(dir / "exit.jsonl");
  std::size_t lines = 0;
  for (char c : jsonl)
    if (c == '\n') ++lines;
  CHECK(lines == 50);  // ells x replicas

  const std::string csv = slurp(dir / "exit.csv");
  CHECK(csv.rfind("ell,replicas,censored,", 0) == 0);

  const nlohmann::json doc = nlohmann::json::parse(slurp(dir / "exit.json"));
  CHECK(doc.at("aggregate") == result.aggregate);
  CHECK(doc.contains("config"));
  CHECK_FALSE(doc.contains("runtime"));
  fs::remove_all(dir);
}

TEST_CASE("unwritable outputs raise io errors") {
  ExperimentConfig cfg = speed_config();
  cfg.replicas = 1;
  cfg.horizon = 10;
  cfg.out = "/proc/definitely/not/writable/out";
  CHECK_THROWS_AS(run_experiment(cfg, 1), IoError);
}

TEST_CASE("parallel_for covers every index exactly once") {
  const std::size_t n = 1000;
  std::vector<std::atomic<int>> hits(n);
  parallel_for(n, 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) CHECK(h.load() == 1);

  CHECK_THROWS_AS(
      parallel_for(10, 3,
                   [](std::size_t i) {
                     if (i == 7) throw std::runtime_error("boom");
                   }),
      std::runtime_error);
}

TEST_CASE("decorated trees reject bad shapes") {
  TreeConfig bad;
  bad.shape = "moebius";
  CHECK_THROWS_AS(build_tree(bad), ConfigError);
}
