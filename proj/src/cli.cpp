#include "tbrw/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tbrw/env.hpp"
#include "tbrw/harness.hpp"
#include "tbrw/version.hpp"
#include "json.hpp"

namespace tbrw {

namespace {

struct EnvFlags {
  std::string family;
  std::uint64_t c = 1;
  double p = 0.5;
  double mean = 1.0;
  double lambda = 1.0;
  double alpha = 0.5;
  double delta = 1.0;
  double a = 1.0;
  std::uint64_t env_stride = 1;
  std::vector<double> pmf;
  double scale = 1.0;
  double power = 2.0;
};

bool has_flag(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

void add_env_flags(CLI::App* sub, EnvFlags& f) {
  sub->add_option("--family", f.family,
                  "environment family: constant|bernoulli|geometric|poisson|"
                  "power_law_tail|polynomial|table|bernoulli_schedule");
  sub->add_option("--c", f.c, "constant: value");
  sub->add_option("--p", f.p, "bernoulli: success probability");
  sub->add_option("--mean", f.mean, "geometric: mean");
  sub->add_option("--lambda", f.lambda, "poisson: rate");
  sub->add_option("--alpha", f.alpha, "power_law_tail: tail exponent in (0,1)");
  sub->add_option("--delta", f.delta, "power_law_tail: tail scale");
  sub->add_option("--a", f.a, "polynomial: exponent");
  sub->add_option("--env-stride", f.env_stride, "polynomial: growth period");
  sub->add_option("--pmf", f.pmf, "table: probabilities for 0,1,...")
      ->delimiter(',');
  sub->add_option("--scale", f.scale, "bernoulli_schedule: scale");
  sub->add_option("--power", f.power, "bernoulli_schedule: index power");
}

nlohmann::json env_json(const CLI::App* sub, const EnvFlags& f) {
  nlohmann::json env;
  if (has_flag(sub, "--family")) env["family"] = f.family;
  if (has_flag(sub, "--c")) env["c"] = f.c;
  if (has_flag(sub, "--p")) env["p"] = f.p;
  if (has_flag(sub, "--mean")) env["mean"] = f.mean;
  if (has_flag(sub, "--lambda")) env["lambda"] = f.lambda;
  if (has_flag(sub, "--alpha")) env["alpha"] = f.alpha;
  if (has_flag(sub, "--delta")) env["delta"] = f.delta;
  if (has_flag(sub, "--a")) env["a"] = f.a;
  if (has_flag(sub, "--env-stride")) env["stride"] = f.env_stride;
  if (has_flag(sub, "--pmf")) env["pmf"] = f.pmf;
  if (has_flag(sub, "--scale")) env["scale"] = f.scale;
  if (has_flag(sub, "--power")) env["power"] = f.power;
  return env;
}

struct ExperimentFlags {
  EnvFlags env;
  std::uint64_t seed = 0;
  std::size_t replicas = 1;
  std::uint32_t s = 1;
  std::uint64_t horizon = 0;
  std::uint64_t stride = 1;
  std::uint64_t budget = 0;
  std::uint64_t window = 0;
  std::vector<std::uint64_t> ells;
  std::uint32_t k = 1;
  std::uint32_t ell = 0;
  std::uint32_t r = 1;
  double rl_alpha = 0.5;
  std::string tree_shape;
  std::uint32_t leaves = 0;
  std::uint32_t length = 0;
  bool no_root_loop = false;
  std::uint32_t x0 = 0;
  std::vector<std::uint64_t> targets;
  std::vector<std::uint64_t> checkpoints;
  bool snapshot = false;
  bool dump_trajectories = false;
  std::string out;
  std::string config_path;
  unsigned workers = 0;
};

void add_common_flags(CLI::App* sub, ExperimentFlags& f) {
  sub->add_option("--seed", f.seed, "master seed (required here or in --config)");
  sub->add_option("--replicas", f.replicas, "number of replicas");
  sub->add_option("--s", f.s, "growth period of the walk");
  sub->add_option("--horizon", f.horizon, "steps per replica");
  sub->add_option("--stride", f.stride, "sampling stride");
  sub->add_option("--budget", f.budget, "step budget for hitting/exit times");
  sub->add_option("--out", f.out, "output path prefix");
  sub->add_option("--config", f.config_path,
                  "JSON config file; its fields override flags");
  sub->add_option("--workers", f.workers, "worker threads (0 = hardware)");
  sub->add_option("--tree", f.tree_shape,
                  "initial tree: single_vertex_with_loop|star_with_loop|path");
  sub->add_option("--leaves", f.leaves, "star_with_loop: leaf count");
  sub->add_option("--length", f.length, "path: edge count");
  sub->add_flag("--no-root-loop", f.no_root_loop, "path without a root loop");
  sub->add_option("--x0", f.x0, "walker start vertex");
  add_env_flags(sub, f.env);
}

nlohmann::json flags_to_json(const CLI::App* sub, const std::string& kind,
                             const ExperimentFlags& f) {
  nlohmann::json j;
  j["kind"] = kind;
  if (has_flag(sub, "--seed")) j["seed"] = f.seed;
  if (has_flag(sub, "--replicas")) j["replicas"] = f.replicas;
  if (has_flag(sub, "--s")) j["s"] = f.s;
  if (has_flag(sub, "--horizon")) j["horizon"] = f.horizon;
  if (has_flag(sub, "--stride")) j["stride"] = f.stride;
  if (has_flag(sub, "--budget")) j["budget"] = f.budget;
  if (has_flag(sub, "--window")) j["window"] = f.window;
  if (has_flag(sub, "--ells")) j["ells"] = f.ells;
  if (has_flag(sub, "--k")) j["k"] = f.k;
  if (has_flag(sub, "--ell")) j["ell"] = f.ell;
  if (has_flag(sub, "--r")) j["r"] = f.r;
  if (has_flag(sub, "--rl-alpha")) j["alpha"] = f.rl_alpha;
  if (has_flag(sub, "--x0")) j["x0"] = f.x0;
  if (has_flag(sub, "--targets")) j["targets"] = f.targets;
  if (has_flag(sub, "--checkpoints")) j["checkpoints"] = f.checkpoints;
  if (has_flag(sub, "--snapshot")) j["snapshot"] = true;
  if (has_flag(sub, "--dump-trajectories")) j["dump_trajectories"] = true;
  if (has_flag(sub, "--out")) j["out"] = f.out;
  nlohmann::json tree;
  if (has_flag(sub, "--tree")) tree["shape"] = f.tree_shape;
  if (has_flag(sub, "--leaves")) {
    tree["shape"] = "star_with_loop";
    tree["ell"] = f.leaves;
  }
  if (has_flag(sub, "--length")) {
    tree["shape"] = "path";
    tree["length"] = f.length;
    tree["loop_at_root"] = !f.no_root_loop;
  }
  if (!tree.empty()) j["tree"] = std::move(tree);
  const nlohmann::json env = env_json(sub, f.env);
  if (!env.empty()) j["env"] = env;
  return j;
}

EnvironmentSpec env_from_flags(const CLI::App* sub, const EnvFlags& f) {
  nlohmann::json env = env_json(sub, f);
  if (!env.contains("family"))
    throw ConfigError("an environment family is required (--family)");
  return env.get<EnvironmentSpec>();
}

void print_condition(const std::string& label, const ConditionFinding& f) {
  std::cout << label << ": " << verdict_name(f.verdict);
  if (f.constant) std::cout << " (constant " << *f.constant << ")";
  if (!f.witness.empty()) std::cout << " [" << f.witness << "]";
  std::cout << "\n";
}

int run_classify(const CLI::App* sub, const EnvFlags& flags, bool as_json) {
  const EnvironmentSpec spec = env_from_flags(sub, flags);
  const ConditionReport report = classify_conditions(spec);
  if (as_json) {
    nlohmann::json j{{"env", spec}, {"report", report}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "environment: " << nlohmann::json(spec).dump() << "\n";
  print_condition("UE  (uniform ellipticity)", report.ue);
  print_condition("(M)_1 (first moment)", report.moment1);
  print_condition("(M)_2 (second moment)", report.moment2);
  print_condition("S   (slow growth)", report.cond_s);
  print_condition("I   (fast growth)", report.cond_i);
  return 0;
}

int run_kind(const CLI::App* sub, const std::string& kind,
             const ExperimentFlags& f) {
  nlohmann::json j = flags_to_json(sub, kind, f);
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot read config file: " + f.config_path);
    nlohmann::json file_json;
    try {
      in >> file_json;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") +
                        e.what());
    }
    for (const auto& [key, value] : file_json.items()) j[key] = value;
  }
  const ExperimentConfig config = j.get<ExperimentConfig>();
  const RunResult result = run_experiment(config, f.workers);
  std::cout << result.document().dump(2) << "\n";
  std::cerr << "wall clock: " << result.wall_clock_ms << " ms, workers: "
            << result.workers << "\n";
  if (!config.out.empty())
    std::cerr << "wrote " << config.out << ".json, " << config.out
              << ".jsonl\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"tree-builder random walk: simulator and estimator suites"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ExperimentFlags f;
  // CLI subcommand names use dashes; config files use the same names with
  // underscores.
  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"simulate", "run replicas and record trajectories"},
      {"speed", "terminal depth/n with confidence interval"},
      {"recurrence", "late root visits and crossing growth"},
      {"trap", "trapped fraction via the final-window proxy"},
      {"exit-scaling", "exit times across an ell grid"},
      {"hitting-tail", "ancestor hitting probabilities at e^sqrt(ell)"},
      {"loop-dominance", "walker vs loop process CDF dominance"},
      {"height", "height medians and degree histogram"},
      {"rl-probe", "escape and backtrack probabilities"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, desc] : kinds) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common_flags(sub, f);
    if (name == "trap" || name == "simulate")
      sub->add_option("--window", f.window, "trap detection window");
    if (name == "exit-scaling" || name == "hitting-tail")
      sub->add_option("--ells", f.ells, "comma-separated ell grid")
          ->delimiter(',');
    if (name == "exit-scaling")
      sub->add_option("--k", f.k, "half growth period (s = 2k)");
    if (name == "loop-dominance")
      sub->add_option("--ell", f.ell, "decorated path length");
    if (name == "rl-probe") {
      sub->add_option("--r", f.r, "distance scale");
      sub->add_option("--rl-alpha", f.rl_alpha, "budget exponent in (0,1)");
    }
    if (name == "recurrence" || name == "height")
      sub->add_option("--checkpoints", f.checkpoints,
                      "comma-separated sample times")
          ->delimiter(',');
    if (name == "simulate") {
      sub->add_option("--targets", f.targets,
                      "vertices whose first-hitting times get recorded")
          ->delimiter(',');
      sub->add_flag("--snapshot", f.snapshot,
                    "embed the final tree in each replica record");
      sub->add_flag("--dump-trajectories", f.dump_trajectories,
                    "write per-replica trajectory sample files");
    }
    subs[name] = sub;
  }

  EnvFlags classify_flags;
  bool classify_json = false;
  CLI::App* classify =
      app.add_subcommand("classify-env", "classify an environment family");
  add_env_flags(classify, classify_flags);
  classify->add_flag("--json", classify_json, "print the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help() << "\n";
    return 2;
  }

  try {
    if (classify->parsed()) return run_classify(classify, classify_flags,
                                                classify_json);
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) {
        std::string kind = name;
        for (char& ch : kind)
          if (ch == '-') ch = '_';
        return run_kind(sub, kind, f);
      }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace tbrw
