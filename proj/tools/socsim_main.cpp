// socsim: multi-agent simulator with an expected-free-energy creation loop,
// a Metropolis-Hastings naming game on a social graph, and the matching
// analysis pipelines (Wasserstein / GW+MDS / RSA / acceptance networks).

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "socsim/socsim.hpp"

namespace fs = std::filesystem;

namespace {

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::string normalize_condition(const std::string& c) {
  if (c == "with" || c == "with_creation") return "with_creation";
  if (c == "without" || c == "without_creation") return "without_creation";
  throw std::invalid_argument("condition must be 'with' or 'without'");
}

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;
  bool seed_set = false;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  std::string condition;
  long steps = -1;
  int threads = default_threads();
  std::string log_level = "info";
};

int run_simulate(const SimulateArgs& args) {
  socsim::SimConfig config;
  if (!args.config_path.empty()) config = socsim::SimConfig::load(args.config_path);
  if (args.seed_set) config.seed = args.seed;
  if (!args.condition.empty()) config.condition = normalize_condition(args.condition);
  if (args.steps >= 0) config.steps = args.steps;
  config.validate();

  std::ostream* progress = args.log_level == "quiet" ? nullptr : &std::cerr;

  if (!args.seeds.empty()) {
    for (const std::uint64_t s : args.seeds) {
      socsim::SimConfig c = config;
      c.seed = s;
      const fs::path dir = fs::path(args.out_dir) / ("seed-" + std::to_string(s));
      if (progress) (*progress) << "== run seed " << s << " -> " << dir << "\n";
      const auto summary = socsim::run(c, dir, args.threads, progress);
      if (progress)
        (*progress) << "done in " << summary.wall_seconds << "s  final vfe="
                    << summary.final_mean_vfe << "\n";
    }
    return 0;
  }

  const auto summary = socsim::run(config, args.out_dir, args.threads, progress);
  if (progress)
    (*progress) << "done in " << summary.wall_seconds << "s  final vfe="
                << summary.final_mean_vfe << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::vector<std::string> runs;
  std::string out_dir;
  socsim::AnalysisOptions opt;
};

int run_analyze(const std::string& kind, const AnalyzeArgs& args) {
  std::vector<socsim::RunDirData> runs;
  runs.reserve(args.runs.size());
  for (const auto& r : args.runs) runs.push_back(socsim::load_run(r));

  if (kind == "wasserstein") {
    for (const auto& run : runs)
      socsim::analyze_wasserstein(run, args.opt, args.out_dir);
  } else if (kind == "gw-mds") {
    for (const auto& run : runs)
      socsim::analyze_gw_mds(run, args.opt, args.out_dir);
  } else if (kind == "rsa") {
    socsim::analyze_rsa(runs, args.opt, args.out_dir);
  } else if (kind == "acceptance") {
    for (const auto& run : runs)
      socsim::analyze_acceptance(run, args.opt, args.out_dir);
  } else {
    throw std::invalid_argument("unknown analysis kind: " + kind);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"socsim: active-inference naming-game simulator and analysis"};
  app.require_subcommand(1);

  // simulate
  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "run a simulation");
  simulate->add_option("--config", sim_args.config_path, "config JSON path");
  simulate->add_option("--out", sim_args.out_dir, "output run directory")->required();
  auto* seed_opt = simulate->add_option("--seed", sim_args.seed, "global seed");
  simulate->add_option("--seeds", sim_args.seeds,
                       "comma-separated seeds; runs into <out>/seed-<s>")
      ->delimiter(',');
  simulate->add_option("--condition", sim_args.condition, "with | without");
  simulate->add_option("--steps", sim_args.steps, "number of steps");
  simulate->add_option("--threads", sim_args.threads, "worker count");
  simulate->add_option("--log-level", sim_args.log_level, "info | quiet")
      ->check(CLI::IsMember({"info", "quiet"}));

  // analyze <kind>
  AnalyzeArgs an_args;
  std::string kind;
  auto* analyze = app.add_subcommand("analyze", "compute analysis CSVs from runs");
  analyze->add_option("kind", kind, "wasserstein | gw-mds | rsa | acceptance")
      ->required()
      ->check(CLI::IsMember({"wasserstein", "gw-mds", "rsa", "acceptance"}));
  analyze->add_option("--run", an_args.runs, "run directory (repeatable)")
      ->required();
  analyze->add_option("--out", an_args.out_dir, "output CSV directory")->required();
  analyze->add_option("--interval", an_args.opt.interval, "step window width");
  analyze->add_option("--window", an_args.opt.window, "RSA moving-average window");
  analyze->add_option("--t0", an_args.opt.t0, "restrict to steps >= t0");
  analyze->add_option("--t1", an_args.opt.t1, "restrict to steps <= t1");
  analyze->add_option("--analysis-seed", an_args.opt.analysis_seed,
                      "seed for reference-set sampling");
  analyze->add_option("--ref-per-agent", an_args.opt.ref_per_agent,
                      "reference draws per agent per step");
  analyze->add_option("--gw-points", an_args.opt.gw_points,
                      "structure size for GW comparisons");
  analyze->add_option("--gw-epsilon", an_args.opt.gw.epsilon,
                      "entropic regularization");
  analyze->add_option("--threads", an_args.opt.threads, "worker count")
      ->default_val(default_threads());

  // validate-config
  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "check a config file");
  validate->add_option("--config", validate_path, "config JSON path")->required();

  // print-default-config
  app.add_subcommand("print-default-config",
                     "emit the default configuration as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      sim_args.seed_set = seed_opt->count() > 0;
      return run_simulate(sim_args);
    }
    if (analyze->parsed()) return run_analyze(kind, an_args);
    if (validate->parsed()) {
      const auto config = socsim::SimConfig::load(validate_path);
      config.validate();
      std::cout << "ok\n";
      return 0;
    }
    // print-default-config
    std::cout << socsim::SimConfig{}.to_json().dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
