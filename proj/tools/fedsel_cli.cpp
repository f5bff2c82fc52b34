// fedsel: run client-selection scenarios from a JSON config.
//
//   fedsel simulate --config desk.json --algo quick_init_ucb --trials 20 --out runs/qi
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fedsel/config.hpp"
#include "fedsel/error.hpp"
#include "fedsel/export.hpp"
#include "fedsel/harness.hpp"
#include "fedsel/simd.hpp"

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  std::string config;
  std::string algo = "quick_init_ucb";
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
  std::string reward_mode;
  std::string exports = "csv,svg";
  std::vector<double> theta;
  std::size_t threads = 0;
  bool quiet = false;
};

std::set<std::string> split_formats(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    if (item != "csv" && item != "svg") throw fedsel::ConfigError("--export: unknown format '" + item + "' (csv, svg)");
    out.insert(item);
  }
  return out;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

int simulate(const SimulateArgs& a) {
  fedsel::ScenarioConfig cfg = fedsel::load_config(a.config);
  if (a.seed_set) cfg.seed = a.seed;
  if (!a.reward_mode.empty()) cfg.reward_mode = fedsel::parse_reward_mode(a.reward_mode);
  if (!a.theta.empty()) {
    cfg.channel.mode = fedsel::ChannelMode::fixed;
    cfg.channel.theta = a.theta;
  }
  const fedsel::Algorithm algo = fedsel::parse_algorithm(a.algo);
  const auto formats = split_formats(a.exports);
  const fedsel::Scenario scenario = fedsel::build_scenario(cfg);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw fedsel::IoError("cannot create output directory " + a.out + ": " + ec.message());

  const bool csv = formats.count("csv") != 0;
  const bool bp = algo == fedsel::Algorithm::bp_ucb;
  fedsel::MonteCarloOptions opt;
  opt.trials = a.trials;
  opt.threads = a.threads;
  // bp diagnostics need every trace; the per-slot diagnostics are small, so keep them
  std::vector<fedsel::EpisodeTrace> bp_traces(bp ? a.trials : 0);
  if (csv) {
    opt.on_trace = [&](std::size_t i, const fedsel::EpisodeTrace& tr) {
      fedsel::write_trace_csv(tr, scenario, path_in(a.out, "trace_" + std::to_string(i) + ".csv"));
      if (bp) {
        fedsel::write_gossip_csv(tr, scenario, path_in(a.out, "gossip_" + std::to_string(i) + ".csv"));
        bp_traces[i].algorithm = tr.algorithm;
        bp_traces[i].bp = tr.bp;
      }
    };
  }
  const fedsel::MetricsReport rep = fedsel::monte_carlo(scenario, algo, opt);

  if (csv) {
    fedsel::write_report_csv(rep, path_in(a.out, "report.csv"));
    fedsel::write_bounds_csv(rep, cfg.log_slots, path_in(a.out, "bounds.csv"));
    fedsel::write_bp_diagnostics_csv(bp_traces, path_in(a.out, "bp_diagnostics.csv"));
    fedsel::write_selection_csv(rep, path_in(a.out, "selection.csv"));
    fedsel::write_tta_csv(rep, path_in(a.out, "tta.csv"));
    std::ofstream(path_in(a.out, "config.json")) << fedsel::dump_config(cfg);
  }
  if (formats.count("svg")) fedsel::write_report_svg(rep, path_in(a.out, "report.svg"));

  if (!a.quiet) {
    std::printf("algorithm      %s (%s mode, simd %s)\n", std::string(fedsel::to_string(algo)).c_str(),
                std::string(fedsel::to_string(cfg.reward_mode)).c_str(),
                std::string(fedsel::simd::backend_name(fedsel::simd::active_backend())).c_str());
    std::printf("trials         %zu x %zu slots\n", rep.trials, rep.horizon);
    if (cfg.reward_mode == fedsel::RewardMode::federated) {
      std::printf("final accuracy %.4f +- %.4f\n", rep.final_accuracy_mean, rep.final_accuracy_std);
      if (rep.tta_of_mean)
        std::printf("time to %.2f   %zu (mean curve), %.2f (per trial, %zu/%zu reached)\n", cfg.target_accuracy,
                    *rep.tta_of_mean, rep.tta_mean, rep.tta_reached, rep.trials);
      else
        std::printf("time to %.2f   not reached by the mean curve (%zu/%zu trials reached)\n", cfg.target_accuracy,
                    rep.tta_reached, rep.trials);
    } else {
      std::printf("regret(T)      %.4f +- %.4f\n", rep.regret.mean.back(), rep.regret.std.back());
      if (!std::isnan(rep.bound.back())) std::printf("bound(T)       %.4f\n", rep.bound.back());
    }
    std::printf("outputs        %s\n", a.out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Client selection for federated learning: Quick-Init UCB, BP-UCB and baselines"};
  app.require_subcommand(1);

  SimulateArgs args;
  CLI::App* sim = app.add_subcommand("simulate", "Run Monte Carlo trials of one algorithm on a scenario");
  sim->add_option("--config", args.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  sim->add_option("--algo", args.algo,
                  "quick_init_ucb | bp_ucb | random | round_robin | conventional_ucb | oracle")
      ->capture_default_str();
  sim->add_option("--trials", args.trials, "Number of seeded trials")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--seed", args.seed, "Master seed (overrides the config)")->each([&](const std::string&) {
    args.seed_set = true;
  });
  sim->add_option("--out", args.out, "Output directory")->capture_default_str();
  sim->add_option("--reward-mode", args.reward_mode, "oracle | federated (overrides the config)");
  sim->add_option("--export", args.exports, "Comma-separated formats: csv, svg")->capture_default_str();
  sim->add_option("--theta", args.theta, "Fixed uplink success probability, one value or one per client");
  sim->add_option("--threads", args.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sim->add_flag("--quiet", args.quiet, "Do not print the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; malformed invocations count as configuration errors
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return simulate(args);
  } catch (const fedsel::ConfigError& e) {
    std::fprintf(stderr, "fedsel: configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fedsel: %s\n", e.what());
    return 3;
  }
  return 0;
}
