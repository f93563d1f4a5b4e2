#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdsearch/cli.hpp"
#include "mdsearch/geometry.hpp"

using nlohmann::json;
namespace cli = mdsearch::cli;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::string strategy;
  std::string kappa_mode;
  std::string model_kind;
  std::vector<std::int64_t> n_queries;
  std::vector<double> rates;
  std::vector<double> thresholds;
  double delta = -1.0;
  double p0 = -1.0;
  double phalf = -1.0;
  double lambda = -2.0;
  double alpha = -1.0;
  double eta = -2.0;
  double eps_slack = -1.0;
  std::int64_t trials = -1;
  std::int64_t max_retries = -1;
  std::int64_t workers = -1;
  std::int64_t m_bins = -1;
  double grid_w = -1.0;
  double grid_v = -1.0;
  std::int64_t cap = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "JSON configuration file");
  sub->add_option("--out", f.out, "output CSV path");
  sub->add_option("--seed", f.seed, "master 64-bit seed")
      ->each([&f](const std::string&) { f.seed_set = true; });
  sub->add_option("--workers", f.workers, "worker threads (0 = hardware)");
  sub->add_option("--trials", f.trials, "Monte Carlo trials");
  sub->add_option("--strategy", f.strategy,
                  "nonadaptive | forney | yamamoto_itoh | two_phase");
  sub->add_option("--kappa-mode", f.kappa_mode, "known | unknown");
  sub->add_option("--N", f.n_queries, "queries per attempt (repeat to sweep)");
  sub->add_option("--R", f.rates, "targeting rate (repeat to sweep)");
  sub->add_option("--T", f.thresholds, "erasure threshold (repeat to sweep)");
  sub->add_option("--delta", f.delta, "resolution (alternative to --R)");
  sub->add_option("--model-kind", f.model_kind, "constant | linear | table");
  sub->add_option("--p0", f.p0, "noise at vanishing measure");
  sub->add_option("--phalf", f.phalf, "noise at measure 1/2");
  sub->add_option("--lambda", f.lambda, "validation fraction");
  sub->add_option("--alpha", f.alpha, "two-phase coarse resolution");
  sub->add_option("--eta", f.eta, "typicality slack");
  sub->add_option("--eps-slack", f.eps_slack, "assumed-channel slack");
  sub->add_option("--max-retries", f.max_retries, "retry cap");
  sub->add_option("--M", f.m_bins, "partition size (trajectories)");
  sub->add_option("--grid-w", f.grid_w, "position sweep resolution");
  sub->add_option("--grid-v", f.grid_v, "velocity sweep resolution");
  sub->add_option("--cap", f.cap, "trajectory count cap");
}

// Flags override individual keys of the config document.
json merged_config(const CommonFlags& f) {
  json cfg = cli::load_config_file(f.config_path);
  auto set_num_list = [&cfg](const char* key, const auto& vals) {
    if (vals.empty()) return;
    if (vals.size() == 1) {
      cfg[key] = vals.front();
    } else {
      cfg[key] = vals;
    }
  };
  set_num_list("N", f.n_queries);
  set_num_list("R", f.rates);
  set_num_list("T", f.thresholds);
  if (!f.out.empty()) cfg["out"] = f.out;
  if (f.seed_set) cfg["seed"] = f.seed;
  if (f.workers >= 0) cfg["workers"] = f.workers;
  if (f.trials >= 0) cfg["trials"] = f.trials;
  if (!f.strategy.empty()) cfg["strategy"] = f.strategy;
  if (!f.kappa_mode.empty()) cfg["kappa_mode"] = f.kappa_mode;
  if (f.delta >= 0.0) cfg["delta"] = f.delta;
  if (f.lambda > -2.0) cfg["lambda"] = f.lambda;
  if (f.alpha >= 0.0) cfg["alpha"] = f.alpha;
  if (f.eta > -2.0) cfg["eta"] = f.eta;
  if (f.eps_slack >= 0.0) cfg["eps_slack"] = f.eps_slack;
  if (f.max_retries >= 0) cfg["max_retries"] = f.max_retries;
  if (f.m_bins >= 0) cfg["M"] = f.m_bins;
  if (f.grid_w >= 0.0) cfg["grid_w"] = f.grid_w;
  if (f.grid_v >= 0.0) cfg["grid_v"] = f.grid_v;
  if (f.cap >= 0) cfg["cap"] = f.cap;
  if (!f.model_kind.empty() || f.p0 >= 0.0 || f.phalf >= 0.0) {
    json m = cfg.contains("model") ? cfg["model"] : json::object();
    if (!f.model_kind.empty()) m["kind"] = f.model_kind;
    if (f.p0 >= 0.0) m["p0"] = f.p0;
    if (f.phalf >= 0.0) m["phalf"] = f.phalf;
    cfg["model"] = m;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulator and numeric toolkit for acquiring a moving target on the "
      "circle under measurement-dependent binary noise"};
  app.require_subcommand(1);

  CommonFlags curves_f, simulate_f, sweep_f, traj_f;
  CLI::App* curves = app.add_subcommand(
      "curves", "emit the analytic rate-reliability curves as CSV");
  add_common(curves, curves_f);
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo at one parameter point, one stats row");
  add_common(simulate, simulate_f);
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Cartesian Monte Carlo sweep over N, R, T, strategy (resumable)");
  add_common(sweep, sweep_f);
  CLI::App* trajectories = app.add_subcommand(
      "trajectories", "enumerate distinct trajectories and export the table");
  add_common(trajectories, traj_f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (curves->parsed()) {
      cli::cmd_curves(merged_config(curves_f), std::cout);
    } else if (simulate->parsed()) {
      cli::cmd_simulate(merged_config(simulate_f), std::cout);
    } else if (sweep->parsed()) {
      cli::cmd_sweep(merged_config(sweep_f), std::cout);
    } else if (trajectories->parsed()) {
      cli::cmd_trajectories(merged_config(traj_f), std::cout);
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfig;
  } catch (const mdsearch::TableCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitRuntime;
  }
  return cli::kExitOk;
}
