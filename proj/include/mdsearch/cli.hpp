#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mdsearch/engine.hpp"

namespace mdsearch::cli {

// Configuration problems carry the offending field so the CLI can report
// "field: message" and exit with the config status.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field(std::move(field)) {}
  std::string field;
};

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

nlohmann::json load_config_file(const std::string& path);  // {} if path empty

NoiseModel parse_model(const nlohmann::json& cfg);
StrategyKind parse_strategy(const std::string& name);
KappaMode parse_kappa_mode(const std::string& name);

// Search parameters for one simulation cell; n/rate/threshold/strategy may be
// overridden per sweep cell.
SearchParams params_from_config(const nlohmann::json& cfg, int n_queries,
                                double rate, bool rate_is_delta,
                                double threshold);

// Subcommands. Results are written to cfg["out"]; human-readable notes go to
// `log`. All of them are pure functions of the merged configuration.
void cmd_curves(const nlohmann::json& cfg, std::ostream& log);
void cmd_simulate(const nlohmann::json& cfg, std::ostream& log);
void cmd_sweep(const nlohmann::json& cfg, std::ostream& log);
void cmd_trajectories(const nlohmann::json& cfg, std::ostream& log);

// Formatting shared with the tests: fixed six-decimal floats, "inf" for
// unbounded exponents.
std::string format_fixed(double v);
std::string stats_csv_header();
std::string stats_csv_row(StrategyKind kind, const SearchParams& params,
                          long trials, const SweepStats& stats);

}  // namespace mdsearch::cli
