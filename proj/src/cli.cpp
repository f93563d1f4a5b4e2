#include "mdsearch/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace mdsearch::cli {

using nlohmann::json;

namespace {

const json& require(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError(key, "missing required key");
  return cfg.at(key);
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

long as_integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return j.get<long>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

std::uint64_t require_seed(const json& cfg) {
  if (!cfg.contains("seed")) {
    throw ConfigError("seed", "a master seed is required (no silent nondeterminism)");
  }
  const json& s = cfg.at("seed");
  if (!s.is_number_integer() && !s.is_number_unsigned()) {
    throw ConfigError("seed", "expected a 64-bit integer");
  }
  return s.get<std::uint64_t>();
}

int workers_of(const json& cfg) {
  if (!cfg.contains("workers")) return 0;
  return static_cast<int>(as_integer(cfg.at("workers"), "workers"));
}

std::string out_path(const json& cfg) {
  return as_string(require(cfg, "out"), "out");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed on " + path);
}

std::vector<double> number_list(const json& j, const std::string& field) {
  std::vector<double> v;
  if (j.is_array()) {
    for (const auto& x : j) v.push_back(as_number(x, field));
  } else {
    v.push_back(as_number(j, field));
  }
  if (v.empty()) throw ConfigError(field, "list must not be empty");
  return v;
}

std::vector<int> integer_list(const json& j, const std::string& field) {
  std::vector<int> v;
  if (j.is_array()) {
    for (const auto& x : j) v.push_back(static_cast<int>(as_integer(x, field)));
  } else {
    v.push_back(static_cast<int>(as_integer(j, field)));
  }
  if (v.empty()) throw ConfigError(field, "list must not be empty");
  return v;
}

}  // namespace

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config", "top level must be an object");
  return cfg;
}

NoiseModel parse_model(const json& cfg) {
  const json& m = require(cfg, "model");
  if (!m.is_object()) throw ConfigError("model", "expected an object");
  const std::string kind = as_string(require(m, "kind"), "model.kind");
  try {
    if (kind == "constant") {
      return NoiseModel::constant(as_number(require(m, "p0"), "model.p0"));
    }
    if (kind == "linear") {
      return NoiseModel::linear(as_number(require(m, "p0"), "model.p0"),
                                as_number(require(m, "phalf"), "model.phalf"));
    }
    if (kind == "table") {
      const json& knots = require(m, "knots");
      if (!knots.is_array()) throw ConfigError("model.knots", "expected an array");
      std::vector<std::pair<double, double>> pts;
      for (const auto& k : knots) {
        if (!k.is_array() || k.size() != 2) {
          throw ConfigError("model.knots", "each knot must be [measure, probability]");
        }
        pts.emplace_back(as_number(k[0], "model.knots"),
                         as_number(k[1], "model.knots"));
      }
      return NoiseModel::table(std::move(pts));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  throw ConfigError("model.kind", "must be constant, linear, or table");
}

StrategyKind parse_strategy(const std::string& name) {
  if (name == "nonadaptive") return StrategyKind::Nonadaptive;
  if (name == "forney") return StrategyKind::Forney;
  if (name == "yamamoto_itoh") return StrategyKind::YamamotoItoh;
  if (name == "two_phase") return StrategyKind::TwoPhase;
  throw ConfigError("strategy",
                    "must be nonadaptive, forney, yamamoto_itoh, or two_phase");
}

KappaMode parse_kappa_mode(const std::string& name) {
  if (name == "known") return KappaMode::KnownVelocity;
  if (name == "unknown") return KappaMode::UnknownVelocity;
  throw ConfigError("kappa_mode", "must be known or unknown");
}

SearchParams params_from_config(const json& cfg, int n_queries, double rate,
                                bool rate_is_delta, double threshold) {
  NoiseModel model = parse_model(cfg);
  const KappaMode mode =
      parse_kappa_mode(cfg.contains("kappa_mode")
                           ? as_string(cfg.at("kappa_mode"), "kappa_mode")
                           : "unknown");
  SearchParams p = rate_is_delta
                       ? SearchParams::from_delta(n_queries, rate, mode, model)
                       : SearchParams::from_rate(n_queries, rate, mode, model);
  p.threshold = threshold;
  if (cfg.contains("lambda")) p.lambda = as_number(cfg.at("lambda"), "lambda");
  if (cfg.contains("alpha")) p.alpha = as_number(cfg.at("alpha"), "alpha");
  if (cfg.contains("eta")) p.eta = as_number(cfg.at("eta"), "eta");
  if (cfg.contains("eps_slack")) {
    p.eps_slack = as_number(cfg.at("eps_slack"), "eps_slack");
  }
  if (cfg.contains("max_retries")) {
    p.max_retries = static_cast<int>(as_integer(cfg.at("max_retries"), "max_retries"));
  }
  return p;
}

std::string format_fixed(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string stats_csv_header() {
  return "strategy,kappa_mode,N,R,delta,T,lambda,alpha,trials,failures,eps_hat,"
         "ci_lo,ci_hi,mean_tau,sd_tau,retries_mean,erasure_rate,seed";
}

std::string stats_csv_row(StrategyKind kind, const SearchParams& params,
                          long trials, const SweepStats& stats) {
  std::ostringstream row;
  const double lambda = kind == StrategyKind::YamamotoItoh ||
                                kind == StrategyKind::TwoPhase
                            ? params.resolved_lambda(kind)
                            : 0.0;
  row << strategy_name(kind) << ',' << kappa_mode_name(params.kappa_mode) << ','
      << params.n_queries << ',' << format_fixed(params.rate) << ','
      << format_fixed(params.delta) << ',' << format_fixed(params.threshold)
      << ',' << format_fixed(lambda) << ',' << format_fixed(params.alpha) << ','
      << trials << ',' << stats.failures << ',' << format_fixed(stats.eps_hat)
      << ',' << format_fixed(stats.ci_lo) << ',' << format_fixed(stats.ci_hi)
      << ',' << format_fixed(stats.mean_tau) << ',' << format_fixed(stats.sd_tau)
      << ',' << format_fixed(stats.retries_mean) << ','
      << format_fixed(stats.erasure_rate) << ',' << stats.seed;
  return row.str();
}

// ---------------------------------------------------------------------------
// curves
// ---------------------------------------------------------------------------

namespace {

std::vector<double> rate_grid(const json& cfg, const NoiseModel& model) {
  if (cfg.contains("rates")) {
    const json& r = cfg.at("rates");
    if (r.is_array() && r.empty()) return {};  // header-only output
    std::vector<double> rates = number_list(r, "rates");
    if (!std::is_sorted(rates.begin(), rates.end())) {
      throw ConfigError("rates", "grid must be sorted ascending");
    }
    return rates;
  }
  const double cap = max_rate_adaptive(model);
  const double lo = cfg.contains("rate_min")
                        ? as_number(cfg.at("rate_min"), "rate_min") : 0.0;
  const double hi = cfg.contains("rate_max")
                        ? as_number(cfg.at("rate_max"), "rate_max") : cap;
  const long points = cfg.contains("rate_points")
                          ? as_integer(cfg.at("rate_points"), "rate_points") : 50;
  if (points < 1) throw ConfigError("rate_points", "must be >= 1");
  if (!(lo >= 0.0 && hi <= cap + 1e-12 && lo <= hi)) {
    throw ConfigError("rate_min", "grid must lie within [0, C(p[0])]");
  }
  std::vector<double> rates;
  for (long i = 0; i < points; ++i) {
    rates.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
  }
  return rates;
}

// Curve (b) support: rebuild the empirical decision-feedback curve either
// inline or from a previously written sweep CSV of forney rows.
ExponentCurve empirical_from_inline(const json& inline_cfg, const json& root) {
  json merged = root;
  for (auto it = inline_cfg.begin(); it != inline_cfg.end(); ++it) merged[it.key()] = it.value();
  const int n = static_cast<int>(as_integer(require(merged, "N"), "empirical.N"));
  const double rate = as_number(require(merged, "R"), "empirical.R");
  SearchParams params = params_from_config(merged, n, rate, false, 0.0);
  const std::vector<double> ts =
      number_list(require(merged, "thresholds"), "empirical.thresholds");
  const long trials = as_integer(require(merged, "trials"), "empirical.trials");
  const std::uint64_t seed = require_seed(merged);
  return empirical_forney_curve(params, ts, trials, seed, workers_of(merged));
}

ExponentCurve empirical_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open empirical sweep csv " + path);
  std::string header;
  std::getline(in, header);
  std::map<std::string, int> col;
  {
    std::stringstream ss(header);
    std::string name;
    int i = 0;
    while (std::getline(ss, name, ',')) col[name] = i++;
  }
  for (const char* need : {"strategy", "N", "R", "failures", "eps_hat",
                           "erasure_rate", "trials"}) {
    if (!col.count(need)) {
      throw std::runtime_error("empirical sweep csv lacks column " +
                               std::string(need));
    }
  }
  ExponentCurve curve;
  curve.id = CurveId::DecisionFeedbackEmpirical;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> f;
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f[col["strategy"]] != "forney") continue;
    const double n = std::stod(f[col["N"]]);
    const double r = std::stod(f[col["R"]]);
    const double eps = std::stod(f[col["eps_hat"]]);
    const double erasure = std::stod(f[col["erasure_rate"]]);
    const long failures = std::stol(f[col["failures"]]);
    const long trials = std::stol(f[col["trials"]]);
    const double eps_eff = eps > 0.0 ? eps : 1.0 / static_cast<double>(trials);
    curve.points.push_back({r * (1.0 - erasure), -std::log2(eps_eff) / n});
    curve.reliable.push_back(failures >= 10);
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const RatePoint& a, const RatePoint& b) { return a.rate < b.rate; });
  return curve;
}

}  // namespace

void cmd_curves(const json& cfg, std::ostream& log) {
  const NoiseModel model = parse_model(cfg);
  const std::vector<double> rates = rate_grid(cfg, model);
  const std::string path = out_path(cfg);

  ExponentCurve empirical;
  bool have_empirical = false;
  if (cfg.contains("empirical")) {
    empirical = empirical_from_inline(cfg.at("empirical"), cfg);
    have_empirical = true;
  } else if (cfg.contains("empirical_csv")) {
    empirical = empirical_from_csv(as_string(cfg.at("empirical_csv"),
                                             "empirical_csv"));
    have_empirical = true;
  }

  const InputOptimum opt = optimal_q(model, 1.0);
  if (opt.multiple_maxima) {
    log << "curves: note: the input-mass objective has well-separated "
           "near-maximal points; q*=" << format_fixed(opt.q_star)
        << " is the largest\n";
  }
  const std::vector<ExponentCurve> curves =
      curve_bundle(model, rates, have_empirical ? &empirical : nullptr);

  std::ostringstream out;
  out << "curve_id,R,E\n";
  for (const auto& c : curves) {
    for (const auto& pt : c.points) {
      out << curve_id_name(c.id) << ',' << format_fixed(pt.rate) << ','
          << format_fixed(pt.exponent) << '\n';
    }
  }
  write_file(path, out.str());
  log << "curves: wrote " << curves.size() << " curves x " << rates.size()
      << " rates to " << path << "\n";
}

// ---------------------------------------------------------------------------
// simulate & sweep
// ---------------------------------------------------------------------------

namespace {

struct Cell {
  StrategyKind kind;
  int n_queries;
  double rate;
  double threshold;
};

std::string cell_key(StrategyKind kind, const SearchParams& params, long trials,
                     std::uint64_t seed) {
  std::ostringstream key;
  const double lambda = kind == StrategyKind::YamamotoItoh ||
                                kind == StrategyKind::TwoPhase
                            ? params.resolved_lambda(kind)
                            : 0.0;
  key << strategy_name(kind) << ',' << kappa_mode_name(params.kappa_mode) << ','
      << params.n_queries << ',' << format_fixed(params.rate) << ','
      << format_fixed(params.delta) << ',' << format_fixed(params.threshold)
      << ',' << format_fixed(lambda) << ',' << format_fixed(params.alpha) << ','
      << trials << ',' << seed;
  return key.str();
}

std::string key_of_row(const std::string& row) {
  // first 9 fields + the final seed field
  std::vector<std::string> f;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() < 18) return row;
  std::ostringstream key;
  for (int i = 0; i < 9; ++i) key << f[i] << ',';
  key << f[17];
  return key.str();
}

}  // namespace

void cmd_simulate(const json& cfg, std::ostream& log) {
  const int n = static_cast<int>(as_integer(require(cfg, "N"), "N"));
  const bool use_delta = !cfg.contains("R") && cfg.contains("delta");
  const double rr = use_delta ? as_number(cfg.at("delta"), "delta")
                              : as_number(require(cfg, "R"), "R");
  const double threshold =
      cfg.contains("T") ? as_number(cfg.at("T"), "T") : 0.0;
  SearchParams params = params_from_config(cfg, n, rr, use_delta, threshold);
  const StrategyKind kind =
      parse_strategy(as_string(require(cfg, "strategy"), "strategy"));
  const long trials = as_integer(require(cfg, "trials"), "trials");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  const std::uint64_t seed = require_seed(cfg);
  try {
    params.validate(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params", e.what());
  }

  const SweepStats stats = monte_carlo(kind, params, trials, seed, workers_of(cfg));
  write_file(out_path(cfg),
             stats_csv_header() + "\n" +
                 stats_csv_row(kind, params, trials, stats) + "\n");

  log << "simulate: " << strategy_name(kind) << " " << kappa_mode_name(params.kappa_mode)
      << "-velocity N=" << params.n_queries << " R=" << format_fixed(params.rate)
      << " delta=" << format_fixed(params.delta) << "\n"
      << "  eps_hat=" << format_fixed(stats.eps_hat) << " ["
      << format_fixed(stats.ci_lo) << ", " << format_fixed(stats.ci_hi)
      << "]  mean_tau=" << format_fixed(stats.mean_tau)
      << "  retries_mean=" << format_fixed(stats.retries_mean)
      << "  repeat_rate=" << format_fixed(stats.erasure_rate) << "\n"
      << "  strict-velocity failures: " << stats.strict_velocity_failures << "/"
      << stats.trials << "  cap_hits=" << stats.cap_hits
      << "  oversize_columns=" << stats.oversize_columns << "\n";
}

void cmd_sweep(const json& cfg, std::ostream& log) {
  const std::vector<int> ns = integer_list(require(cfg, "N"), "N");
  const std::vector<double> rates = number_list(require(cfg, "R"), "R");
  const std::vector<double> thresholds =
      cfg.contains("T") ? number_list(cfg.at("T"), "T") : std::vector<double>{0.0};
  std::vector<std::string> strategies;
  {
    const json& s = require(cfg, "strategy");
    if (s.is_array()) {
      for (const auto& x : s) strategies.push_back(as_string(x, "strategy"));
    } else {
      strategies.push_back(as_string(s, "strategy"));
    }
  }
  const long trials = as_integer(require(cfg, "trials"), "trials");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  const std::uint64_t seed = require_seed(cfg);
  const std::string path = out_path(cfg);
  const int workers = workers_of(cfg);

  // resume: reuse any cell already present under the same key
  std::map<std::string, std::string> rows;
  {
    std::ifstream in(path);
    if (in) {
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (!line.empty()) rows[key_of_row(line)] = line;
      }
    }
  }

  long computed = 0, reused = 0;
  for (const std::string& sname : strategies) {
    const StrategyKind kind = parse_strategy(sname);
    for (int n : ns) {
      for (double r : rates) {
        for (double t : thresholds) {
          SearchParams params = params_from_config(cfg, n, r, false, t);
          try {
            params.validate(kind);
          } catch (const std::invalid_argument& e) {
            throw ConfigError("params", e.what());
          }
          const std::string key = cell_key(kind, params, trials, seed);
          if (rows.count(key)) {
            ++reused;
            continue;
          }
          const SweepStats stats = monte_carlo(kind, params, trials, seed, workers);
          rows[key] = stats_csv_row(kind, params, trials, stats);
          ++computed;
        }
      }
    }
  }

  std::ostringstream out;
  out << stats_csv_header() << "\n";
  for (const auto& [key, row] : rows) out << row << "\n";
  write_file(path, out.str());
  log << "sweep: " << computed << " cells computed, " << reused
      << " reused, written to " << path << "\n";
}

// ---------------------------------------------------------------------------
// trajectories
// ---------------------------------------------------------------------------

void cmd_trajectories(const json& cfg, std::ostream& log) {
  const int n = static_cast<int>(as_integer(require(cfg, "N"), "N"));
  int m = 0;
  if (cfg.contains("M")) {
    m = static_cast<int>(as_integer(cfg.at("M"), "M"));
  } else if (cfg.contains("delta")) {
    const double delta = as_number(cfg.at("delta"), "delta");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0,1)");
    m = static_cast<int>(std::ceil(n / delta - 1e-9));
  } else {
    throw ConfigError("M", "need M or delta");
  }
  if (m < 1 || n < 1) throw ConfigError("M", "need M >= 1 and N >= 1");

  const bool known =
      cfg.contains("kappa_mode") &&
      parse_kappa_mode(as_string(cfg.at("kappa_mode"), "kappa_mode")) ==
          KappaMode::KnownVelocity;
  const double grid_w = cfg.contains("grid_w")
                            ? as_number(cfg.at("grid_w"), "grid_w")
                            : 1.0 / (4.0 * m);
  const double grid_v = known ? 0.0
                        : cfg.contains("grid_v")
                            ? as_number(cfg.at("grid_v"), "grid_v")
                            : 1.0 / (4.0 * m * n);
  const std::size_t cap =
      cfg.contains("cap") ? static_cast<std::size_t>(as_integer(cfg.at("cap"), "cap"))
                          : (std::size_t{1} << 22);

  const TrajectoryTable table = enumerate_trajectories(n, m, grid_w, grid_v, cap);

  std::ostringstream out;
  out << "seq_id,w0_rep,v_rep,bins\n";
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& e = table.entries[i];
    out << i << ',' << format_fixed(e.w0_rep) << ',' << format_fixed(e.v_rep)
        << ',';
    for (std::size_t k = 0; k < e.seq.size(); ++k) {
      if (k) out << ';';
      out << e.seq[k];
    }
    out << '\n';
  }
  write_file(out_path(cfg), out.str());

  // growth of the distinct count with the horizon at this M (doubling fit)
  double exponent = std::numeric_limits<double>::quiet_NaN();
  if (!known && n >= 4) {
    std::vector<double> lx, ly;
    for (int h = 2; h <= n; h *= 2) {
      const TrajectoryTable t =
          enumerate_trajectories(h, m, grid_w, 1.0 / (4.0 * m * h), cap);
      lx.push_back(std::log2(static_cast<double>(h)));
      ly.push_back(std::log2(static_cast<double>(t.entries.size())));
    }
    const std::size_t k = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
      sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
    }
    exponent = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  }
  log << "trajectories: count=" << table.entries.size() << " M=" << m
      << " N=" << n << " growth_exponent=" << exponent << "\n";
}

}  // namespace mdsearch::cli
