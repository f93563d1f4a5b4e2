#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mdsearch/coding.hpp"
#include "mdsearch/geometry.hpp"
#include "mdsearch/infotheory.hpp"
#include "mdsearch/noise.hpp"
#include "mdsearch/rng.hpp"

namespace mdsearch {

enum class KappaMode { KnownVelocity, UnknownVelocity };
enum class StrategyKind { Nonadaptive, Forney, YamamotoItoh, TwoPhase };

const char* kappa_mode_name(KappaMode mode);
const char* strategy_name(StrategyKind kind);

struct SearchParams {
  int n_queries = 0;      // queries per search attempt
  double delta = 0.0;     // target resolution; delta = 2^{-N R} when derived
  double rate = 0.0;      // bits per query
  KappaMode kappa_mode = KappaMode::UnknownVelocity;
  double eps_slack = 0.02;  // concentration slack for the assumed channel
  double threshold = 0.0;   // erasure-test threshold (bits/query)
  double lambda = -1.0;     // validation fraction; < 0 picks the default
  double alpha = 0.1;       // first-phase resolution of the two-phase scheme
  double eta = -1.0;        // typicality slack; < 0 picks the default
  int max_retries = 32;
  NoiseModel model = NoiseModel::constant(0.0);

  double kappa() const {
    return kappa_mode == KappaMode::KnownVelocity ? 1.0 : 0.5;
  }

  static SearchParams from_rate(int n_queries, double rate, KappaMode mode,
                                NoiseModel model);
  static SearchParams from_delta(int n_queries, double delta, KappaMode mode,
                                 NoiseModel model);

  // Field-qualified std::invalid_argument on any violation; checks the
  // constraints the given strategy actually relies on.
  void validate(StrategyKind strategy) const;

  double resolved_lambda(StrategyKind strategy) const;
  double resolved_eta() const;
};

struct TrialOutcome {
  double w_hat = 0.0;
  double v_hat = 0.0;
  double w_true_at_tau = 0.0;
  double v_true = 0.0;
  bool success = false;  // max{|w_hat - w_tau|_c, |v_hat - v|_c} <= delta
  bool success_strict_velocity = false;  // velocity also within delta/N
  long tau = 0;
  int retries = 0;
  int erasures = 0;  // repeat events: erased attempts / rejected validations
  bool retry_cap_hit = false;
  bool decode_tie = false;
  int oversize_columns = 0;     // probed measure above q*+eps (logged, not fixed)
  double max_zoom_measure = 0;  // largest phase-2 query measure (two-phase)
};

struct SweepStats {
  long trials = 0;
  long failures = 0;
  double eps_hat = 0.0;
  double ci_lo = 0.0;  // Wilson 95%
  double ci_hi = 1.0;
  double mean_tau = 0.0;
  double sd_tau = 0.0;
  double retries_mean = 0.0;
  double erasure_rate = 0.0;  // repeat events per attempt
  std::uint64_t seed = 0;
  // diagnostics beyond the CSV schema
  long strict_velocity_failures = 0;
  long attempts = 0;
  long cap_hits = 0;
  long oversize_columns = 0;
  double max_zoom_measure = 0.0;
  // repeat events among first attempts only: an estimator of the per-attempt
  // repeat probability that is independent of the tau bookkeeping, so the
  // renewal identity can be checked against it without circularity
  long first_attempt_repeats = 0;
};

std::pair<double, double> wilson_interval(long successes, long n);

// One query against a target at w_n: clean bit = membership xor flip, passed
// through the channel at the probed measure. Empty sets probe at p[0+].
int run_query(double w_n, const ArcSet& s, bool flip, const NoiseModel& model,
              Rng& rng);

// --- decoding over an explicit trajectory table (desk scale) ---

struct DecodeOutcome {
  std::size_t index = 0;  // table entry (lowest index on ties)
  int distance = 0;
  int margin = 0;  // second-best distance minus best
  bool tie = false;
};

// Minimum-Hamming-distance decode, the ML rule for any assumed crossover
// below 1/2.
DecodeOutcome ml_decode(const TrajectoryTable& table, const Codebook& cb,
                        std::span<const std::uint8_t> y, double p_assumed);

// Erasure decode: declares the best entry only when its likelihood beats the
// sum of all the others by 2^{N*threshold}; nullopt = erasure.
std::optional<DecodeOutcome> forney_decode(const TrajectoryTable& table,
                                           const Codebook& cb,
                                           std::span<const std::uint8_t> y,
                                           double p_assumed, double threshold);

// --- streaming decoders used by the strategies ---
// Same candidate families as the enumerated table at grid (1/(2M), 1/(2MN)),
// evaluated without materializing the table.

struct RowDecodeResult {
  int row = 0;
  int distance = 0;
  int second = 0;
  bool tie = false;
};

RowDecodeResult decode_rows(const Codebook& cb, std::span<const std::uint8_t> y,
                            std::vector<long>* dist_hist = nullptr);

struct GridDecodeResult {
  long w_index = 0;  // w0 = w_index / (2M)
  long v_index = 0;  // v  = v_index / (2MN)
  double w0 = 0.0;
  double v = 0.0;
  int distance = 0;
  long candidates = 0;
};

GridDecodeResult decode_grid(const Codebook& cb, std::span<const std::uint8_t> y,
                             std::vector<long>* dist_hist = nullptr);

// log2 of P(y|best) over the summed likelihood of every other candidate in
// the distance histogram; +inf when there are no competitors.
double forney_log2_ratio(const std::vector<long>& dist_hist, int best_distance,
                         double p_assumed, int n_queries);

// Typicality validation: probes a delta-interval tracking the estimated
// motion for `rounds` queries; ACCEPT iff the ones fraction reaches
// 1 - p[delta] - eta. Positions are advanced from the given start points.
bool yi_validate(double est_w_start, double est_v, double delta, int rounds,
                 double eta, const NoiseModel& model, double true_w_start,
                 double true_v, Rng& rng);

// --- strategies ---
// truth = (w0, v); the per-trial seed feeds labeled sub-streams for the
// codebook, dither, noise, and validation draws of each attempt.

TrialOutcome strategy_nonadaptive(const SearchParams& params, double w0,
                                  double v, std::uint64_t trial_seed);
TrialOutcome strategy_forney(const SearchParams& params, double w0, double v,
                             std::uint64_t trial_seed);
TrialOutcome strategy_yi(const SearchParams& params, double w0, double v,
                         std::uint64_t trial_seed);
TrialOutcome strategy_two_phase(const SearchParams& params, double w0, double v,
                                std::uint64_t trial_seed);

TrialOutcome run_strategy(StrategyKind kind, const SearchParams& params,
                          double w0, double v, std::uint64_t trial_seed);

// Runs `trials` independent trials with uniform truth; reproducible and
// worker-count invariant (per-trial derived seeds, index-ordered reduction).
SweepStats monte_carlo(StrategyKind kind, const SearchParams& params,
                       long trials, std::uint64_t master_seed, int workers = 0);

// Empirical decision-feedback exponent: single-attempt erasure decoding at
// each threshold, reporting -log2(error-given-declaration)/N against the
// effective rate R*(1 - erasure rate). Points with fewer than 10 observed
// errors are flagged unreliable.
ExponentCurve empirical_forney_curve(const SearchParams& params,
                                     std::span<const double> thresholds,
                                     long trials, std::uint64_t master_seed,
                                     int workers = 0);

}  // namespace mdsearch
