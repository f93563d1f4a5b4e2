#include "mdsearch/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <bit>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace mdsearch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Hamming decoding needs an assumed crossover strictly below 1/2; useless
// channels are clamped just under it.
constexpr double kMaxAssumed = 0.5 - 1e-9;
// Work cap for the streaming grid decoder (bytes touched per decode).
constexpr double kGridWorkCap = 1.2e10;

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw std::invalid_argument(field + ": " + msg);
}

double mod_width(double x, double width) {
  double r = x - width * std::floor(x / width);
  if (r >= width) r = 0.0;
  return r;
}

}  // namespace

const char* kappa_mode_name(KappaMode mode) {
  return mode == KappaMode::KnownVelocity ? "known" : "unknown";
}

const char* strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Nonadaptive: return "nonadaptive";
    case StrategyKind::Forney: return "forney";
    case StrategyKind::YamamotoItoh: return "yamamoto_itoh";
    case StrategyKind::TwoPhase: return "two_phase";
  }
  return "unknown";
}

SearchParams SearchParams::from_rate(int n_queries, double rate, KappaMode mode,
                                     NoiseModel model) {
  SearchParams p;
  p.n_queries = n_queries;
  p.rate = rate;
  p.delta = std::exp2(-static_cast<double>(n_queries) * rate);
  p.kappa_mode = mode;
  p.model = std::move(model);
  return p;
}

SearchParams SearchParams::from_delta(int n_queries, double delta, KappaMode mode,
                                      NoiseModel model) {
  SearchParams p;
  p.n_queries = n_queries;
  p.delta = delta;
  p.rate = std::log2(1.0 / delta) / n_queries;
  p.kappa_mode = mode;
  p.model = std::move(model);
  return p;
}

double SearchParams::resolved_lambda(StrategyKind strategy) const {
  if (lambda >= 0.0) return lambda;
  if (strategy == StrategyKind::TwoPhase) return 0.8;
  if (strategy == StrategyKind::YamamotoItoh) {
    const InputOptimum opt = optimal_q(model, 1.0);
    return opt.rate / rate - 1.0;
  }
  return 0.0;
}

double SearchParams::resolved_eta() const {
  if (eta > 0.0) return eta;
  const double pd = model.at(std::min(delta, 0.5));
  return (0.5 - pd) / 4.0;
}

void SearchParams::validate(StrategyKind strategy) const {
  if (n_queries < 1) config_error("n_queries", "must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) config_error("delta", "must lie in (0, 1)");
  if (!(rate > 0.0)) config_error("rate", "must be > 0");
  if (threshold < 0.0) config_error("threshold", "must be >= 0");
  if (!(alpha > 0.0 && alpha < 0.5)) config_error("alpha", "must lie in (0, 1/2)");
  if (max_retries < 1) config_error("max_retries", "must be >= 1");
  if (eps_slack < 0.0) config_error("eps_slack", "must be >= 0");

  const bool uses_validation = strategy == StrategyKind::YamamotoItoh ||
                               strategy == StrategyKind::TwoPhase;
  if (uses_validation) {
    if (delta > 0.5) {
      config_error("delta", "validation probes a delta-interval; need delta <= 1/2");
    }
    const double pd = model.at(delta);
    if (pd >= 0.5) {
      config_error("model", "validation needs a working channel at measure delta "
                            "(p[delta] < 1/2)");
    }
    const double e = resolved_eta();
    if (!(e > 0.0 && e < 0.5 - pd)) {
      config_error("eta", "must lie in (0, 1/2 - p[delta])");
    }
  }
  if (strategy == StrategyKind::YamamotoItoh) {
    const double lam = resolved_lambda(strategy);
    if (!(lam > 0.0)) {
      config_error("lambda",
                   "must be positive; the default I(q*,p[q*])/R - 1 requires "
                   "R below the one-shot rate");
    }
  }
  if (strategy == StrategyKind::TwoPhase) {
    if (kappa_mode != KappaMode::KnownVelocity) {
      config_error("kappa_mode", "two-phase search requires known velocity");
    }
    const double lam = resolved_lambda(strategy);
    if (!(lam > 0.0 && lam < 1.0)) config_error("lambda", "must lie in (0, 1)");
    const int l1 = static_cast<int>(std::llround(std::log2(n_queries)));
    if (l1 < 1) config_error("n_queries", "round(log2 N) must be >= 1");
    const int l2 = static_cast<int>(std::llround(lam * n_queries)) - l1;
    if (l2 < 1) config_error("lambda", "second-phase length lambda*N - log2(N) "
                                       "must be >= 1");
    const int lv = n_queries - l1 - l2;
    if (lv < 1) config_error("lambda", "validation length (1-lambda)*N must be >= 1");
    if (delta >= alpha) config_error("delta", "two-phase needs delta < alpha");
  }
}

std::pair<double, double> wilson_interval(long successes, long n) {
  if (n <= 0) return {0.0, 1.0};
  const double z = 1.959964;
  const double z2 = z * z;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double rad =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - rad), std::min(1.0, center + rad)};
}

int run_query(double w_n, const ArcSet& s, bool flip, const NoiseModel& model,
              Rng& rng) {
  const double meas = s.measure();
  if (meas > 0.5 + 1e-12) {
    throw std::invalid_argument("run_query: probed measure must be <= 1/2");
  }
  const int x = static_cast<int>(s.contains(w_n)) ^ static_cast<int>(flip);
  const double p = meas > 0.0 ? model.at(std::min(meas, 0.5)) : model.at_zero();
  return sample_bsc(p, x, rng);
}

// ---------------------------------------------------------------------------
// decoding
// ---------------------------------------------------------------------------

DecodeOutcome ml_decode(const TrajectoryTable& table, const Codebook& cb,
                        std::span<const std::uint8_t> y, double p_assumed) {
  if (table.entries.empty()) throw std::invalid_argument("ml_decode: empty table");
  if (!(p_assumed >= 0.0 && p_assumed < 0.5)) {
    throw std::domain_error("ml_decode: assumed crossover must lie in [0, 1/2)");
  }
  if (table.bins != cb.rows || table.horizon != cb.cols ||
      static_cast<int>(y.size()) != cb.cols) {
    throw std::invalid_argument("ml_decode: dimension mismatch");
  }
  DecodeOutcome out;
  int best = std::numeric_limits<int>::max();
  int second = std::numeric_limits<int>::max();
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    const auto& seq = table.entries[k].seq;
    int d = 0;
    for (int n = 0; n < cb.cols; ++n) d += cb.bit(seq[n], n) != y[n];
    if (d < best) {
      second = best;
      best = d;
      out.index = k;
      out.tie = false;
    } else if (d < second) {
      second = d;
      if (d == best) out.tie = true;
    } else if (d == best) {
      out.tie = true;
    }
  }
  out.distance = best;
  out.margin = table.entries.size() > 1 ? second - best : 0;
  return out;
}

double forney_log2_ratio(const std::vector<long>& dist_hist, int best_distance,
                         double p_assumed, int n_queries) {
  (void)n_queries;
  std::vector<long> rest = dist_hist;
  if (best_distance >= static_cast<int>(rest.size()) || rest[best_distance] < 1) {
    throw std::invalid_argument("forney_log2_ratio: histogram lacks the best entry");
  }
  rest[best_distance] -= 1;
  long total = 0;
  for (long c : rest) total += c;
  if (total == 0) return kInf;

  if (p_assumed == 0.0) {
    // Only distance-0 candidates carry likelihood.
    if (best_distance > 0) return -kInf;
    return rest[0] > 0 ? -std::log2(static_cast<double>(rest[0])) : kInf;
  }
  const double beta = std::log2(p_assumed / (1.0 - p_assumed));  // < 0
  int dmin = -1;
  for (std::size_t d = 0; d < rest.size(); ++d) {
    if (rest[d] > 0) { dmin = static_cast<int>(d); break; }
  }
  const double m = beta * dmin;
  double sum = 0.0;
  for (std::size_t d = dmin; d < rest.size(); ++d) {
    if (rest[d] > 0) sum += rest[d] * std::exp2(beta * static_cast<double>(d) - m);
  }
  const double log_denom = m + std::log2(sum);
  return beta * best_distance - log_denom;
}

std::optional<DecodeOutcome> forney_decode(const TrajectoryTable& table,
                                           const Codebook& cb,
                                           std::span<const std::uint8_t> y,
                                           double p_assumed, double threshold) {
  if (threshold < 0.0) {
    throw std::domain_error("forney_decode: threshold must be >= 0");
  }
  const DecodeOutcome best = ml_decode(table, cb, y, p_assumed);
  if (best.tie) return std::nullopt;  // a tied maximum can never pass

  std::vector<long> hist(cb.cols + 1, 0);
  for (const auto& e : table.entries) {
    int d = 0;
    for (int n = 0; n < cb.cols; ++n) d += cb.bit(e.seq[n], n) != y[n];
    ++hist[d];
  }
  const double ratio = forney_log2_ratio(hist, best.distance, p_assumed, cb.cols);
  if (ratio >= cb.cols * threshold) return best;
  return std::nullopt;
}

RowDecodeResult decode_rows(const Codebook& cb, std::span<const std::uint8_t> y,
                            std::vector<long>* dist_hist) {
  const int wpr = cb.words_per_row();
  std::vector<std::uint64_t> yw(wpr, 0);
  for (int n = 0; n < cb.cols; ++n) {
    if (y[n]) yw[n >> 6] |= (std::uint64_t{1} << (n & 63));
  }
  if (dist_hist) dist_hist->assign(cb.cols + 1, 0);

  RowDecodeResult res;
  int best = std::numeric_limits<int>::max();
  int second = std::numeric_limits<int>::max();
  for (int r = 0; r < cb.rows; ++r) {
    const std::uint64_t* w = cb.row_words(r);
    int d = 0;
    for (int k = 0; k < wpr; ++k) d += std::popcount(w[k] ^ yw[k]);
    if (dist_hist) ++(*dist_hist)[d];
    if (d < best) {
      second = best;
      best = d;
      res.row = r;
      res.tie = false;
    } else if (d == best) {
      res.tie = true;
      second = std::min(second, d);
    } else if (d < second) {
      second = d;
    }
  }
  res.distance = best;
  res.second = cb.rows > 1 ? second : best;
  return res;
}

GridDecodeResult decode_grid(const Codebook& cb, std::span<const std::uint8_t> y,
                             std::vector<long>* dist_hist) {
  const int m = cb.rows;
  const int n_q = cb.cols;
  if (n_q > 250) {
    throw std::runtime_error("decode_grid: horizon too long for byte counters");
  }
  const long gw = 2L * m;
  const long gv = 2L * m * n_q;
  if (static_cast<double>(gw) * gv * (n_q + 2) > kGridWorkCap) {
    throw std::runtime_error(
        "decode_grid: candidate grid too large (" + std::to_string(gw) + " x " +
        std::to_string(gv) + "); reduce N or the resolution");
  }

  // Mismatch patterns upsampled to the half-bin grid: pat[n][t] says whether
  // the codebook bit of bin floor(t/2) disagrees with y at time n.
  std::vector<std::uint8_t> pat(static_cast<std::size_t>(n_q) * gw);
  for (int n = 0; n < n_q; ++n) {
    std::uint8_t* p = pat.data() + static_cast<std::size_t>(n) * gw;
    for (int b = 0; b < m; ++b) {
      const std::uint8_t mm = static_cast<std::uint8_t>(cb.bit(b, n) != y[n]);
      p[2 * b] = mm;
      p[2 * b + 1] = mm;
    }
  }

  if (dist_hist) dist_hist->assign(n_q + 1, 0);
  std::vector<std::uint8_t> acc(gw);
  GridDecodeResult res;
  int best = std::numeric_limits<int>::max();

  for (long j = 0; j < gv; ++j) {
    std::memset(acc.data(), 0, acc.size());
    for (int n = 1; n <= n_q; ++n) {
      const std::uint8_t* p = pat.data() + static_cast<std::size_t>(n - 1) * gw;
      // v = j/(2MN) makes the time-n shift exactly floor(j*n/N) half-bins.
      const long s = (j * n / n_q) % gw;
      const long head = gw - s;
      std::uint8_t* a = acc.data();
      for (long i = 0; i < head; ++i) a[i] += p[i + s];
      for (long i = head; i < gw; ++i) a[i] += p[i - head];
    }
    if (dist_hist) {
      for (long i = 0; i < gw; ++i) ++(*dist_hist)[acc[i]];
    }
    for (long i = 0; i < gw; ++i) {
      if (acc[i] < best) {
        best = acc[i];
        res.w_index = i;
        res.v_index = j;
      }
    }
  }
  res.distance = best;
  res.w0 = static_cast<double>(res.w_index) / gw;
  res.v = static_cast<double>(res.v_index) / gv;
  res.candidates = gw * gv;
  return res;
}

bool yi_validate(double est_w_start, double est_v, double delta, int rounds,
                 double eta, const NoiseModel& model, double true_w_start,
                 double true_v, Rng& rng) {
  if (rounds < 1) throw std::invalid_argument("yi_validate: rounds must be >= 1");
  const double pd = model.at(std::min(delta, 0.5));
  if (!(eta > 0.0 && eta < 0.5 - pd)) {
    throw std::invalid_argument("yi_validate: eta must lie in (0, 1/2 - p[delta])");
  }
  long ones = 0;
  for (int r = 1; r <= rounds; ++r) {
    const double lo = wrap01(advance(est_w_start, est_v, r) - 0.5 * delta);
    const ArcSet interval = ArcSet::interval(lo, lo + delta);
    ones += run_query(advance(true_w_start, true_v, r), interval, false, model, rng);
  }
  const double frac = static_cast<double>(ones) / rounds;
  return frac >= 1.0 - pd - eta - 1e-12;
}

// ---------------------------------------------------------------------------
// strategy execution
// ---------------------------------------------------------------------------

namespace {

// Static layout of one search phase: partition size, input mass and the
// decoder's assumed channel, computed once per strategy context.
struct PhasePlan {
  int len = 0;
  int bins = 0;
  double width = 1.0;     // interval width this phase searches
  double q_star = 0.0;    // input mass (relative to the interval)
  double p_top = 0.0;     // channel the observations are topped up to
  double p_assumed = 0.0; // decoder's assumed crossover (< 1/2)
  double top_up_rel = 0.0;  // relative-measure threshold q* + eps
};

PhasePlan plan_phase(const NoiseModel& model, int len, double resolution_rel,
                     double width, double eps_slack) {
  PhasePlan plan;
  plan.len = len;
  plan.bins = static_cast<int>(std::ceil(len / resolution_rel - 1e-9));
  plan.width = width;
  const NoiseModel eff = width < 1.0 ? model.zoomed(width) : model;
  plan.q_star = optimal_q(eff, 1.0).q_star;
  plan.top_up_rel = std::min(0.5, plan.q_star + eps_slack);
  plan.p_top = eff.at(plan.top_up_rel);
  plan.p_assumed = std::min(plan.p_top, kMaxAssumed);
  return plan;
}

struct AttemptResult {
  double est_w0 = 0.0;  // estimated position at the attempt's local time 0
  double est_v = 0.0;
  double est_stat = 0.0;  // stationary-frame coordinate (known velocity)
  int distance = 0;
  bool tie = false;
  int oversize = 0;
  double max_measure = 0.0;
  std::vector<long> dist_hist;
};

struct TruthState {
  double w0 = 0.0;  // position at global time 0
  double v = 0.0;
};

// Runs the `plan.len` queries of one non-adaptive attempt starting at global
// time clock0 and decodes. Known velocity derotates by track_v and decodes
// rows; unknown velocity decodes over the (w0, v) candidate grid.
AttemptResult run_attempt(const PhasePlan& plan, const NoiseModel& model,
                          KappaMode mode, double domain_lo, double track_v,
                          const TruthState& truth, long clock0,
                          std::uint64_t attempt_seed, bool want_hist) {
  const int n_q = plan.len;
  const int m = plan.bins;
  const Codebook cb =
      draw_codebook(m, n_q, plan.q_star, derive_seed(attempt_seed, "codebook"));
  Rng dither_rng(derive_seed(attempt_seed, "dither"));
  Rng noise_rng(derive_seed(attempt_seed, "noise"));
  const double offset = dither_rng.uniform01() * plan.width;
  const double drift =
      mode == KappaMode::UnknownVelocity ? dither_rng.uniform01() : 0.0;

  AttemptResult res;
  std::vector<std::uint8_t> y(n_q);
  for (int n = 1; n <= n_q; ++n) {
    const long t = clock0 + n;
    const double w_t = advance(truth.w0, truth.v, t);

    int x_raw = 0;
    if (mode == KappaMode::UnknownVelocity) {
      const double z = wrap01(w_t - offset - drift * n);
      x_raw = cb.bit(bin_index(z, m), n - 1);
    } else {
      const double r = wrap01(w_t - advance(0.0, track_v, t) - domain_lo);
      if (r < plan.width) {
        const double z = mod_width(r - offset, plan.width);
        const int b = std::min(m - 1, static_cast<int>(z * m / plan.width));
        x_raw = cb.bit(b, n - 1);
      }
    }

    const double meas_abs = cb.column_measure(n - 1) * plan.width;
    const bool flip = meas_abs > 0.5;
    const int x = x_raw ^ static_cast<int>(flip);
    const double probed = flip ? 1.0 - meas_abs : meas_abs;
    res.max_measure = std::max(res.max_measure, probed);

    const double p_ch = probed > 0.0 ? model.at(std::min(probed, 0.5))
                                     : model.at_zero();
    int bit = sample_bsc(p_ch, x, noise_rng);
    const double probed_rel = probed / plan.width;
    if (probed_rel < plan.top_up_rel) {
      // concentration slack: raise the channel to the assumed level
      if (p_ch < plan.p_top && p_ch < 0.5) {
        const double p_aux = (plan.p_top - p_ch) / (1.0 - 2.0 * p_ch);
        bit = sample_bsc(p_aux, bit, noise_rng);
      }
    } else if (probed_rel > plan.top_up_rel) {
      ++res.oversize;
    }
    // the flip is a known function of the column; undo it so the decoder
    // sees the membership bit through the channel
    y[n - 1] = static_cast<std::uint8_t>(bit ^ static_cast<int>(flip));
  }

  if (mode == KappaMode::UnknownVelocity) {
    GridDecodeResult g = decode_grid(cb, y, want_hist ? &res.dist_hist : nullptr);
    res.est_w0 = wrap01(g.w0 + offset);
    res.est_v = wrap01(g.v + drift);
    res.distance = g.distance;
  } else {
    RowDecodeResult r = decode_rows(cb, y, want_hist ? &res.dist_hist : nullptr);
    const double z_hat = static_cast<double>(r.row) * plan.width / m;
    res.est_stat = wrap01(domain_lo + mod_width(z_hat + offset, plan.width));
    res.est_w0 = advance(res.est_stat, track_v, clock0);
    res.est_v = track_v;
    res.distance = r.distance;
    res.tie = r.tie;
  }
  return res;
}

struct StrategyContext {
  StrategyKind kind = StrategyKind::Nonadaptive;
  SearchParams params;
  PhasePlan main;              // the search phase (all strategies)
  PhasePlan zoom;              // two-phase second phase
  int len1 = 0, len2 = 0, len_validate = 0;
  double lambda = 0.0;
  double eta = 0.0;
  int yi_rounds = 0;
};

StrategyContext make_context(StrategyKind kind, const SearchParams& params) {
  params.validate(kind);
  StrategyContext ctx;
  ctx.kind = kind;
  ctx.params = params;

  switch (kind) {
    case StrategyKind::Nonadaptive:
    case StrategyKind::Forney:
      ctx.main = plan_phase(params.model, params.n_queries, params.delta, 1.0,
                            params.eps_slack);
      break;
    case StrategyKind::YamamotoItoh:
      ctx.main = plan_phase(params.model, params.n_queries, params.delta, 1.0,
                            params.eps_slack);
      ctx.lambda = params.resolved_lambda(kind);
      ctx.eta = params.resolved_eta();
      ctx.yi_rounds = std::max(
          1, static_cast<int>(std::llround(ctx.lambda * params.n_queries)));
      break;
    case StrategyKind::TwoPhase: {
      ctx.lambda = params.resolved_lambda(kind);
      ctx.eta = params.resolved_eta();
      ctx.len1 = static_cast<int>(std::llround(std::log2(params.n_queries)));
      ctx.len2 =
          static_cast<int>(std::llround(ctx.lambda * params.n_queries)) - ctx.len1;
      ctx.len_validate = params.n_queries - ctx.len1 - ctx.len2;
      ctx.main = plan_phase(params.model, ctx.len1, params.alpha, 1.0,
                            params.eps_slack);
      ctx.zoom = plan_phase(params.model, ctx.len2, params.delta / params.alpha,
                            params.alpha, params.eps_slack);
      break;
    }
  }
  return ctx;
}

TrialOutcome finish_outcome(const StrategyContext& ctx, const TruthState& truth,
                            double est_w0_local, double est_v, long local_elapsed,
                            long tau, TrialOutcome out) {
  out.tau = tau;
  out.v_hat = est_v;
  out.v_true = truth.v;
  out.w_hat = advance(est_w0_local, est_v, local_elapsed);
  out.w_true_at_tau = advance(truth.w0, truth.v, tau);
  const double dw = cyclic_distance(out.w_hat, out.w_true_at_tau);
  const double dv = cyclic_distance(out.v_hat, out.v_true);
  out.success = std::max(dw, dv) <= ctx.params.delta;
  out.success_strict_velocity =
      out.success && dv <= ctx.params.delta / ctx.params.n_queries;
  return out;
}

TrialOutcome run_trial(const StrategyContext& ctx, double w0, double v,
                       std::uint64_t trial_seed) {
  const SearchParams& prm = ctx.params;
  const TruthState truth{wrap01(w0), wrap01(v)};
  const double track_v =
      prm.kappa_mode == KappaMode::KnownVelocity ? truth.v : 0.0;
  TrialOutcome out;

  switch (ctx.kind) {
    case StrategyKind::Nonadaptive: {
      const AttemptResult a =
          run_attempt(ctx.main, prm.model, prm.kappa_mode, 0.0, track_v, truth,
                      0, derive_seed(trial_seed, "attempt", 0), false);
      out.decode_tie = a.tie;
      out.oversize_columns = a.oversize;
      return finish_outcome(ctx, truth, a.est_w0, a.est_v, prm.n_queries,
                            prm.n_queries, out);
    }

    case StrategyKind::Forney: {
      long clock = 0;
      for (int k = 0; k < prm.max_retries; ++k) {
        const AttemptResult a = run_attempt(
            ctx.main, prm.model, prm.kappa_mode, 0.0, track_v, truth, clock,
            derive_seed(trial_seed, "attempt", k), true);
        clock += prm.n_queries;
        out.oversize_columns += a.oversize;
        const bool declare =
            !a.tie &&
            forney_log2_ratio(a.dist_hist, a.distance, ctx.main.p_assumed,
                              prm.n_queries) >= prm.n_queries * prm.threshold;
        if (declare) {
          out.retries = k;
          return finish_outcome(ctx, truth, a.est_w0, a.est_v, prm.n_queries,
                                clock, out);
        }
        ++out.erasures;
        if (k == prm.max_retries - 1) {
          // cap exhausted: fall back to the plain ML estimate of this attempt
          out.retries = k;
          out.retry_cap_hit = true;
          out.decode_tie = a.tie;
          return finish_outcome(ctx, truth, a.est_w0, a.est_v, prm.n_queries,
                                clock, out);
        }
      }
      break;
    }

    case StrategyKind::YamamotoItoh: {
      long clock = 0;
      for (int k = 0; k < prm.max_retries; ++k) {
        const std::uint64_t attempt_seed = derive_seed(trial_seed, "attempt", k);
        const AttemptResult a =
            run_attempt(ctx.main, prm.model, prm.kappa_mode, 0.0, track_v, truth,
                        clock, attempt_seed, false);
        out.oversize_columns += a.oversize;
        const long search_end = clock + prm.n_queries;
        Rng validate_rng(derive_seed(attempt_seed, "validate"));
        const bool accept = yi_validate(
            advance(a.est_w0, a.est_v, prm.n_queries), a.est_v, prm.delta,
            ctx.yi_rounds, ctx.eta, prm.model,
            advance(truth.w0, truth.v, search_end), truth.v, validate_rng);
        clock = search_end + ctx.yi_rounds;
        if (accept || k == prm.max_retries - 1) {
          out.retries = k;
          if (!accept) {
            ++out.erasures;
            out.retry_cap_hit = true;
          }
          return finish_outcome(ctx, truth, a.est_w0, a.est_v,
                                prm.n_queries + ctx.yi_rounds, clock, out);
        }
        ++out.erasures;
      }
      break;
    }

    case StrategyKind::TwoPhase: {
      long clock = 0;
      for (int k = 0; k < prm.max_retries; ++k) {
        const std::uint64_t attempt_seed = derive_seed(trial_seed, "attempt", k);
        // coarse phase: resolution alpha over the whole circle
        const AttemptResult a1 = run_attempt(
            ctx.main, prm.model, KappaMode::KnownVelocity, 0.0, track_v, truth,
            clock, derive_seed(attempt_seed, "phase1"), false);
        out.oversize_columns += a1.oversize;
        // zoomed phase: searches the alpha-interval around the coarse estimate
        const double region_lo = wrap01(a1.est_stat +
                                        0.5 * ctx.main.width / ctx.main.bins -
                                        0.5 * prm.alpha);
        const AttemptResult a2 = run_attempt(
            ctx.zoom, prm.model, KappaMode::KnownVelocity, region_lo, track_v,
            truth, clock + ctx.len1, derive_seed(attempt_seed, "phase2"), false);
        out.oversize_columns += a2.oversize;
        out.max_zoom_measure = std::max(out.max_zoom_measure, a2.max_measure);

        const long search_end = clock + ctx.len1 + ctx.len2;
        Rng validate_rng(derive_seed(attempt_seed, "validate"));
        const bool accept = yi_validate(
            advance(a2.est_stat, track_v, search_end), track_v, prm.delta,
            ctx.len_validate, ctx.eta, prm.model,
            advance(truth.w0, truth.v, search_end), truth.v, validate_rng);
        clock = search_end + ctx.len_validate;
        if (accept || k == prm.max_retries - 1) {
          out.retries = k;
          if (!accept) {
            ++out.erasures;
            out.retry_cap_hit = true;
          }
          const double est_w0_local = advance(a2.est_stat, track_v, clock);
          // local_elapsed 0: est_w0_local already sits at the final clock
          return finish_outcome(ctx, truth, est_w0_local, track_v, 0, clock, out);
        }
        ++out.erasures;
      }
      break;
    }
  }
  throw std::logic_error("run_trial: unreachable");
}

}  // namespace

TrialOutcome strategy_nonadaptive(const SearchParams& params, double w0,
                                  double v, std::uint64_t trial_seed) {
  return run_trial(make_context(StrategyKind::Nonadaptive, params), w0, v,
                   trial_seed);
}

TrialOutcome strategy_forney(const SearchParams& params, double w0, double v,
                             std::uint64_t trial_seed) {
  return run_trial(make_context(StrategyKind::Forney, params), w0, v, trial_seed);
}

TrialOutcome strategy_yi(const SearchParams& params, double w0, double v,
                         std::uint64_t trial_seed) {
  return run_trial(make_context(StrategyKind::YamamotoItoh, params), w0, v,
                   trial_seed);
}

TrialOutcome strategy_two_phase(const SearchParams& params, double w0, double v,
                                std::uint64_t trial_seed) {
  return run_trial(make_context(StrategyKind::TwoPhase, params), w0, v,
                   trial_seed);
}

TrialOutcome run_strategy(StrategyKind kind, const SearchParams& params,
                          double w0, double v, std::uint64_t trial_seed) {
  return run_trial(make_context(kind, params), w0, v, trial_seed);
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

namespace {

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_trials(long trials, int workers, Fn&& per_trial) {
  const int nw = std::min<long>(resolve_workers(workers), trials);
  if (nw <= 1) {
    for (long t = 0; t < trials; ++t) per_trial(t);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int i = 0; i < nw; ++i) {
    pool.emplace_back([&] {
      for (;;) {
        const long t = next.fetch_add(1, std::memory_order_relaxed);
        if (t >= trials) return;
        per_trial(t);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

SweepStats monte_carlo(StrategyKind kind, const SearchParams& params,
                       long trials, std::uint64_t master_seed, int workers) {
  if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  const StrategyContext ctx = make_context(kind, params);

  std::vector<TrialOutcome> outcomes(trials);
  parallel_trials(trials, workers, [&](long t) {
    Rng truth_rng(derive_seed(master_seed, "truth", static_cast<std::uint64_t>(t)));
    const double w0 = truth_rng.uniform01();
    const double v = truth_rng.uniform01();
    outcomes[t] =
        run_trial(ctx, w0, v, derive_seed(master_seed, "trial",
                                          static_cast<std::uint64_t>(t)));
  });

  SweepStats st;
  st.trials = trials;
  st.seed = master_seed;
  double tau_sum = 0.0, tau_sq = 0.0;
  long retries_total = 0, erasures_total = 0;
  for (const TrialOutcome& o : outcomes) {
    if (!o.success) ++st.failures;
    if (!o.success_strict_velocity) ++st.strict_velocity_failures;
    tau_sum += static_cast<double>(o.tau);
    tau_sq += static_cast<double>(o.tau) * o.tau;
    retries_total += o.retries;
    erasures_total += o.erasures;
    st.attempts += o.retries + 1;
    st.cap_hits += o.retry_cap_hit ? 1 : 0;
    st.oversize_columns += o.oversize_columns;
    st.max_zoom_measure = std::max(st.max_zoom_measure, o.max_zoom_measure);
    if (o.retries >= 1 || (o.retry_cap_hit && o.retries == 0)) {
      ++st.first_attempt_repeats;
    }
  }
  st.eps_hat = static_cast<double>(st.failures) / trials;
  std::tie(st.ci_lo, st.ci_hi) = wilson_interval(st.failures, trials);
  st.mean_tau = tau_sum / trials;
  st.sd_tau = trials > 1 ? std::sqrt(std::max(
                               0.0, (tau_sq - trials * st.mean_tau * st.mean_tau) /
                                        (trials - 1)))
                         : 0.0;
  st.retries_mean = static_cast<double>(retries_total) / trials;
  st.erasure_rate =
      st.attempts > 0 ? static_cast<double>(erasures_total) / st.attempts : 0.0;
  return st;
}

ExponentCurve empirical_forney_curve(const SearchParams& params,
                                     std::span<const double> thresholds,
                                     long trials, std::uint64_t master_seed,
                                     int workers) {
  const StrategyContext ctx = make_context(StrategyKind::Forney, params);

  struct TrialRecord {
    double log2_ratio = 0.0;
    bool tie = false;
    bool success = false;
  };
  std::vector<TrialRecord> recs(trials);
  parallel_trials(trials, workers, [&](long t) {
    Rng truth_rng(derive_seed(master_seed, "truth", static_cast<std::uint64_t>(t)));
    const TruthState truth{truth_rng.uniform01(), truth_rng.uniform01()};
    const double track_v =
        params.kappa_mode == KappaMode::KnownVelocity ? truth.v : 0.0;
    const std::uint64_t seed =
        derive_seed(derive_seed(master_seed, "trial", t), "attempt", 0);
    const AttemptResult a = run_attempt(ctx.main, params.model, params.kappa_mode,
                                        0.0, track_v, truth, 0, seed, true);
    TrialRecord r;
    r.tie = a.tie;
    r.log2_ratio = forney_log2_ratio(a.dist_hist, a.distance, ctx.main.p_assumed,
                                     params.n_queries);
    const double w_hat = advance(a.est_w0, a.est_v, params.n_queries);
    const double w_tau = advance(truth.w0, truth.v, params.n_queries);
    r.success =
        std::max(cyclic_distance(w_hat, w_tau),
                 cyclic_distance(a.est_v, truth.v)) <= params.delta;
    recs[t] = r;
  });

  ExponentCurve curve;
  curve.id = CurveId::DecisionFeedbackEmpirical;
  curve.q_star = ctx.main.q_star;
  curve.kappa = params.kappa();
  for (double th : thresholds) {
    long declared = 0, wrong = 0;
    for (const TrialRecord& r : recs) {
      const bool declare = !r.tie && r.log2_ratio >= params.n_queries * th;
      if (!declare) continue;
      ++declared;
      if (!r.success) ++wrong;
    }
    const double erasure_rate =
        1.0 - static_cast<double>(declared) / static_cast<double>(trials);
    const double rate_eff = params.rate * (1.0 - erasure_rate);
    double exponent = 0.0;
    if (declared > 0) {
      // zero observed errors reports the resolvable lower bound 1/declared
      const double eps = wrong > 0 ? static_cast<double>(wrong) / declared
                                   : 1.0 / static_cast<double>(declared);
      exponent = -std::log2(eps) / params.n_queries;
    }
    curve.points.push_back({rate_eff, exponent});
    curve.reliable.push_back(wrong >= 10);
  }
  // curve points sorted by rate
  std::vector<std::size_t> order(curve.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return curve.points[x].rate < curve.points[y].rate;
  });
  ExponentCurve sorted = curve;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.points[i] = curve.points[order[i]];
    sorted.reliable[i] = curve.reliable[order[i]];
  }
  return sorted;
}

}  // namespace mdsearch
