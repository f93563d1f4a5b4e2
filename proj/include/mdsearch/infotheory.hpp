#pragma once

#include <span>
#include <string>
#include <vector>

#include "mdsearch/noise.hpp"

namespace mdsearch {

// All rates and exponents are in bits per query (logs base 2).

double binary_entropy(double p);

// I(X;Y) for X ~ Bern(q) through a BSC with crossover p.
double mutual_info(double q, double p);

// Shannon capacity 1 - h(p) of a BSC(p).
double capacity(double p);

// Relative entropy D(p || 1-p) between the channel's two output laws;
// the zero-rate intercept of the variable-length feedback exponent.
// Returns +infinity at p = 0.
double c1(double p);

// Gallager's E0 for a BSC(p) with input prior Bern(q).
double gallager_e0(double rho, double q, double p);

// max over rho in [0,1] of E0(rho, q, p) - rho * rate / kappa, clamped at 0.
double random_coding_exponent(double rate, double q, double p, double kappa);

struct InputOptimum {
  double q_star = 0.0;        // maximizer of I(q, p[q]) over (0, 1/2]
  double rate = 0.0;          // kappa * I(q_star, p[q_star])
  bool multiple_maxima = false;  // grid found well-separated near-ties
};

// Maximal targeting rate of the one-shot search and its optimal input mass.
// kappa = 1 for known velocity, 1/2 for unknown velocity.
InputOptimum optimal_q(const NoiseModel& model, double kappa);

// Capacity of the least noisy channel, C(p[0]).
double max_rate_adaptive(const NoiseModel& model);

// Validated-search exponent line C1(p[0]) * (1 - R / (kappa * I(q*, p[q*]))),
// clamped at 0 past its rate intercept. +infinity when p[0] = 0.
double yi_nonadaptive_exponent(double rate, const NoiseModel& model, double kappa);

// Same line with intercept C(p[0]) instead: C1(p[0]) * (1 - R / C(p[0])).
double yi_adaptive_exponent(double rate, const NoiseModel& model);

// C1(p) * (1 - R / C(p)), the variable-length feedback exponent of a BSC(p).
double burnashev_exponent(double rate, double p);

struct RatePoint {
  double rate = 0.0;
  double exponent = 0.0;
};

enum class CurveId {
  RandomCoding,
  DecisionFeedbackEmpirical,
  BurnashevQstar,
  YiNonadaptive,
  YiAdaptive,
};

const char* curve_id_name(CurveId id);

struct ExponentCurve {
  CurveId id = CurveId::RandomCoding;
  std::vector<RatePoint> points;
  // Per-point reliability flags for empirical curves; empty means all
  // points are trustworthy.
  std::vector<bool> reliable;
  double q_star = 0.0;
  double kappa = 1.0;
};

// Analytic exponent curves over the given rate grid (known velocity):
// random coding, the feedback bound for the search channel at input q*,
// the validated non-adaptive line, and the adaptive line. An empirical
// decision-feedback curve is appended when supplied.
std::vector<ExponentCurve> curve_bundle(const NoiseModel& model,
                                        std::span<const double> rates,
                                        const ExponentCurve* empirical = nullptr);

}  // namespace mdsearch
