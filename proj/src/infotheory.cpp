#include "mdsearch/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace mdsearch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_range(double x, double lo, double hi, const char* what) {
  if (!(x >= lo && x <= hi)) {
    throw std::domain_error(std::string(what) + ": argument out of range");
  }
}

// Golden-section maximization of a unimodal-enough f on [a, b] to the given
// abscissa tolerance. Used as the refinement step after a coarse grid scan.
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double xtol) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - (b - a) * inv_phi;
  double d = a + (b - a) * inv_phi;
  double fc = f(c);
  double fd = f(d);
  while (b - a > xtol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_phi;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_phi;
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Coarse grid (step ~1e-4) then golden refinement to 1e-6. Ties on the grid
// go to the larger abscissa. Returns the argmax.
double grid_then_golden_max(const std::function<double(double)>& f, double lo,
                            double hi, int grid_points) {
  double best_x = lo;
  double best_v = f(lo);
  for (int i = 1; i < grid_points; ++i) {
    const double x = lo + (hi - lo) * i / (grid_points - 1);
    const double v = f(x);
    if (v >= best_v) {
      best_v = v;
      best_x = x;
    }
  }
  const double step = (hi - lo) / (grid_points - 1);
  const double a = std::max(lo, best_x - step);
  const double b = std::min(hi, best_x + step);
  const double refined = golden_max(f, a, b, 1e-6);
  if (f(refined) > best_v) return refined;
  return best_x;
}

}  // namespace

double binary_entropy(double p) {
  check_range(p, 0.0, 1.0, "binary_entropy");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double mutual_info(double q, double p) {
  check_range(q, 0.0, 1.0, "mutual_info");
  check_range(p, 0.0, 0.5, "mutual_info");
  const double out = q * (1.0 - p) + (1.0 - q) * p;
  return binary_entropy(out) - binary_entropy(p);
}

double capacity(double p) {
  check_range(p, 0.0, 0.5, "capacity");
  return 1.0 - binary_entropy(p);
}

double c1(double p) {
  check_range(p, 0.0, 0.5, "c1");
  if (p == 0.0) return kInf;
  return (1.0 - 2.0 * p) * std::log2((1.0 - p) / p);
}

double gallager_e0(double rho, double q, double p) {
  check_range(rho, 0.0, 1.0, "gallager_e0");
  if (!(q > 0.0 && q < 1.0)) {
    throw std::domain_error("gallager_e0: input mass must lie in (0, 1)");
  }
  check_range(p, 0.0, 0.5, "gallager_e0");
  if (rho == 0.0 || p == 0.5) return 0.0;
  const double s = 1.0 / (1.0 + rho);
  const double a = std::pow(1.0 - p, s);
  const double b = std::pow(p, s);
  const double y0 = std::pow((1.0 - q) * a + q * b, 1.0 + rho);
  const double y1 = std::pow((1.0 - q) * b + q * a, 1.0 + rho);
  return -std::log2(y0 + y1);
}

double random_coding_exponent(double rate, double q, double p, double kappa) {
  if (!(rate >= 0.0)) {
    throw std::domain_error("random_coding_exponent: rate must be >= 0");
  }
  const double rr = rate / kappa;
  auto objective = [&](double rho) { return gallager_e0(rho, q, p) - rho * rr; };
  const double rho_star = grid_then_golden_max(objective, 0.0, 1.0, 10001);
  return std::max(0.0, objective(rho_star));
}

InputOptimum optimal_q(const NoiseModel& model, double kappa) {
  auto objective = [&](double q) { return mutual_info(q, model.at(q)); };

  constexpr int kGrid = 5000;  // step 1e-4 over (0, 1/2]
  double best_q = 0.0;
  double best_v = -1.0;
  std::vector<double> near_best;
  for (int i = 1; i <= kGrid; ++i) {
    const double q = 0.5 * i / kGrid;
    const double v = objective(q);
    if (v >= best_v) {
      best_v = v;
      best_q = q;
    }
  }
  for (int i = 1; i <= kGrid; ++i) {
    const double q = 0.5 * i / kGrid;
    if (best_v - objective(q) <= 1e-12) near_best.push_back(q);
  }

  const double step = 0.5 / kGrid;
  const double a = std::max(step * 0.5, best_q - step);
  const double b = std::min(0.5, best_q + step);
  const double refined = golden_max(objective, a, b, 1e-6);

  double q_star = best_q;
  double v_star = best_v;
  if (objective(refined) > v_star) {
    q_star = refined;
    v_star = objective(refined);
  }

  InputOptimum opt;
  opt.q_star = q_star;
  opt.rate = kappa * v_star;
  opt.multiple_maxima =
      near_best.size() > 1 && (near_best.back() - near_best.front()) > 10 * step;
  return opt;
}

double max_rate_adaptive(const NoiseModel& model) {
  return capacity(model.at_zero());
}

namespace {

double validated_line(double rate, double zero_intercept, double rate_intercept) {
  if (rate < 0.0) throw std::domain_error("exponent line: rate must be >= 0");
  if (rate >= rate_intercept) return 0.0;
  if (std::isinf(zero_intercept)) return kInf;
  return zero_intercept * (1.0 - rate / rate_intercept);
}

}  // namespace

double yi_nonadaptive_exponent(double rate, const NoiseModel& model, double kappa) {
  const InputOptimum opt = optimal_q(model, kappa);
  return validated_line(rate, c1(model.at_zero()), opt.rate);
}

double yi_adaptive_exponent(double rate, const NoiseModel& model) {
  const double p0 = model.at_zero();
  return validated_line(rate, c1(p0), capacity(p0));
}

double burnashev_exponent(double rate, double p) {
  check_range(p, 0.0, 0.5, "burnashev_exponent");
  return validated_line(rate, c1(p), capacity(p));
}

const char* curve_id_name(CurveId id) {
  switch (id) {
    case CurveId::RandomCoding: return "random_coding";
    case CurveId::DecisionFeedbackEmpirical: return "decision_feedback_empirical";
    case CurveId::BurnashevQstar: return "burnashev_qstar";
    case CurveId::YiNonadaptive: return "yi_nonadaptive";
    case CurveId::YiAdaptive: return "yi_adaptive";
  }
  return "unknown";
}

std::vector<ExponentCurve> curve_bundle(const NoiseModel& model,
                                        std::span<const double> rates,
                                        const ExponentCurve* empirical) {
  const double rate_cap = max_rate_adaptive(model);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] >= 0.0 && rates[i] <= rate_cap + 1e-12)) {
      throw std::domain_error("curve_bundle: rates must lie in [0, C(p[0])]");
    }
    if (i > 0 && rates[i] < rates[i - 1]) {
      throw std::domain_error("curve_bundle: rate grid must be sorted");
    }
  }

  const InputOptimum opt = optimal_q(model, 1.0);
  const double p_search = model.at(opt.q_star);
  const double intercept_zero = c1(model.at_zero());

  std::vector<ExponentCurve> curves;
  auto make = [&](CurveId id, auto&& eval) {
    ExponentCurve c;
    c.id = id;
    c.q_star = opt.q_star;
    c.kappa = 1.0;
    c.points.reserve(rates.size());
    for (double r : rates) c.points.push_back({r, eval(r)});
    curves.push_back(std::move(c));
  };

  make(CurveId::RandomCoding, [&](double r) {
    return random_coding_exponent(r, opt.q_star, p_search, 1.0);
  });
  // Feedback bound for the search channel itself: input pinned at q*, so the
  // rate intercept is I(q*, p[q*]) rather than the unconstrained capacity.
  make(CurveId::BurnashevQstar, [&](double r) {
    return validated_line(r, c1(p_search), opt.rate);
  });
  make(CurveId::YiNonadaptive, [&](double r) {
    return validated_line(r, intercept_zero, opt.rate);
  });
  make(CurveId::YiAdaptive, [&](double r) {
    return validated_line(r, intercept_zero, rate_cap);
  });
  if (empirical != nullptr) {
    ExponentCurve c = *empirical;
    c.id = CurveId::DecisionFeedbackEmpirical;
    curves.push_back(std::move(c));
  }
  return curves;
}

}  // namespace mdsearch
