#pragma once

#include <utility>
#include <vector>

#include "mdsearch/rng.hpp"

namespace mdsearch {

enum class NoiseKind { Constant, Linear, Table };

// Measurement noise profile: maps the measure s of the probed set to the
// crossover probability of the binary channel the observation passes through.
// The profile is continuous and monotone non-decreasing on (0, 1/2], with a
// continuous extension at s = 0 (used by the adaptive-limit formulas).
//
// Values are allowed up to 1/2 inclusive so the numeric routines can probe
// the useless-channel limit; strategies that need a working channel validate
// this separately.
class NoiseModel {
 public:
  static NoiseModel constant(double p0);
  static NoiseModel linear(double p0, double p_half);
  // Piecewise-linear interpolation through (measure, probability) knots,
  // anchored at (0, first knot value), constant beyond the last knot.
  static NoiseModel table(std::vector<std::pair<double, double>> knots);

  // Crossover probability at probed measure s; throws std::domain_error
  // unless s in (0, 1/2].
  double at(double s) const;

  // Continuous extension p[0+].
  double at_zero() const { return p0_; }
  double at_half() const { return phalf_; }

  NoiseKind kind() const { return kind_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  // Profile of a search restricted to an interval of the given width:
  // s (relative measure) -> p[s * width].
  NoiseModel zoomed(double width) const;

 private:
  NoiseModel() = default;

  NoiseKind kind_ = NoiseKind::Constant;
  double p0_ = 0.0;
  double phalf_ = 0.0;
  std::vector<std::pair<double, double>> knots_;  // Table only
};

// Evaluates p[s]; free-function form of NoiseModel::at.
double noise_at(const NoiseModel& model, double s);

// One pass of x through a binary symmetric channel with crossover p.
// Consumes exactly one draw from rng.
int sample_bsc(double p, int x, Rng& rng);

}  // namespace mdsearch
