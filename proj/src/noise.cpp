#include "mdsearch/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mdsearch {

namespace {

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 0.5)) {
    throw std::invalid_argument(std::string(what) +
                                ": crossover probability must be in [0, 1/2]");
  }
}

}  // namespace

NoiseModel NoiseModel::constant(double p0) {
  check_prob(p0, "NoiseModel::constant");
  NoiseModel m;
  m.kind_ = NoiseKind::Constant;
  m.p0_ = p0;
  m.phalf_ = p0;
  return m;
}

NoiseModel NoiseModel::linear(double p0, double p_half) {
  check_prob(p0, "NoiseModel::linear");
  check_prob(p_half, "NoiseModel::linear");
  if (p_half < p0) {
    throw std::invalid_argument(
        "NoiseModel::linear: profile must be non-decreasing (p_half >= p0)");
  }
  NoiseModel m;
  m.kind_ = NoiseKind::Linear;
  m.p0_ = p0;
  m.phalf_ = p_half;
  return m;
}

NoiseModel NoiseModel::table(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) {
    throw std::invalid_argument("NoiseModel::table: need at least one knot");
  }
  double prev_s = 0.0;
  double prev_p = -1.0;
  bool first = true;
  for (const auto& [s, p] : knots) {
    if (!(s > 0.0 && s <= 0.5)) {
      throw std::invalid_argument(
          "NoiseModel::table: knot measures must lie in (0, 1/2]");
    }
    if (!first && s <= prev_s) {
      throw std::invalid_argument(
          "NoiseModel::table: knot measures must be strictly increasing");
    }
    check_prob(p, "NoiseModel::table");
    if (p < prev_p) {
      throw std::invalid_argument(
          "NoiseModel::table: knot probabilities must be non-decreasing");
    }
    prev_s = s;
    prev_p = p;
    first = false;
  }
  NoiseModel m;
  m.kind_ = NoiseKind::Table;
  m.knots_ = std::move(knots);
  m.p0_ = m.knots_.front().second;  // constant extension left of first knot
  m.phalf_ = m.at(0.5);
  return m;
}

double NoiseModel::at(double s) const {
  if (!(s > 0.0 && s <= 0.5)) {
    throw std::domain_error("NoiseModel::at: measure must lie in (0, 1/2]");
  }
  switch (kind_) {
    case NoiseKind::Constant:
      return p0_;
    case NoiseKind::Linear:
      return p0_ + (phalf_ - p0_) * (s / 0.5);
    case NoiseKind::Table: {
      if (s <= knots_.front().first) return knots_.front().second;
      if (s >= knots_.back().first) return knots_.back().second;
      auto it = std::upper_bound(
          knots_.begin(), knots_.end(), s,
          [](double v, const std::pair<double, double>& k) { return v < k.first; });
      const auto& [s1, p1] = *it;
      const auto& [s0, p0] = *(it - 1);
      const double t = (s - s0) / (s1 - s0);
      return p0 + t * (p1 - p0);
    }
  }
  return p0_;  // unreachable
}

NoiseModel NoiseModel::zoomed(double width) const {
  if (!(width > 0.0 && width <= 1.0)) {
    throw std::invalid_argument("NoiseModel::zoomed: width must be in (0, 1]");
  }
  switch (kind_) {
    case NoiseKind::Constant:
      return *this;
    case NoiseKind::Linear: {
      // p[s*width] is linear in s with endpoint value at s = 1/2.
      NoiseModel m;
      m.kind_ = NoiseKind::Linear;
      m.p0_ = p0_;
      m.phalf_ = p0_ + (phalf_ - p0_) * width;
      return m;
    }
    case NoiseKind::Table: {
      std::vector<std::pair<double, double>> scaled;
      for (const auto& [s, p] : knots_) {
        const double rs = s / width;
        if (rs > 0.5) break;
        scaled.emplace_back(rs, p);
      }
      // Make sure the profile is defined out to s = 1/2.
      const double edge = at(std::min(0.5, 0.5 * width));
      if (scaled.empty() || scaled.back().first < 0.5) {
        scaled.emplace_back(0.5, edge);
      }
      return table(std::move(scaled));
    }
  }
  return *this;  // unreachable
}

double noise_at(const NoiseModel& model, double s) { return model.at(s); }

int sample_bsc(double p, int x, Rng& rng) {
  const bool flip = rng.bernoulli(p);
  return flip ? (1 - x) : x;
}

}  // namespace mdsearch
