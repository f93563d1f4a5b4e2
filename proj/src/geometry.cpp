#include "mdsearch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>

namespace mdsearch {

double wrap01(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r = 0.0;  // guard against rounding at the seam
  return r;
}

double cyclic_distance(double a, double b) {
  const double d = std::fabs(wrap01(a) - wrap01(b));
  return std::min(d, 1.0 - d);
}

double advance(double w0, double v, long n) {
  return wrap01(wrap01(w0) + wrap01(v) * static_cast<double>(n));
}

int bin_index(double w, int bins) {
  if (bins < 1) throw std::invalid_argument("bin_index: bins must be >= 1");
  const int m = static_cast<int>(wrap01(w) * bins);
  return std::min(m, bins - 1);
}

Trajectory trajectory_of(double w0, double v, int horizon, int bins) {
  if (horizon < 1) throw std::invalid_argument("trajectory_of: horizon must be >= 1");
  Trajectory t;
  t.w0 = wrap01(w0);
  t.v = wrap01(v);
  t.bins = bins;
  t.seq.resize(horizon);
  for (int n = 1; n <= horizon; ++n) {
    t.seq[n - 1] = bin_index(advance(t.w0, t.v, n), bins);
  }
  return t;
}

bool is_close(double w0, double v, double w0p, double vp, double delta,
              int horizon) {
  if (!(delta > 0.0) || horizon < 1) {
    throw std::invalid_argument("is_close: need delta > 0 and horizon >= 1");
  }
  return cyclic_distance(w0, w0p) <= delta &&
         cyclic_distance(v, vp) <= delta / horizon;
}

TableCapExceeded::TableCapExceeded(std::size_t count_, std::size_t cap_)
    : std::runtime_error("trajectory table cap exceeded: " +
                         std::to_string(count_) + " distinct sequences > cap " +
                         std::to_string(cap_)),
      count(count_),
      cap(cap_) {}

TrajectoryTable enumerate_trajectories(int horizon, int bins, double grid_w,
                                       double grid_v, std::size_t cap) {
  if (horizon < 1 || bins < 1) {
    throw std::invalid_argument("enumerate_trajectories: bad horizon/bins");
  }
  if (!(grid_w > 0.0) || grid_w > 1.0 / (2.0 * bins) + 1e-15) {
    throw std::invalid_argument(
        "enumerate_trajectories: grid_w must be positive and <= 1/(2*bins)");
  }
  if (grid_v < 0.0 ||
      (grid_v > 0.0 && grid_v > 1.0 / (2.0 * bins * horizon) + 1e-15)) {
    throw std::invalid_argument(
        "enumerate_trajectories: grid_v must be 0 (known velocity) or <= "
        "1/(2*bins*horizon)");
  }

  const std::size_t nw = static_cast<std::size_t>(std::ceil(1.0 / grid_w - 1e-9));
  const std::size_t nv =
      grid_v == 0.0 ? 1
                    : static_cast<std::size_t>(std::ceil(1.0 / grid_v - 1e-9));

  TrajectoryTable table;
  table.horizon = horizon;
  table.bins = bins;
  table.grid_w = grid_w;
  table.grid_v = grid_v;

  std::unordered_map<std::string, std::size_t> seen;
  std::string key(sizeof(std::int32_t) * horizon, '\0');
  std::vector<std::int32_t> seq(horizon);

  for (std::size_t iw = 0; iw < nw; ++iw) {
    const double w0 = iw * grid_w;
    for (std::size_t iv = 0; iv < nv; ++iv) {
      const double v = iv * grid_v;
      for (int n = 1; n <= horizon; ++n) {
        seq[n - 1] = bin_index(advance(w0, v, n), bins);
      }
      std::memcpy(key.data(), seq.data(), key.size());
      auto [it, inserted] = seen.emplace(key, table.entries.size());
      if (inserted) {
        if (table.entries.size() >= cap) {
          throw TableCapExceeded(table.entries.size() + 1, cap);
        }
        table.entries.push_back({seq, w0, v});
      }
    }
  }

  std::sort(table.entries.begin(), table.entries.end(),
            [](const TrajectoryTable::Entry& a, const TrajectoryTable::Entry& b) {
              return a.seq < b.seq;
            });
  return table;
}

int count_line_intersections(double w0, double v, double w0p, double vp,
                             int horizon) {
  if (horizon < 1) {
    throw std::invalid_argument("count_line_intersections: horizon must be >= 1");
  }
  int count = 0;
  for (int n = 1; n <= horizon; ++n) {
    if (cyclic_distance(advance(w0, v, n), advance(w0p, vp, n)) <= 1e-12) {
      ++count;
    }
  }
  return count;
}

}  // namespace mdsearch
