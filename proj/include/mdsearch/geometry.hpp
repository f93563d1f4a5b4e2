#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mdsearch {

// Positions and velocities live on the unit-circumference circle, reduced
// modulo 1 into [0, 1).

double wrap01(double x);

// Angular distance min(|a-b|, 1-|a-b|), at most 1/2.
double cyclic_distance(double a, double b);

// Position after n steps: (w0 + v*n) mod 1.
double advance(double w0, double v, long n);

// Index of the half-open bin [m/M, (m+1)/M) containing w; w in [0, 1).
int bin_index(double w, int bins);

// Bin sequence traced by (w0, v) at times n = 1..horizon over an
// equi-partition of the circle into `bins` cells.
struct Trajectory {
  double w0 = 0.0;
  double v = 0.0;
  int bins = 1;                  // partition size
  std::vector<std::int32_t> seq;  // seq[n-1] = bin at time n
};

Trajectory trajectory_of(double w0, double v, int horizon, int bins);

// Two motion parameters are close at resolution (delta, horizon) when the
// initial positions are within delta and the velocities within delta/horizon.
bool is_close(double w0, double v, double w0p, double vp, double delta,
              int horizon);

// Deduplicated table of all distinct bin sequences hit by a fine sweep of
// the (w0, v) torus. Representative = first grid point (lexicographic in
// (w0, v)) that produced the sequence; entries sorted by sequence.
struct TrajectoryTable {
  int horizon = 0;
  int bins = 0;
  double grid_w = 0.0;
  double grid_v = 0.0;
  struct Entry {
    std::vector<std::int32_t> seq;
    double w0_rep = 0.0;
    double v_rep = 0.0;
  };
  std::vector<Entry> entries;
};

// Thrown when the distinct-sequence count exceeds the configured cap; carries
// the partial count seen so far.
class TableCapExceeded : public std::runtime_error {
 public:
  TableCapExceeded(std::size_t count, std::size_t cap);
  std::size_t count;
  std::size_t cap;
};

// Sweeps w0 over multiples of grid_w and v over multiples of grid_v
// (grid_v == 0 means the single velocity 0, i.e. known-velocity rows).
// Requires grid_w <= 1/(2*bins) and grid_v <= 1/(2*bins*horizon) so the sweep
// is fine enough to hit every trajectory cell of meaningful size.
TrajectoryTable enumerate_trajectories(int horizon, int bins, double grid_w,
                                       double grid_v, std::size_t cap);

// Number of times n in 1..horizon where the two motions occupy the same
// point (cyclic distance zero within 1e-12).
int count_line_intersections(double w0, double v, double w0p, double vp,
                             int horizon);

}  // namespace mdsearch
