#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdsearch/geometry.hpp"

namespace mdsearch {

// A measurable subset of the circle stored as sorted, disjoint, half-open
// pieces [lo, hi) with 0 <= lo < hi <= 1. Wrapping input arcs are split at
// the seam; adjacent pieces are merged.
class ArcSet {
 public:
  struct Arc {
    double lo = 0.0;
    double hi = 0.0;
  };

  ArcSet() = default;

  // Single arc from lo to hi going clockwise; lo > hi wraps through 0.
  // lo == hi yields the empty set; use full() for the whole circle.
  static ArcSet interval(double lo, double hi);
  static ArcSet full();
  // Canonicalizes an arbitrary collection (sorting, splitting, merging).
  static ArcSet from_arcs(const std::vector<Arc>& arcs);

  double measure() const;
  bool contains(double w) const;
  ArcSet complement() const;
  ArcSet rotated(double r) const;
  bool empty() const { return pieces_.empty(); }
  const std::vector<Arc>& pieces() const { return pieces_; }

 private:
  std::vector<Arc> pieces_;
};

double measure(const ArcSet& s);
bool contains(const ArcSet& s, double w);

// If the set's measure exceeds 1/2, returns its complement and flip = true;
// the caller XORs flip into the clean bit so the probed measure stays <= 1/2
// without changing the observed statistic.
std::pair<ArcSet, bool> normalize_halfplus(const ArcSet& s);

// M x N binary array drawn i.i.d. Bern(q); rows are bin codewords, columns
// are per-query bin masks. Bit layout is row-major, little-endian within
// 64-bit words.
struct Codebook {
  int rows = 0;
  int cols = 0;
  double q = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> words;   // rows * words_per_row
  std::vector<std::int32_t> col_ones;  // ones count per column

  int words_per_row() const { return (cols + 63) / 64; }
  int bit(int row, int col) const {
    const std::uint64_t w = words[static_cast<std::size_t>(row) * words_per_row() +
                                  (col >> 6)];
    return static_cast<int>((w >> (col & 63)) & 1u);
  }
  const std::uint64_t* row_words(int row) const {
    return words.data() + static_cast<std::size_t>(row) * words_per_row();
  }
  // Fraction of bins probed by column `col` (measure of the raw query set).
  double column_measure(int col) const {
    return static_cast<double>(col_ones[col]) / rows;
  }
};

// Reproducible draw: one rng draw per bit, row-major order.
Codebook draw_codebook(int rows, int cols, double q, std::uint64_t seed,
                       std::size_t bit_cap = std::size_t{1} << 30);

// Random rotation applied to every query set: offset + drift * n.
struct Dither {
  double offset = 0.0;  // uniform in [0, 1)
  double drift = 0.0;   // uniform in [0, 1)
};

// Query set at 1-based time n: union of the bins whose column bit is 1,
// rotated by offset + drift * n.
ArcSet query_set(const Codebook& cb, const Dither& d, int n);

// Bits read along a trajectory: bit n is cb[seq[n], n].
std::vector<std::uint8_t> trajectory_codeword(const Codebook& cb,
                                              const Trajectory& t);

// Binary file I/O: header (magic, rows, cols, q, seed) then row-major packed
// bits, little-endian within bytes, rows padded to whole bytes.
void save_codebook(const Codebook& cb, const std::string& path);
Codebook load_codebook(const std::string& path);

}  // namespace mdsearch
