#include "mdsearch/coding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "mdsearch/rng.hpp"

namespace mdsearch {

namespace {

constexpr double kSeamEps = 1e-15;

std::vector<ArcSet::Arc> canonicalize(std::vector<ArcSet::Arc> pieces) {
  std::vector<ArcSet::Arc> flat;
  flat.reserve(pieces.size() + 1);
  for (const auto& a : pieces) {
    if (a.hi - a.lo >= 1.0) return {{0.0, 1.0}};  // covers the circle
    const double lo = wrap01(a.lo);
    const double hi = wrap01(a.hi);
    if (lo == hi) continue;  // empty piece ([x, x) is empty by convention)
    if (lo < hi) {
      flat.push_back({lo, hi});
    } else {  // wraps through 0
      flat.push_back({lo, 1.0});
      if (hi > 0.0) flat.push_back({0.0, hi});
    }
  }
  if (flat.empty()) return flat;
  std::sort(flat.begin(), flat.end(),
            [](const ArcSet::Arc& x, const ArcSet::Arc& y) { return x.lo < y.lo; });
  std::vector<ArcSet::Arc> merged;
  merged.push_back(flat.front());
  for (std::size_t i = 1; i < flat.size(); ++i) {
    if (flat[i].lo <= merged.back().hi + kSeamEps) {
      merged.back().hi = std::max(merged.back().hi, flat[i].hi);
    } else {
      merged.push_back(flat[i]);
    }
  }
  return merged;
}

}  // namespace

ArcSet ArcSet::interval(double lo, double hi) {
  ArcSet s;
  s.pieces_ = canonicalize({{lo, hi}});
  return s;
}

ArcSet ArcSet::full() {
  ArcSet s;
  s.pieces_ = {{0.0, 1.0}};
  return s;
}

ArcSet ArcSet::from_arcs(const std::vector<Arc>& arcs) {
  ArcSet s;
  s.pieces_ = canonicalize(arcs);
  return s;
}

double ArcSet::measure() const {
  double m = 0.0;
  for (const auto& a : pieces_) m += a.hi - a.lo;
  return m;
}

bool ArcSet::contains(double w) const {
  const double x = wrap01(w);
  auto it = std::upper_bound(
      pieces_.begin(), pieces_.end(), x,
      [](double v, const Arc& a) { return v < a.lo; });
  if (it == pieces_.begin()) return false;
  --it;
  return x < it->hi;
}

ArcSet ArcSet::complement() const {
  ArcSet out;
  if (pieces_.empty()) return full();
  double cursor = 0.0;
  for (const auto& a : pieces_) {
    if (a.lo > cursor) out.pieces_.push_back({cursor, a.lo});
    cursor = a.hi;
  }
  if (cursor < 1.0) out.pieces_.push_back({cursor, 1.0});
  return out;
}

ArcSet ArcSet::rotated(double r) const {
  std::vector<Arc> moved;
  moved.reserve(pieces_.size());
  const double rr = wrap01(r);
  for (const auto& a : pieces_) {
    moved.push_back({a.lo + rr, a.hi + rr});
  }
  return from_arcs(moved);
}

double measure(const ArcSet& s) { return s.measure(); }
bool contains(const ArcSet& s, double w) { return s.contains(w); }

std::pair<ArcSet, bool> normalize_halfplus(const ArcSet& s) {
  if (s.measure() <= 0.5) return {s, false};
  return {s.complement(), true};
}

Codebook draw_codebook(int rows, int cols, double q, std::uint64_t seed,
                       std::size_t bit_cap) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("draw_codebook: dimensions must be >= 1");
  }
  if (!(q > 0.0 && q <= 0.5)) {
    throw std::invalid_argument("draw_codebook: input mass must lie in (0, 1/2]");
  }
  const std::size_t bits = static_cast<std::size_t>(rows) * cols;
  if (bits > bit_cap) {
    throw std::runtime_error("draw_codebook: size cap exceeded (" +
                             std::to_string(bits) + " bits)");
  }
  Codebook cb;
  cb.rows = rows;
  cb.cols = cols;
  cb.q = q;
  cb.seed = seed;
  const int wpr = cb.words_per_row();
  cb.words.assign(static_cast<std::size_t>(rows) * wpr, 0);
  cb.col_ones.assign(cols, 0);

  Rng rng(seed);
  for (int r = 0; r < rows; ++r) {
    std::uint64_t* w = cb.words.data() + static_cast<std::size_t>(r) * wpr;
    for (int c = 0; c < cols; ++c) {
      if (rng.bernoulli(q)) {
        w[c >> 6] |= (std::uint64_t{1} << (c & 63));
        ++cb.col_ones[c];
      }
    }
  }
  return cb;
}

ArcSet query_set(const Codebook& cb, const Dither& d, int n) {
  if (n < 1 || n > cb.cols) {
    throw std::invalid_argument("query_set: time index out of range");
  }
  const int col = n - 1;
  std::vector<ArcSet::Arc> run_arcs;
  const double bin_w = 1.0 / cb.rows;
  int run_start = -1;
  for (int m = 0; m < cb.rows; ++m) {
    if (cb.bit(m, col)) {
      if (run_start < 0) run_start = m;
    } else if (run_start >= 0) {
      run_arcs.push_back({run_start * bin_w, m * bin_w});
      run_start = -1;
    }
  }
  if (run_start >= 0) run_arcs.push_back({run_start * bin_w, 1.0});
  ArcSet s = ArcSet::from_arcs(run_arcs);
  const double rot = wrap01(d.offset + d.drift * n);
  return rot == 0.0 ? s : s.rotated(rot);
}

std::vector<std::uint8_t> trajectory_codeword(const Codebook& cb,
                                              const Trajectory& t) {
  if (t.bins != cb.rows || static_cast<int>(t.seq.size()) != cb.cols) {
    throw std::invalid_argument("trajectory_codeword: dimension mismatch");
  }
  std::vector<std::uint8_t> bits(cb.cols);
  for (int n = 0; n < cb.cols; ++n) {
    bits[n] = static_cast<std::uint8_t>(cb.bit(t.seq[n], n));
  }
  return bits;
}

namespace {
constexpr char kMagic[8] = {'M', 'D', 'S', 'C', 'B', 'K', '0', '1'};
}

void save_codebook(const Codebook& cb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_codebook: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t rows = cb.rows, cols = cb.cols;
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&cols), 8);
  out.write(reinterpret_cast<const char*>(&cb.q), 8);
  out.write(reinterpret_cast<const char*>(&cb.seed), 8);
  const int row_bytes = (cb.cols + 7) / 8;
  for (int r = 0; r < cb.rows; ++r) {
    // words are little-endian on every supported target; dump prefix bytes
    out.write(reinterpret_cast<const char*>(cb.row_words(r)), row_bytes);
  }
  if (!out) throw std::runtime_error("save_codebook: write failed on " + path);
}

Codebook load_codebook(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_codebook: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("load_codebook: bad magic in " + path);
  }
  std::uint64_t rows = 0, cols = 0, seed = 0;
  double q = 0.0;
  in.read(reinterpret_cast<char*>(&rows), 8);
  in.read(reinterpret_cast<char*>(&cols), 8);
  in.read(reinterpret_cast<char*>(&q), 8);
  in.read(reinterpret_cast<char*>(&seed), 8);
  if (!in || rows == 0 || cols == 0) {
    throw std::runtime_error("load_codebook: bad header in " + path);
  }
  Codebook cb;
  cb.rows = static_cast<int>(rows);
  cb.cols = static_cast<int>(cols);
  cb.q = q;
  cb.seed = seed;
  const int wpr = cb.words_per_row();
  cb.words.assign(rows * wpr, 0);
  cb.col_ones.assign(cb.cols, 0);
  const int row_bytes = (cb.cols + 7) / 8;
  for (std::uint64_t r = 0; r < rows; ++r) {
    in.read(reinterpret_cast<char*>(cb.words.data() + r * wpr), row_bytes);
  }
  if (!in) throw std::runtime_error("load_codebook: truncated file " + path);
  for (int c = 0; c < cb.cols; ++c) {
    for (int r = 0; r < cb.rows; ++r) cb.col_ones[c] += cb.bit(r, c);
  }
  return cb;
}

}  // namespace mdsearch
