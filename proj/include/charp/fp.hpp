#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "charp/error.hpp"

namespace charp {

using Scalar = std::uint32_t;  // residue in [0, p); the modulus travels in context

// Odd prime in the supported desk-scale window.
class Prime {
public:
  explicit Prime(unsigned p) : p_(p) {
    if (p < 3 || p > 13) throw BadParams("p must be an odd prime with 3 <= p <= 13");
    for (unsigned d = 2; d * d <= p; ++d)
      if (p % d == 0) throw BadParams("p must be prime");
  }
  unsigned value() const { return p_; }

private:
  unsigned p_;
};

// Arithmetic context for F_p.
class Fp {
public:
  explicit Fp(Prime p) : p_(p.value()) {}
  explicit Fp(unsigned p) : Fp(Prime(p)) {}

  unsigned p() const { return p_; }

  Scalar reduce(std::int64_t v) const {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    return static_cast<Scalar>(r < 0 ? r + p_ : r);
  }
  Scalar add(Scalar a, Scalar b) const { return (a + b) % p_; }
  Scalar sub(Scalar a, Scalar b) const { return (a + p_ - b) % p_; }
  Scalar neg(Scalar a) const { return a == 0 ? 0 : p_ - a; }
  Scalar mul(Scalar a, Scalar b) const { return (a * b) % p_; }
  Scalar pow(Scalar a, unsigned e) const {
    Scalar r = 1, base = a % p_;
    while (e) {
      if (e & 1) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }
  Scalar inv(Scalar a) const {
    if (a % p_ == 0) throw Error("division by zero in F_p");
    return pow(a, p_ - 2);
  }

private:
  unsigned p_;
};

// Dense matrix over F_p, row-major.
struct FpMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Scalar> a;

  FpMatrix() = default;
  FpMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0) {}

  Scalar& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  Scalar at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  static FpMatrix identity(std::size_t n) {
    FpMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }
};

inline FpMatrix mat_mul(const Fp& F, const FpMatrix& A, const FpMatrix& B) {
  if (A.cols != B.rows) throw Error("matrix dimension mismatch");
  FpMatrix C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = 0; k < A.cols; ++k) {
      Scalar v = A.at(i, k);
      if (!v) continue;
      const Scalar* brow = &B.a[k * B.cols];
      Scalar* crow = &C.a[i * B.cols];
      for (std::size_t j = 0; j < B.cols; ++j) crow[j] = (crow[j] + v * brow[j]) % F.p();
    }
  return C;
}

inline std::vector<Scalar> mat_apply(const Fp& F, const FpMatrix& A, const std::vector<Scalar>& x) {
  if (A.cols != x.size()) throw Error("matrix/vector dimension mismatch");
  std::vector<Scalar> y(A.rows, 0);
  for (std::size_t i = 0; i < A.rows; ++i) {
    std::uint64_t acc = 0;
    const Scalar* row = &A.a[i * A.cols];
    for (std::size_t j = 0; j < A.cols; ++j) acc += static_cast<std::uint64_t>(row[j]) * x[j];
    y[i] = static_cast<Scalar>(acc % F.p());
  }
  return y;
}

inline FpMatrix mat_pow(const Fp& F, FpMatrix A, unsigned e) {
  FpMatrix R = FpMatrix::identity(A.rows);
  while (e) {
    if (e & 1) R = mat_mul(F, R, A);
    A = mat_mul(F, A, A);
    e >>= 1;
  }
  return R;
}

// Reduced row echelon form in place. Pivot rule: columns left to right, first
// row (top to bottom) with a nonzero entry — deterministic for a given input.
// Returns pivot columns; `pivot_row_of[c]` maps a pivot column to its row.
inline std::vector<std::size_t> rref(const Fp& F, FpMatrix& M) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < M.cols && row < M.rows; ++col) {
    std::size_t sel = row;
    while (sel < M.rows && M.at(sel, col) == 0) ++sel;
    if (sel == M.rows) continue;
    if (sel != row)
      for (std::size_t j = 0; j < M.cols; ++j) std::swap(M.at(row, j), M.at(sel, j));
    Scalar piv = F.inv(M.at(row, col));
    for (std::size_t j = col; j < M.cols; ++j) M.at(row, j) = F.mul(M.at(row, j), piv);
    for (std::size_t r = 0; r < M.rows; ++r) {
      if (r == row) continue;
      Scalar v = M.at(r, col);
      if (!v) continue;
      for (std::size_t j = col; j < M.cols; ++j)
        M.at(r, j) = F.sub(M.at(r, j), F.mul(v, M.at(row, j)));
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline unsigned rank(const Fp& F, FpMatrix M) {
  return static_cast<unsigned>(rref(F, M).size());
}

struct LinearSolution {
  std::vector<Scalar> particular;                // one x with Mx = b
  std::vector<std::vector<Scalar>> nullspace;    // echelonized basis of ker M
};

// Echelonized nullspace basis; deterministic given entry order.
inline std::vector<std::vector<Scalar>> nullspace(const Fp& F, FpMatrix M) {
  std::vector<std::size_t> pivots = rref(F, M);
  std::vector<bool> is_pivot(M.cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  std::vector<std::vector<Scalar>> basis;
  for (std::size_t free_col = 0; free_col < M.cols; ++free_col) {
    if (is_pivot[free_col]) continue;
    std::vector<Scalar> v(M.cols, 0);
    v[free_col] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r)
      v[pivots[r]] = F.neg(M.at(r, free_col));
    basis.push_back(std::move(v));
  }
  return basis;
}

// Solve Mx = b; nullopt signals b outside the image of M.
inline std::optional<LinearSolution> solve(const Fp& F, const FpMatrix& M,
                                           const std::vector<Scalar>& b) {
  if (b.size() != M.rows) throw Error("solve: rhs dimension mismatch");
  FpMatrix aug(M.rows, M.cols + 1);
  for (std::size_t r = 0; r < M.rows; ++r) {
    for (std::size_t c = 0; c < M.cols; ++c) aug.at(r, c) = M.at(r, c);
    aug.at(r, M.cols) = b[r];
  }
  std::vector<std::size_t> pivots = rref(F, aug);
  if (!pivots.empty() && pivots.back() == M.cols) return std::nullopt;  // 0 = 1 row
  LinearSolution sol;
  sol.particular.assign(M.cols, 0);
  for (std::size_t r = 0; r < pivots.size(); ++r) sol.particular[pivots[r]] = aug.at(r, M.cols);
  std::vector<bool> is_pivot(M.cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  for (std::size_t free_col = 0; free_col < M.cols; ++free_col) {
    if (is_pivot[free_col]) continue;
    std::vector<Scalar> v(M.cols, 0);
    v[free_col] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r)
      v[pivots[r]] = F.neg(aug.at(r, free_col));
    sol.nullspace.push_back(std::move(v));
  }
  return sol;
}

// Factored solver for repeated solves against one matrix: keeps the RREF of
// [M | I] so each solve is a single back-substitution pass.
class CachedSolver {
public:
  CachedSolver() = default;
  CachedSolver(const Fp& F, const FpMatrix& M) : F_(F), cols_(M.cols) {
    FpMatrix aug(M.rows, M.cols + M.rows);
    for (std::size_t r = 0; r < M.rows; ++r) {
      for (std::size_t c = 0; c < M.cols; ++c) aug.at(r, c) = M.at(r, c);
      aug.at(r, M.cols + r) = 1;
    }
    // rref over the M block only; the I block records row operations.
    std::size_t row = 0;
    for (std::size_t col = 0; col < M.cols && row < M.rows; ++col) {
      std::size_t sel = row;
      while (sel < M.rows && aug.at(sel, col) == 0) ++sel;
      if (sel == M.rows) continue;
      if (sel != row)
        for (std::size_t j = 0; j < aug.cols; ++j) std::swap(aug.at(row, j), aug.at(sel, j));
      Scalar piv = F_.inv(aug.at(row, col));
      for (std::size_t j = 0; j < aug.cols; ++j) aug.at(row, j) = F_.mul(aug.at(row, j), piv);
      for (std::size_t r = 0; r < M.rows; ++r) {
        if (r == row) continue;
        Scalar v = aug.at(r, col);
        if (!v) continue;
        for (std::size_t j = 0; j < aug.cols; ++j)
          aug.at(r, j) = F_.sub(aug.at(r, j), F_.mul(v, aug.at(row, j)));
      }
      pivots_.push_back(col);
      ++row;
    }
    rref_ = std::move(aug);
    rows_ = M.rows;
  }

  unsigned rank() const { return static_cast<unsigned>(pivots_.size()); }

  std::optional<std::vector<Scalar>> solve(const std::vector<Scalar>& b) const {
    // Transformed rhs: T*b where T is the recorded row-operation matrix.
    std::vector<Scalar> tb(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
      std::uint64_t acc = 0;
      const Scalar* row = &rref_.a[r * rref_.cols + cols_];
      for (std::size_t j = 0; j < rows_; ++j) acc += static_cast<std::uint64_t>(row[j]) * b[j];
      tb[r] = static_cast<Scalar>(acc % F_.p());
    }
    // Consistency: zero rows of the reduced M block must match zero tb.
    for (std::size_t r = pivots_.size(); r < rows_; ++r)
      if (tb[r] != 0) return std::nullopt;
    std::vector<Scalar> x(cols_, 0);
    for (std::size_t r = 0; r < pivots_.size(); ++r) x[pivots_[r]] = tb[r];
    return x;
  }

private:
  Fp F_{Prime(3)};
  std::size_t rows_ = 0, cols_ = 0;
  FpMatrix rref_;
  std::vector<std::size_t> pivots_;
};

// Incremental row space with reduced echelon rows; optionally tracks each
// echelon row as a combination of the inserted generators.
class EchelonSpan {
public:
  explicit EchelonSpan(const Fp& F, std::size_t cols, bool track = false)
      : F_(F), cols_(cols), track_(track) {}

  unsigned rank() const { return static_cast<unsigned>(rows_.size()); }
  std::size_t generators() const { return n_inserted_; }
  const std::vector<std::vector<Scalar>>& rows() const { return rows_; }
  const std::vector<std::size_t>& pivot_cols() const { return pivot_cols_; }
  // Combination of generators producing echelon row r (track mode only).
  const std::vector<Scalar>& combo(std::size_t r) const { return combos_[r]; }

  // Insert a generator row; returns true if the rank grew.
  bool add(std::vector<Scalar> v) {
    std::vector<Scalar> c;
    if (track_) {
      c.assign(n_inserted_ + 1, 0);
      c[n_inserted_] = 1;
    }
    ++n_inserted_;
    reduce(v, track_ ? &c : nullptr);
    std::size_t piv = first_nonzero(v);
    if (piv == cols_) return false;
    Scalar inv = F_.inv(v[piv]);
    scale(v, inv);
    if (track_) scale(c, inv);
    // Back-substitute into existing rows to keep the echelon reduced.
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      Scalar f = rows_[r][piv];
      if (!f) continue;
      axpy(rows_[r], F_.neg(f), v);
      if (track_) axpy_pad(combos_[r], F_.neg(f), c);
    }
    insert_sorted(std::move(v), piv, track_ ? std::move(c) : std::vector<Scalar>{});
    return true;
  }

  bool contains(std::vector<Scalar> v) const {
    reduce(v, nullptr);
    return first_nonzero(v) == cols_;
  }

  // Coordinates of v over the inserted generators (track mode); nullopt if
  // v is outside the span.
  std::optional<std::vector<Scalar>> coordinates(std::vector<Scalar> v) const {
    if (!track_) throw Error("EchelonSpan: coordinates need tracking enabled");
    std::vector<Scalar> acc(n_inserted_, 0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      Scalar f = v[pivot_cols_[r]];
      if (!f) continue;
      axpy(v, F_.neg(f), rows_[r]);
      for (std::size_t j = 0; j < combos_[r].size(); ++j)
        acc[j] = F_.add(acc[j], F_.mul(f, combos_[r][j]));
    }
    if (first_nonzero(v) != cols_) return std::nullopt;
    return acc;
  }

private:
  std::size_t first_nonzero(const std::vector<Scalar>& v) const {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i]) return i;
    return cols_;
  }
  void scale(std::vector<Scalar>& v, Scalar s) const {
    for (auto& x : v) x = F_.mul(x, s);
  }
  void axpy(std::vector<Scalar>& v, Scalar s, const std::vector<Scalar>& w) const {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = F_.add(v[i], F_.mul(s, w[i]));
  }
  void axpy_pad(std::vector<Scalar>& v, Scalar s, const std::vector<Scalar>& w) const {
    if (v.size() < w.size()) v.resize(w.size(), 0);
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = F_.add(v[i], F_.mul(s, w[i]));
  }
  void reduce(std::vector<Scalar>& v, std::vector<Scalar>* c) const {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      Scalar f = v[pivot_cols_[r]];
      if (!f) continue;
      axpy(v, F_.neg(f), rows_[r]);
      if (c) axpy_pad(*c, F_.neg(f), combos_[r]);
    }
  }
  void insert_sorted(std::vector<Scalar> v, std::size_t piv, std::vector<Scalar> c) {
    std::size_t pos = 0;
    while (pos < pivot_cols_.size() && pivot_cols_[pos] < piv) ++pos;
    rows_.insert(rows_.begin() + pos, std::move(v));
    pivot_cols_.insert(pivot_cols_.begin() + pos, piv);
    if (track_) combos_.insert(combos_.begin() + pos, std::move(c));
  }

  Fp F_;
  std::size_t cols_;
  bool track_;
  std::size_t n_inserted_ = 0;
  std::vector<std::vector<Scalar>> rows_;
  std::vector<std::size_t> pivot_cols_;
  std::vector<std::vector<Scalar>> combos_;
};

// Row space whose generators arrive in waves tagged by a non-decreasing level;
// membership and coordinates can be queried against the sub-span of any level.
// Rows are forward-eliminated only (no back-substitution), so every echelon
// row is a combination of generators inserted at or before its tag.
class TaggedSpan {
public:
  TaggedSpan(const Fp& F, std::size_t cols) : F_(F), cols_(cols) {}

  std::size_t generators() const { return n_inserted_; }

  unsigned rank_at(unsigned level) const {
    unsigned r = 0;
    for (auto& row : rows_)
      if (row.tag <= level) ++r;
    return r;
  }

  // Insert a generator with the given tag; tags must be non-decreasing.
  bool add(std::vector<Scalar> v, unsigned tag) {
    if (tag < last_tag_) throw Error("TaggedSpan: tags must be non-decreasing");
    last_tag_ = tag;
    std::vector<Scalar> combo(n_inserted_ + 1, 0);
    combo[n_inserted_] = 1;
    ++n_inserted_;
    for (auto& row : rows_) {  // rows sorted by pivot column
      Scalar f = v[row.pivot];
      if (!f) continue;
      Scalar s = F_.neg(F_.mul(f, F_.inv(row.data[row.pivot])));
      axpy(v, s, row.data);
      axpy_pad(combo, s, row.combo);
    }
    std::size_t piv = first_nonzero(v);
    if (piv == cols_) return false;
    Row row{piv, tag, std::move(v), std::move(combo)};
    auto pos = rows_.begin();
    while (pos != rows_.end() && pos->pivot < piv) ++pos;
    rows_.insert(pos, std::move(row));
    return true;
  }

  // Rows of tag <= level form a self-contained echelon (each was reduced only
  // against earlier rows), zero before their pivots; a single ascending-pivot
  // pass over them decides membership in the level sub-span.
  bool contains(std::vector<Scalar> v, unsigned level) const {
    for (auto& row : rows_) {
      if (row.tag > level) continue;
      Scalar f = v[row.pivot];
      if (!f) continue;
      axpy(v, F_.neg(F_.mul(f, F_.inv(row.data[row.pivot]))), row.data);
    }
    return first_nonzero(v) == cols_;
  }

  // Coordinates over the inserted generators, using rows of tag <= level.
  std::optional<std::vector<Scalar>> coordinates(std::vector<Scalar> v, unsigned level) const {
    std::vector<Scalar> acc(n_inserted_, 0);
    for (auto& row : rows_) {
      if (row.tag > level) continue;
      Scalar f = v[row.pivot];
      if (!f) continue;
      Scalar s = F_.mul(f, F_.inv(row.data[row.pivot]));
      axpy(v, F_.neg(s), row.data);
      for (std::size_t j = 0; j < row.combo.size(); ++j)
        acc[j] = F_.add(acc[j], F_.mul(s, row.combo[j]));
    }
    if (first_nonzero(v) != cols_) return std::nullopt;
    return acc;
  }

private:
  struct Row {
    std::size_t pivot;
    unsigned tag;
    std::vector<Scalar> data;
    std::vector<Scalar> combo;
  };

  std::size_t first_nonzero(const std::vector<Scalar>& v) const {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i]) return i;
    return cols_;
  }
  void axpy(std::vector<Scalar>& v, Scalar s, const std::vector<Scalar>& w) const {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = F_.add(v[i], F_.mul(s, w[i]));
  }
  void axpy_pad(std::vector<Scalar>& v, Scalar s, const std::vector<Scalar>& w) const {
    if (v.size() < w.size()) v.resize(w.size(), 0);
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = F_.add(v[i], F_.mul(s, w[i]));
  }

  Fp F_;
  std::size_t cols_;
  std::size_t n_inserted_ = 0;
  unsigned last_tag_ = 0;
  std::vector<Row> rows_;
};

}  // namespace charp
