#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "lbekf/error.hpp"

namespace lbekf {

// Anything indexable as a square matrix: `a.size()` and `a(i, j)`.
template <class M>
concept SquareMatrix = requires(const M& m, std::size_t i) {
  { m.size() } -> std::convertible_to<std::size_t>;
  { m(i, i) } -> std::convertible_to<double>;
};

// Dense symmetric matrix, row-major. Writes go through set()/add(), which keep
// both triangles in sync.
class DenseSymMatrix {
 public:
  DenseSymMatrix() = default;
  explicit DenseSymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  static DenseSymMatrix identity(std::size_t n) {
    DenseSymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
    return m;
  }

  static DenseSymMatrix diagonal(std::span<const double> d) {
    DenseSymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.data_[i * d.size() + i] = d[i];
    return m;
  }
  static DenseSymMatrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }

  // Rejects input that is not square or not exactly symmetric.
  static DenseSymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    DenseSymMatrix m(n);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != n) throw Error(Errc::dimension_mismatch, "from_rows: matrix is not square");
      std::size_t j = 0;
      for (double v : row) m.data_[i * n + j++] = v;
      ++i;
    }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r + 1; c < n; ++c)
        if (m.data_[r * n + c] != m.data_[c * n + r])
          throw Error(Errc::invalid_argument, "from_rows: matrix is not symmetric");
    return m;
  }

  template <SquareMatrix M>
  static DenseSymMatrix from(const M& a) {
    const std::size_t n = a.size();
    DenseSymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) m.set(i, j, a(i, j));
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] += v;
    if (i != j) data_[j * n_ + i] += v;
  }

  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// Symmetric matrix with explicit stored bandwidth. Diagonal k (0 = main) lives
// in its own contiguous run of length n; entry (j + k, j) is at k * n + j and
// the trailing k slots of each run are unused padding.
class BandedSymMatrix {
 public:
  BandedSymMatrix() = default;
  BandedSymMatrix(std::size_t n, std::size_t bw) : n_(n), bw_(bw) {
    if (n == 0) throw Error(Errc::invalid_argument, "BandedSymMatrix: dimension must be >= 1");
    if (bw > n - 1) throw Error(Errc::invalid_argument, "BandedSymMatrix: bandwidth exceeds n - 1");
    data_.assign((bw + 1) * n, 0.0);
  }

  static BandedSymMatrix identity(std::size_t n, double scale = 1.0) {
    BandedSymMatrix m(n, 0);
    std::fill(m.data_.begin(), m.data_.end(), scale);
    return m;
  }

  // Copies a dense matrix into band storage; entries outside the band are dropped.
  template <SquareMatrix M>
  static BandedSymMatrix from(const M& a, std::size_t bw) {
    BandedSymMatrix m(a.size(), std::min(bw, a.size() - 1));
    for (std::size_t k = 0; k <= m.bw_; ++k)
      for (std::size_t j = 0; j + k < m.n_; ++j) m.data_[k * m.n_ + j] = a(j + k, j);
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  // Stored bandwidth. The numerical bandwidth can be smaller.
  std::size_t bandwidth() const noexcept { return bw_; }

  double operator()(std::size_t i, std::size_t j) const {
    const std::size_t k = i > j ? i - j : j - i;
    if (k > bw_) return 0.0;
    return data_[k * n_ + std::min(i, j)];
  }

  void set(std::size_t i, std::size_t j, double v) { slot(i, j) = v; }
  void add(std::size_t i, std::size_t j, double v) { slot(i, j) += v; }

  // Diagonal k as a span of length n - k.
  std::span<const double> diagonal(std::size_t k) const {
    if (k > bw_) throw Error(Errc::index_out_of_range, "diagonal: offset beyond stored bandwidth");
    return std::span<const double>(data_).subspan(k * n_, n_ - k);
  }
  std::span<double> diagonal(std::size_t k) {
    if (k > bw_) throw Error(Errc::index_out_of_range, "diagonal: offset beyond stored bandwidth");
    return std::span<double>(data_).subspan(k * n_, n_ - k);
  }

  DenseSymMatrix to_dense() const { return DenseSymMatrix::from(*this); }

  // y = A x using only stored diagonals.
  std::vector<double> multiply(std::span<const double> x) const {
    if (x.size() != n_) throw Error(Errc::dimension_mismatch, "multiply: vector length differs from matrix size");
    std::vector<double> y(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) y[j] = data_[j] * x[j];
    for (std::size_t k = 1; k <= bw_; ++k) {
      const double* d = data_.data() + k * n_;
      for (std::size_t j = 0; j + k < n_; ++j) {
        y[j + k] += d[j] * x[j];
        y[j] += d[j] * x[j + k];
      }
    }
    return y;
  }

  friend bool operator==(const BandedSymMatrix&, const BandedSymMatrix&) = default;

 private:
  double& slot(std::size_t i, std::size_t j) {
    const std::size_t k = i > j ? i - j : j - i;
    if (i >= n_ || j >= n_) throw Error(Errc::index_out_of_range, "BandedSymMatrix: index beyond dimension");
    if (k > bw_)
      throw Error(Errc::index_out_of_range,
                  "BandedSymMatrix: entry (" + std::to_string(i) + "," + std::to_string(j) +
                      ") lies outside stored bandwidth " + std::to_string(bw_));
    return data_[k * n_ + std::min(i, j)];
  }

  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> data_;
};

// Largest |i - j| with |A_ij| > zero_tol; 0 for diagonal or zero matrices.
template <SquareMatrix M>
std::size_t bandwidth(const M& a, double zero_tol = 0.0) {
  const std::size_t n = a.size();
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(a(i, j)) > zero_tol) {
        best = std::max(best, i - j);
        break;  // first hit in row i is the farthest from the diagonal
      }
  return best;
}

// Rows/columns lo..hi inclusive, zero-based.
template <SquareMatrix M>
DenseSymMatrix principal_submatrix(const M& a, std::size_t lo, std::size_t hi) {
  if (lo > hi || hi >= a.size())
    throw Error(Errc::index_out_of_range, "principal_submatrix: need 0 <= lo <= hi < n, got lo=" +
                                              std::to_string(lo) + " hi=" + std::to_string(hi) +
                                              " n=" + std::to_string(a.size()));
  DenseSymMatrix out(hi - lo + 1);
  for (std::size_t i = lo; i <= hi; ++i)
    for (std::size_t j = lo; j <= i; ++j) out.set(i - lo, j - lo, a(i, j));
  return out;
}

namespace detail {

// In-place inverse of an SPD matrix stored row-major in `a` (full storage,
// both triangles read from the lower one). Returns false on a non-positive or
// non-finite pivot, leaving `a` unspecified.
inline bool spd_inverse_inplace(std::vector<double>& a, std::size_t n, std::vector<double>& work) {
  // Cholesky: lower triangle of `a` becomes L.
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      const double* ri = &a[i * n];
      const double* rj = &a[j * n];
      for (std::size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
      a[i * n + j] = s / ljj;
    }
  }
  // W = L^{-1}, lower triangular, row-major in `work`.
  work.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    work[j * n + j] = 1.0 / a[j * n + j];
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= a[i * n + k] * work[k * n + j];
      work[i * n + j] = s / a[i * n + i];
    }
  }
  // A^{-1} = W^T W.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k) s += work[k * n + i] * work[k * n + j];
      a[i * n + j] = s;
      a[j * n + i] = s;
    }
  return true;
}

}  // namespace detail

// Exact inverse through a Cholesky factorization.
inline DenseSymMatrix dense_inverse(const DenseSymMatrix& a) {
  const std::size_t n = a.size();
  std::vector<double> buf(a.data().begin(), a.data().end());
  std::vector<double> work;
  if (!detail::spd_inverse_inplace(buf, n, work))
    throw Error(Errc::not_positive_definite, "dense_inverse: non-positive pivot in Cholesky factorization");
  DenseSymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) out.set(i, j, buf[i * n + j]);
  return out;
}

// L-banded inverse: the bandwidth-L matrix whose inverse agrees with `a` on
// the band. Accumulates +inv(window of size L+1) for every window start
// 0..n-L-1 and -inv(window of size L) for starts 1..n-L-1. Only entries of `a`
// inside the band are read. L = n - 1 reduces to the exact inverse.
template <SquareMatrix M>
BandedSymMatrix l_banded_inverse(const M& a, std::size_t L) {
  const std::size_t n = a.size();
  if (n == 0) throw Error(Errc::invalid_argument, "l_banded_inverse: empty matrix");
  if (L > n - 1)
    throw Error(Errc::invalid_argument, "l_banded_inverse: L=" + std::to_string(L) +
                                            " exceeds n-1=" + std::to_string(n - 1));
  BandedSymMatrix z(n, L);
  std::vector<double> block;
  std::vector<double> work;

  auto accumulate = [&](std::size_t lo, std::size_t dim, double sign) {
    if (dim == 0) return;
    block.resize(dim * dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = a(lo + i, lo + j);
        block[i * dim + j] = v;
        block[j * dim + i] = v;
      }
    if (!detail::spd_inverse_inplace(block, dim, work))
      throw Error(Errc::singular_submatrix,
                  "l_banded_inverse: principal block rows " + std::to_string(lo) + ".." +
                      std::to_string(lo + dim - 1) + " is not positive definite (L=" +
                      std::to_string(L) + " too small or input not SPD)");
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j <= i; ++j) z.add(lo + i, lo + j, sign * block[i * dim + j]);
  };

  for (std::size_t l = 0; l + L < n; ++l) accumulate(l, L + 1, +1.0);
  for (std::size_t l = 1; l + L < n; ++l) accumulate(l, L, -1.0);
  return z;
}

inline BandedSymMatrix add_scaled_identity(BandedSymMatrix a, double sigma) {
  if (sigma < 0.0) throw Error(Errc::invalid_argument, "add_scaled_identity: sigma must be >= 0");
  for (double& v : a.diagonal(0)) v += sigma;
  return a;
}

inline BandedSymMatrix add(const BandedSymMatrix& a, const BandedSymMatrix& b) {
  if (a.size() != b.size())
    throw Error(Errc::dimension_mismatch, "add: sizes " + std::to_string(a.size()) + " and " +
                                              std::to_string(b.size()) + " differ");
  BandedSymMatrix out(a.size(), std::max(a.bandwidth(), b.bandwidth()));
  for (std::size_t k = 0; k <= out.bandwidth(); ++k) {
    auto dst = out.diagonal(k);
    if (k <= a.bandwidth()) {
      auto src = a.diagonal(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    if (k <= b.bandwidth()) {
      auto src = b.diagonal(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
  return out;
}

template <SquareMatrix A, SquareMatrix B>
double frobenius_error(const A& a, const B& b) {
  if (a.size() != b.size()) throw Error(Errc::dimension_mismatch, "frobenius_error: sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a(i, j) - b(i, j);
      s += d * d;
    }
  return std::sqrt(s);
}

template <SquareMatrix A>
double frobenius_norm(const A& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace lbekf
