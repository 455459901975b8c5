#include "shiftsum/complex_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "shiftsum/errors.hpp"
#include "small_buffer.hpp"

namespace shiftsum {

namespace {

void check_finite(std::span<const cplx> data) {
  for (const cplx& z : data) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorCode::InvalidArgument, "matrix entry is not finite");
    }
  }
}

// G = XX* written into a row-major n x n buffer.
void gram_into(MatrixView x, cplx* g) {
  const std::size_t n = x.rows;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      cplx acc = 0;
      for (std::size_t t = 0; t < x.cols; ++t) acc += x(i, t) * std::conj(x(j, t));
      if (i == j) acc.imag(0.0);
      g[i * n + j] = acc;
      g[j * n + i] = std::conj(acc);
    }
  }
}

// In-place LU with partial pivoting; returns the determinant.
cplx lu_determinant(cplx* a, std::size_t n) {
  cplx det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      det = -det;
    }
    const cplx d = a[col * n + col];
    det *= d;
    for (std::size_t r = col + 1; r < n; ++r) {
      const cplx f = a[r * n + col] / d;
      if (f == cplx(0.0)) continue;
      for (std::size_t c = col + 1; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
    }
  }
  return det;
}

// Elementary symmetric polynomials e_1..e_n of the eigenvalues of the
// Hermitian matrix g, as sums of principal minors.
void principal_minor_sums(const cplx* g, std::size_t n, double* e) {
  detail::SmallBuffer<cplx> sub(n * n);
  std::vector<std::size_t> idx;
  idx.reserve(n);
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    idx.clear();
    for (std::size_t b = 0; b < n; ++b)
      if (mask & (1u << b)) idx.push_back(b);
    const std::size_t m = idx.size();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) sub[r * m + c] = g[idx[r] * n + idx[c]];
    e[m - 1] += lu_determinant(sub.data(), m).real();
  }
}

// Faddeev-LeVerrier: characteristic polynomial coefficients of g, giving
// e_k = (-1)^k c_{n-k}.
void leverrier_sums(const cplx* g, std::size_t n, double* e) {
  std::vector<cplx> mk(n * n, 0.0), prod(n * n, 0.0);
  cplx coeff = 1.0;  // c_n
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = G M_{k-1} + c_{n-k+1} I, with M_0 = 0.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cplx acc = 0;
        for (std::size_t t = 0; t < n; ++t) acc += g[i * n + t] * mk[t * n + j];
        prod[i * n + j] = acc;
      }
    for (std::size_t i = 0; i < n; ++i) prod[i * n + i] += coeff;
    mk.swap(prod);
    cplx tr = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < n; ++t) tr += g[i * n + t] * mk[t * n + i];
    coeff = -tr / static_cast<double>(k);  // c_{n-k}
    e[k - 1] = ((k % 2) ? -coeff : coeff).real();
  }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0)) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::InvalidArgument, "matrix dimensions must be positive");
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::InvalidArgument, "matrix dimensions must be positive");
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(rows * cols) + " entries, got " +
                                                std::to_string(data_.size()));
  }
  check_finite(data_);
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::span<const cplx> entries)
    : ComplexMatrix(rows, cols, std::vector<cplx>(entries.begin(), entries.end())) {}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  std::vector<cplx> d(n, cplx(1.0));
  return diagonal(d);
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
  const std::size_t n = diag.size();
  std::vector<cplx> e(n * n, cplx(0.0));
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = diag[i];
  return ComplexMatrix(n, n, std::move(e));
}

ComplexMatrix ComplexMatrix::diagonal(std::initializer_list<cplx> diag) {
  return diagonal(std::span<const cplx>(diag.begin(), diag.size()));
}

ComplexMatrix ComplexMatrix::adjoint() const {
  std::vector<cplx> e(data_.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) e[j * rows_ + i] = std::conj((*this)(i, j));
  return ComplexMatrix(cols_, rows_, std::move(e));
}

double ComplexMatrix::frobenius_norm_sq() const noexcept {
  double s = 0;
  for (const cplx& z : data_) s += std::norm(z);
  return s;
}

double ComplexMatrix::frobenius_norm() const noexcept { return std::sqrt(frobenius_norm_sq()); }

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::DimensionMismatch, "matrix sum");
  std::vector<cplx> e(a.data_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += b.data_[i];
  return ComplexMatrix(a.rows_, a.cols_, std::move(e));
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::DimensionMismatch, "matrix difference");
  std::vector<cplx> e(a.data_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= b.data_[i];
  return ComplexMatrix(a.rows_, a.cols_, std::move(e));
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorCode::DimensionMismatch, "matrix product");
  std::vector<cplx> e(a.rows_ * b.cols_, cplx(0.0));
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t t = 0; t < a.cols_; ++t) {
      const cplx v = a(i, t);
      for (std::size_t j = 0; j < b.cols_; ++j) e[i * b.cols_ + j] += v * b(t, j);
    }
  return ComplexMatrix(a.rows_, b.cols_, std::move(e));
}

ComplexMatrix operator*(cplx s, const ComplexMatrix& a) {
  std::vector<cplx> e(a.data_);
  for (cplx& z : e) z *= s;
  return ComplexMatrix(a.rows_, a.cols_, std::move(e));
}

SymPolyVector::SymPolyVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw Error(ErrorCode::InvalidArgument, "SymPolyVector needs n >= 1");
}

double binomial(std::size_t n, std::size_t k) noexcept {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

ComplexMatrix gram(const ComplexMatrix& x) {
  const std::size_t n = x.rows();
  std::vector<cplx> g(n * n);
  gram_into(x.view(), g.data());
  return ComplexMatrix(n, n, std::move(g));
}

cplx determinant(MatrixView m) {
  if (!m.square()) throw Error(ErrorCode::DimensionMismatch, "determinant of a non-square matrix");
  const std::size_t n = m.rows;
  if (n == 1) return m.data[0];
  if (n == 2) return m.data[0] * m.data[3] - m.data[1] * m.data[2];
  detail::SmallBuffer<cplx> a(n * n);
  std::copy(m.data.begin(), m.data.end(), a.data());
  return lu_determinant(a.data(), n);
}

double gram_determinant(MatrixView x) {
  if (x.square()) return std::norm(determinant(x));
  const std::size_t n = x.rows;
  detail::SmallBuffer<cplx> g(n * n);
  gram_into(x, g.data());
  return std::max(0.0, lu_determinant(g.data(), n).real());
}

SymPolyVector symmetric_polys(MatrixView x) {
  const std::size_t n = x.rows;
  detail::SmallBuffer<cplx> g(n * n);
  gram_into(x, g.data());
  std::vector<double> e(n, 0.0);
  if (n <= 4) {
    principal_minor_sums(g.data(), n, e.data());
  } else {
    leverrier_sums(g.data(), n, e.data());
  }
  // e_1 is the trace; take it straight from the entries.
  double p1 = 0;
  for (const cplx& z : x.data) p1 += std::norm(z);
  e[0] = p1;
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = e[i] / binomial(n, i + 1);
    if (v < 0) {
      const double tol = 1e-12 * std::pow(p1, static_cast<double>(i + 1));
      if (-v > tol) {
        throw Error(ErrorCode::NumericalFailure,
                    "symmetric polynomial p_" + std::to_string(i + 1) + " is negative beyond round-off");
      }
      v = 0.0;
    }
    p[i] = v;
  }
  return SymPolyVector(std::move(p));
}

double shifted_det(MatrixView x, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "shift c must be finite and >= 0");
  const std::size_t n = x.rows;
  if (n == 1) {
    double s = 0;
    for (const cplx& z : x.data) s += std::norm(z);
    return 1.0 + c * s;
  }
  detail::SmallBuffer<cplx> a(n * n);
  gram_into(x, a.data());
  for (std::size_t i = 0; i < n * n; ++i) a[i] *= c;
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] += 1.0;
  // Cholesky A = L L*, det A = prod L_ii^2. A >= I so pivots stay >= 1.
  double det = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j].real();
    for (std::size_t t = 0; t < j; ++t) d -= std::norm(a[j * n + t]);
    if (!(d > 0.0)) throw Error(ErrorCode::NumericalFailure, "I + cXX* lost positive definiteness");
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    det *= d;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = a[i * n + j];
      for (std::size_t t = 0; t < j; ++t) s -= a[i * n + t] * std::conj(a[j * n + t]);
      a[i * n + j] = s / ljj;
    }
  }
  return det;
}

double shifted_det_from_polys(const SymPolyVector& p, double c) {
  const std::size_t n = p.n();
  double acc = 1.0;
  double ci = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    ci *= c;
    acc += binomial(n, i) * p.p(i) * ci;
  }
  return acc;
}

}  // namespace shiftsum
