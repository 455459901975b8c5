#pragma once

// Small dense complex matrices and the symmetric-polynomial view of the
// shifted determinant det(I + c XX*).

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace shiftsum {

using cplx = std::complex<double>;

/// Non-owning row-major view. The hot enumeration loops work on views so no
/// allocation happens per lattice point.
struct MatrixView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const cplx> data;

  const cplx& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  bool square() const noexcept { return rows == cols; }
};

/// n x T complex matrix with finite entries, immutable once built.
class ComplexMatrix {
 public:
  /// Zero matrix.
  ComplexMatrix(std::size_t rows, std::size_t cols);
  /// Throws InvalidArgument on size mismatch or non-finite entries.
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::span<const cplx> entries);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const cplx> diag);
  static ComplexMatrix diagonal(std::initializer_list<cplx> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const cplx> entries() const noexcept { return data_; }
  MatrixView view() const noexcept { return {rows_, cols_, data_}; }

  ComplexMatrix adjoint() const;
  double frobenius_norm_sq() const noexcept;
  double frobenius_norm() const noexcept;

  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator*(cplx s, const ComplexMatrix& a);
  friend ComplexMatrix operator*(const ComplexMatrix& a, cplx s) { return s * a; }
  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<cplx> data_;
};

/// p_1..p_n of the Gram matrix XX*: binom(n,i) p_i is the i-th elementary
/// symmetric polynomial of its eigenvalues.
class SymPolyVector {
 public:
  explicit SymPolyVector(std::vector<double> p);

  std::size_t n() const noexcept { return p_.size(); }
  /// 1-based, with p(0) == 1.
  double p(std::size_t i) const { return i == 0 ? 1.0 : p_.at(i - 1); }
  std::span<const double> values() const noexcept { return p_; }

 private:
  std::vector<double> p_;
};

/// XX*, Hermitian by construction (lower triangle is the conjugate of the
/// upper one, diagonal is real).
ComplexMatrix gram(const ComplexMatrix& x);

/// Determinant of a square matrix by partial-pivot LU (closed forms for
/// n <= 2). Throws DimensionMismatch on non-square input.
cplx determinant(MatrixView square);
inline cplx determinant(const ComplexMatrix& m) { return determinant(m.view()); }

/// det(XX*) >= 0. For square X this is |det X|^2.
double gram_determinant(MatrixView x);

SymPolyVector symmetric_polys(MatrixView x);
inline SymPolyVector symmetric_polys(const ComplexMatrix& x) { return symmetric_polys(x.view()); }

/// det(I + c XX*), computed by Cholesky of the Hermitian positive-definite
/// matrix I + c XX* (independently of the symmetric polynomials).
double shifted_det(MatrixView x, double c);
inline double shifted_det(const ComplexMatrix& x, double c) { return shifted_det(x.view(), c); }

/// 1 + sum_i binom(n,i) p_i c^i.
double shifted_det_from_polys(const SymPolyVector& p, double c);

double binomial(std::size_t n, std::size_t k) noexcept;

}  // namespace shiftsum
