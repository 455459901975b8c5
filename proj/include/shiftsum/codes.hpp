#pragma once

// Concrete lattices: the Golden code, the diagonal number-field code over
// Q(i, sqrt5) and the Gaussian-integer diagonal baseline.

#include <string>

#include <nlohmann/json.hpp>

#include "shiftsum/lattice.hpp"

namespace shiftsum {

enum class CodeKind { Golden, DiagonalNf, GaussianDiagonal, Custom };
enum class Normalization { Raw, UnitMinNorm };

struct CodeSpec {
  CodeKind kind = CodeKind::Golden;
  /// Matrix size for the diagonal kinds.
  int n = 2;
  Normalization normalization = Normalization::Raw;
  /// Basis JSON file for CodeKind::Custom.
  std::string basisFile;
};

/// Rank-8 lattice in M_2(C):
///   (1/sqrt5) [[ a(x1),  a(x2) ], [ i abar(s(x2)), abar(s(x1)) ]]
/// with x1 = a + b theta, x2 = c + d theta, a..d in Z[i], theta the golden
/// ratio, s: theta -> 1 - theta, alpha = 1 + i(1 - theta), abar = 1 + i theta.
/// Basis order: (a, ia, b, ib, c, ic, d, id).
MatrixLattice golden_code();

/// Rank-2n lattice {diag(sigma_1(x), ..., sigma_n(x))}. Only n = 2 is built:
/// x = a + b theta in Z[i][theta] with sigma_2(theta) = 1 - theta, so
/// det(XX*) = |a^2 + ab - b^2|^2 >= 1. Basis order: (1, i, theta, i theta).
/// Throws UnsupportedDegree otherwise.
MatrixLattice diagonal_nf_code(int n);

/// Rank-2n lattice {diag(z_1, ..., z_n) : z_j in Z[i]}; not NVD.
/// Basis order: (e_1, i e_1, e_2, i e_2, ...).
MatrixLattice gaussian_diagonal(int n);

/// Scales a lattice so its squared minimum norm is 1.
MatrixLattice unit_min_norm(const MatrixLattice& lattice);

MatrixLattice build_code(const CodeSpec& spec);

std::string to_string(CodeKind kind);
std::string to_string(Normalization norm);
CodeKind parse_code_kind(const std::string& s);
Normalization parse_normalization(const std::string& s);

nlohmann::json to_json(const CodeSpec& spec);
CodeSpec code_spec_from_json(const nlohmann::json& j);

}  // namespace shiftsum
