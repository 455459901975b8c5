#pragma once

// Inverse determinant sums over L(M): approximate sums |det X|^{-m}, shifted
// sums det(I + cXX*)^{-m}, and the mixed terms that dominate them, plus the
// dyadic-summing harness.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shiftsum/lattice.hpp"

namespace shiftsum {

enum class SumFamily { Approximate, Shifted, Mixed };

std::string to_string(SumFamily f);
SumFamily parse_sum_family(const std::string& s);

struct SumSpec {
  SumFamily family = SumFamily::Shifted;
  double m = 1;
  /// Shift, shifted family only.
  double c = 0;
  /// Split index 0 <= i <= m, mixed family only.
  int i = 0;
  /// Sum each +-X pair once and double it. Every term depends on XX* only,
  /// so this is exact.
  bool dedupSigns = false;
  /// Drop points with det(XX*) = 0 instead of throwing SingularPoint.
  bool skipSingular = false;
};

nlohmann::json to_json(const SumSpec& s);
SumSpec sum_spec_from_json(const nlohmann::json& j);

struct CurvePoint {
  double M = 0;
  double value = 0;
  std::uint64_t pointCount = 0;
};

/// One sum family evaluated on an increasing list of radii.
struct SumCurve {
  SumSpec spec;
  std::vector<CurvePoint> points;
  /// Compensated-summation error bound at the largest radius.
  double errorBound = 0;

  /// Columns M,value,pointCount.
  std::string to_csv() const;
  nlohmann::json to_json() const;
  /// Reads the CSV written by to_csv (spec is left default).
  static SumCurve from_csv(const std::string& text);
};

/// Evaluates one term of the family on a point; throws SingularPoint (or
/// returns 0 with skipSingular) when the family needs det(XX*) != 0.
double sum_term(const SumSpec& spec, const PointView& p);

/// Single enumeration at radii.back(), terms binned by radius and
/// prefix-summed with compensated accumulators merged in partition order.
SumCurve sum_curve(const MatrixLattice& lattice, const SumSpec& spec, std::span<const double> radii,
                   const EnumerationOptions& opts = {});

double evaluate_sum(const MatrixLattice& lattice, const SumSpec& spec, double radius,
                    const EnumerationOptions& opts = {});

/// S^m(M) = sum |det X|^{-m}; requires n == T.
double approximate_sum(const MatrixLattice& lattice, double m, double radius, const EnumerationOptions& opts = {},
                       bool skipSingular = false);
double shifted_sum(const MatrixLattice& lattice, double m, double c, double radius,
                   const EnumerationOptions& opts = {});
/// The c-free factor sum ||X||_F^{-2i} det(XX*)^{-(m-i)}.
double mixed_sum(const MatrixLattice& lattice, double m, int i, double radius, const EnumerationOptions& opts = {},
                 bool skipSingular = false);

struct DominationCheck {
  double lhs = 0;  ///< shifted sum
  double rhs = 0;  ///< c^{-(i + n(m-i))} * mixed sum; +inf when c == 0
  double cExponent = 0;
  bool holds = false;
};

DominationCheck shifted_dominated_by_mixed(const MatrixLattice& lattice, double m, double c, double radius, int i,
                                           const EnumerationOptions& opts = {});

enum class GrowthRegime { Convergent, Logarithmic, Polynomial };
std::string to_string(GrowthRegime r);

struct DyadicSample {
  double x = 0;
  double f = 0;
};

struct DyadicResult {
  double empiricalSum = 0;
  /// 2^t K sum_{i=1}^{J} 2^{(s-t) i}, J = ceil(log2 M) (at least 1).
  double proofBound = 0;
  GrowthRegime regime = GrowthRegime::Convergent;
};

/// sum f(x)/x^t over the samples (x >= 1, M = max x) together with the
/// explicit bound of the dyadic partition argument. The prefix hypothesis
/// sum_{x <= 2^j} f(x) <= K 2^{js} is checked for j = 0..J; throws
/// HypothesisViolated when it fails.
DyadicResult dyadic_bound(std::span<const DyadicSample> f, double K, double s, double t);

struct ConvergenceProbe {
  SumCurve curve;
  bool saturated = false;
  /// (S(M_last) - S(M_prev)) / S(M_last).
  double lastIncrementFraction = 1.0;
};

/// Shifted sum on a radius grid; saturated when the last increment is below
/// 1% of the total. Requires min_norm_sq() >= 1.
ConvergenceProbe convergence_probe(const MatrixLattice& lattice, double m, double c, std::span<const double> radii,
                                   const EnumerationOptions& opts = {});

}  // namespace shiftsum
