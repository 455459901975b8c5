#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "shiftsum/codes.hpp"
#include "shiftsum/detsum.hpp"
#include "shiftsum/errors.hpp"

using namespace shiftsum;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Direct sum over the box-scan ball with independent formulas per family.
double box_sum(const MatrixLattice& l, const SumSpec& s, double radius) {
  long double total = 0;
  for (const auto& z : oracle::ball_points(l, radius)) {
    const ComplexMatrix x = oracle::combine(l, z);
    const double nsq = oracle::norm_sq(x);
    switch (s.family) {
      case SumFamily::Approximate: {
        const double d = oracle::abs_det(x);
        if (d == 0.0) continue;
        total += std::pow(d, -s.m);
        break;
      }
      case SumFamily::Shifted: total += std::pow(oracle::lu_shifted_det(x, s.c), -s.m); break;
      case SumFamily::Mixed: {
        const double d = oracle::abs_det(x);
        if (d == 0.0 && s.i < s.m) continue;
        total += std::pow(nsq, -s.i) * std::pow(d * d, -(s.m - s.i));
        break;
      }
    }
  }
  return static_cast<double>(total);
}

MatrixLattice zi() { return gaussian_diagonal(1); }

}  // namespace

TEST_CASE("approximate sum examples") {
  CHECK(approximate_sum(zi(), 2, 1.0) == doctest::Approx(4.0));
  CHECK(approximate_sum(zi(), 2, std::sqrt(2.0)) == doctest::Approx(6.0));
  try {
    approximate_sum(gaussian_diagonal(2), 2, 1.0);
    FAIL("expected SingularPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularPoint);
  }
  CHECK(approximate_sum(gaussian_diagonal(2), 2, 2.0, {}, true) > 0);
}

TEST_CASE("shifted sum examples") {
  const MatrixLattice g = golden_code();
  CHECK(shifted_sum(g, 4, 0.0, 2.0) == doctest::Approx(1712));
  CHECK(shifted_sum(zi(), 2, 1.0, 1.0) == doctest::Approx(1.0));
  // c^{nm} det(I + cXX*)^{-m} -> |det X|^{-2m} as c grows.
  const double s4 = approximate_sum(g, 4, 2.0);
  double prev_gap = INFINITY;
  for (double c : {1e2, 1e4, 1e6}) {
    const double scaled = shifted_sum(g, 2, c, 2.0) * std::pow(c, 4.0);
    const double gap = std::abs(scaled / s4 - 1.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.05);
}

TEST_CASE("mixed sum examples") {
  CHECK(mixed_sum(zi(), 2, 2, 1.0) == doctest::Approx(4.0));
  CHECK(mixed_sum(zi(), 1, 0, std::sqrt(2.0)) == doctest::Approx(6.0));
  CHECK(mixed_sum(zi(), 2, 0, std::sqrt(2.0)) == doctest::Approx(5.0));
  SumSpec s;
  s.family = SumFamily::Mixed;
  s.m = 4;
  s.i = 2;
  CHECK(rel(mixed_sum(golden_code(), 4, 2, 2.0), box_sum(golden_code(), s, 2.0)) < 1e-9);
  CHECK_THROWS_AS(mixed_sum(zi(), 2, 3, 1.0), Error);
}

TEST_CASE("golden approximate sum matches the box scan") {
  SumSpec s;
  s.family = SumFamily::Approximate;
  s.m = 4;
  CHECK(rel(approximate_sum(golden_code(), 4, 2.0), box_sum(golden_code(), s, 2.0)) < 1e-9);
}

TEST_CASE("every family matches the box scan on small lattices") {
  for (const MatrixLattice& l : {gaussian_diagonal(1), gaussian_diagonal(2), diagonal_nf_code(2)}) {
    for (double radius : {1.0, std::sqrt(2.0), 2.5, 4.0}) {
      for (SumFamily fam : {SumFamily::Approximate, SumFamily::Shifted, SumFamily::Mixed}) {
        SumSpec s;
        s.family = fam;
        s.m = 2;
        s.c = 0.7;
        s.i = 1;
        s.skipSingular = true;
        for (bool dedup : {false, true}) {
          s.dedupSigns = dedup;
          const double mine = evaluate_sum(l, s, radius);
          const double ref = box_sum(l, s, radius);
          if (ref == 0.0) {
            CHECK(mine == 0.0);
          } else {
            CHECK(rel(mine, ref) < 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("sum curves") {
  const MatrixLattice g = golden_code();
  SumSpec s;
  s.family = SumFamily::Shifted;
  s.m = 4;
  s.c = 1.0;
  const double radii[] = {1.0, std::numbers::sqrt2, 2.0, 2.0 * std::numbers::sqrt2};
  const SumCurve curve = sum_curve(g, s, radii);
  REQUIRE(curve.points.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(rel(curve.points[j].value, shifted_sum(g, 4, 1.0, radii[j])) < 1e-12);
    if (j > 0) CHECK(curve.points[j].value >= curve.points[j - 1].value);
  }
  CHECK(curve.points[2].pointCount == 1712);
  CHECK(curve.errorBound > 0);
  CHECK(curve.errorBound < 1e-12 * curve.points.back().value);

  const SumCurve back = SumCurve::from_csv(curve.to_csv());
  REQUIRE(back.points.size() == 4);
  CHECK(back.points[3].value == curve.points[3].value);
  CHECK(back.points[3].pointCount == curve.points[3].pointCount);

  // Partition and thread count do not change the result beyond rounding.
  EnumerationOptions o;
  o.partitions = 5;
  o.threads = 3;
  const SumCurve other = sum_curve(g, s, radii, o);
  CHECK(rel(other.points.back().value, curve.points.back().value) < 1e-12);
}

TEST_CASE("shifted sum monotone in c and scaling identity") {
  const MatrixLattice d = diagonal_nf_code(2);
  double prev = INFINITY;
  for (double c : {0.1, 1.0, 10.0}) {
    const double v = shifted_sum(d, 2, c, 4.0);
    CHECK(v < prev);
    prev = v;
  }
  const double beta = 1.7;
  long double direct = 0;
  enumerate(d, 4.0, [&](const PointView& p) { direct += std::pow(shifted_det(p.x, 0.5 * beta * beta), -2.0); });
  CHECK(rel(shifted_sum(d.scaled(beta), 2, 0.5, 4.0 * beta), static_cast<double>(direct)) < 1e-10);
}

TEST_CASE("shifted sums are dominated by the mixed terms") {
  for (int i = 0; i <= 2; ++i) CHECK(shifted_dominated_by_mixed(zi(), 2, 1.0, 2.0, i).holds);
  for (int i = 0; i <= 4; ++i) {
    const DominationCheck d = shifted_dominated_by_mixed(golden_code(), 4, 100.0, 2.0, i);
    CHECK(d.holds);
    CHECK(d.lhs <= d.rhs);
    CHECK(d.cExponent == doctest::Approx(i + 2 * (4 - i)));
  }
  const DominationCheck zero = shifted_dominated_by_mixed(zi(), 2, 0.0, 2.0, 2);
  CHECK(zero.holds);
  CHECK(std::isinf(zero.rhs));
  // c = 0, i = m on a unit-minnorm lattice: |L(M)| <= sum ||X||^{-2m} exactly when only unit points are in.
  CHECK(shifted_sum(zi(), 2, 0.0, 1.0) <= mixed_sum(zi(), 2, 2, 1.0) * (1 + 1e-12));
  CHECK(shifted_sum(zi(), 2, 0.0, 2.0) > mixed_sum(zi(), 2, 2, 2.0));
}

TEST_CASE("dyadic bound") {
  std::vector<DyadicSample> f;
  for (int x = 1; x <= 1000; ++x) f.push_back({static_cast<double>(x), 1.0});
  const DyadicResult conv = dyadic_bound(f, 1.0, 1.0, 2.0);
  CHECK(conv.empiricalSum == doctest::Approx(1.6439).epsilon(1e-4));
  CHECK(conv.empiricalSum <= conv.proofBound);
  CHECK(conv.regime == GrowthRegime::Convergent);
  // 4 * sum_{i=1}^{10} 2^{-i}
  CHECK(conv.proofBound == doctest::Approx(4.0 * (1.0 - std::pow(2.0, -10.0))));

  const DyadicResult lg = dyadic_bound(f, 1.0, 1.0, 1.0);
  CHECK(lg.empiricalSum == doctest::Approx(std::log(1000.0) + 0.5772156649).epsilon(1e-3));
  CHECK(lg.proofBound == doctest::Approx(20.0));
  CHECK(lg.regime == GrowthRegime::Logarithmic);

  const DyadicResult plain = dyadic_bound(f, 1.0, 1.0, 0.0);
  CHECK(plain.empiricalSum == doctest::Approx(1000.0));
  CHECK(plain.regime == GrowthRegime::Polynomial);
  CHECK(plain.empiricalSum <= plain.proofBound);

  try {
    dyadic_bound(f, 0.5, 1.0, 2.0);
    FAIL("expected HypothesisViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HypothesisViolated);
  }
}

TEST_CASE("convergence probe") {
  const std::vector<double> radii{2, 4, 8, 16, 32, 64};
  CHECK(convergence_probe(zi(), 2, 1.0, radii).saturated);
  const ConvergenceProbe log_growth = convergence_probe(zi(), 1, 1.0, radii);
  CHECK_FALSE(log_growth.saturated);
  CHECK(log_growth.lastIncrementFraction > 0.05);
  CHECK_FALSE(convergence_probe(zi(), 3, 0.0, radii).saturated);
  CHECK_THROWS_AS(convergence_probe(zi().scaled(0.5), 2, 1.0, radii), Error);
}

TEST_CASE("sum spec JSON") {
  SumSpec s;
  s.family = SumFamily::Mixed;
  s.m = 3;
  s.i = 2;
  s.dedupSigns = true;
  const SumSpec b = sum_spec_from_json(to_json(s));
  CHECK(b.family == SumFamily::Mixed);
  CHECK(b.m == 3);
  CHECK(b.i == 2);
  CHECK(b.dedupSigns);
  CHECK_THROWS_AS(parse_sum_family("other"), Error);
}
