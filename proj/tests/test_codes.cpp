#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "shiftsum/codes.hpp"
#include "shiftsum/errors.hpp"

using namespace shiftsum;

TEST_CASE("golden code basics") {
  const MatrixLattice g = golden_code();
  CHECK(g.rank() == 8);
  CHECK(g.n() == 2);
  CHECK(g.T() == 2);
  CHECK(g.min_norm_sq() == doctest::Approx(1.0));
  const Coeff e1[8] = {1, 0, 0, 0, 0, 0, 0, 0};
  CHECK(std::abs(determinant(g.point(e1))) > 0.1);
}

TEST_CASE("golden code minimum determinant over a coefficient box") {
  const MatrixLattice g = golden_code();
  double min_det = std::numeric_limits<double>::infinity();
  std::size_t attained = 0;
  std::vector<double> dets;
  oracle::box_scan(g, std::vector<long long>(8, 2), [&](const std::vector<long long>& z, const ComplexMatrix& x) {
    if (std::all_of(z.begin(), z.end(), [](long long v) { return v == 0; })) return;
    dets.push_back(oracle::abs_det(x));
  });
  for (double d : dets) min_det = std::min(min_det, d);
  for (double d : dets) attained += std::abs(d - min_det) < 1e-9 ? 1 : 0;
  CHECK(min_det == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-9));
  CHECK(attained > 0);
  // Everything else is clearly above the minimum (a single constant).
  for (double d : dets) CHECK((std::abs(d - min_det) < 1e-9 || d > min_det + 1e-3));
}

TEST_CASE("golden NVD minimum is the same on growing balls") {
  const MatrixLattice g = golden_code();
  auto min_det = [&](double radius) {
    double m = INFINITY;
    enumerate(g, radius, [&](const PointView& p) { m = std::min(m, std::sqrt(gram_determinant(p.x))); });
    return m;
  };
  const double a = min_det(2.0);
  const double b = min_det(4.0);
  CHECK(a > 0);
  CHECK(b == doctest::Approx(a).epsilon(1e-9));
}

TEST_CASE("diagonal number field code") {
  const MatrixLattice d = diagonal_nf_code(2);
  CHECK(d.rank() == 4);
  const Coeff one[4] = {1, 0, 0, 0};
  const Coeff i[4] = {0, 1, 0, 0};
  const Coeff theta[4] = {0, 0, 1, 0};
  CHECK(std::abs(determinant(d.point(one))) == doctest::Approx(1.0));
  CHECK(std::abs(determinant(d.point(i))) == doctest::Approx(1.0));
  // N(theta) = theta (1 - theta) = -1 via the norm form a^2 + ab - b^2 at (0, 1).
  CHECK(std::abs(determinant(d.point(theta))) == doctest::Approx(1.0));
  CHECK_THROWS_AS(diagonal_nf_code(3), Error);
  try {
    diagonal_nf_code(5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedDegree);
  }
}

TEST_CASE("diagonal code determinant equals the squared norm form on [-3,3]^4") {
  const MatrixLattice d = diagonal_nf_code(2);
  std::size_t checked = 0;
  oracle::box_scan(d, std::vector<long long>(4, 3), [&](const std::vector<long long>& z, const ComplexMatrix& x) {
    if (std::all_of(z.begin(), z.end(), [](long long v) { return v == 0; })) return;
    // x = a + b theta with a = z0 + i z1, b = z2 + i z3; N = a^2 + ab - b^2 in Z[i].
    const long long ar = z[0], ai = z[1], br = z[2], bi = z[3];
    const long long nr = (ar * ar - ai * ai) + (ar * br - ai * bi) - (br * br - bi * bi);
    const long long ni = 2 * ar * ai + (ar * bi + ai * br) - 2 * br * bi;
    const long long norm_sq = nr * nr + ni * ni;
    CHECK(norm_sq >= 1);
    const double p2 = gram_determinant(x.view());
    CHECK(p2 == doctest::Approx(static_cast<double>(norm_sq)).epsilon(1e-9));
    ++checked;
  });
  CHECK(checked == 7 * 7 * 7 * 7 - 1);
}

TEST_CASE("gaussian diagonal code") {
  CHECK(gaussian_diagonal(1).rank() == 2);
  const MatrixLattice g2 = gaussian_diagonal(2);
  const Coeff z[4] = {1, 0, 1, 1};
  const ComplexMatrix x = g2.point(z);
  CHECK(std::abs(determinant(x) - cplx(1, 1)) < 1e-12);
  CHECK(gram_determinant(x.view()) == doctest::Approx(2.0));
  const double radius[] = {2.0};
  CHECK(shell_counts(g2, radius).front() == oracle::ball_points(g2, 2.0).size());
  const Coeff e1[4] = {1, 0, 0, 0};
  CHECK(gram_determinant(g2.point(e1).view()) == 0.0);
}

TEST_CASE("normalization and specs") {
  const MatrixLattice d = diagonal_nf_code(2);
  CHECK(d.min_norm_sq() == doctest::Approx(2.0));
  CHECK(unit_min_norm(d).min_norm_sq() == doctest::Approx(1.0));
  CodeSpec s;
  s.kind = CodeKind::DiagonalNf;
  s.normalization = Normalization::UnitMinNorm;
  const CodeSpec back = code_spec_from_json(to_json(s));
  CHECK(back.kind == CodeKind::DiagonalNf);
  CHECK(back.normalization == Normalization::UnitMinNorm);
  CHECK(build_code(back).min_norm_sq() == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_code_kind("nope"), Error);
}
