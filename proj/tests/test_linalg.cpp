#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "shiftsum/compensated_sum.hpp"
#include "shiftsum/complex_matrix.hpp"
#include "shiftsum/errors.hpp"
#include "shiftsum/format.hpp"
#include "shiftsum/rational.hpp"

using namespace shiftsum;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("gram of identity and diagonal matrices") {
  CHECK(gram(ComplexMatrix::identity(2)) == ComplexMatrix::identity(2));
  const ComplexMatrix d = ComplexMatrix::diagonal({1.0, 2.0});
  CHECK(gram(d) == ComplexMatrix::diagonal({1.0, 4.0}));
}

TEST_CASE("gram matches a triple-loop product on random rectangular input") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const ComplexMatrix x = oracle::random_matrix(rng, 2, 3);
    const ComplexMatrix g = gram(x);
    const auto ref = oracle::naive_gram(x);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(g(i, j) - ref[i * 2 + j]) < 1e-12);
    CHECK(g(0, 1) == std::conj(g(1, 0)));
    CHECK(g(0, 0).imag() == 0.0);
  }
}

TEST_CASE("matrix constructor rejects bad input") {
  CHECK_THROWS_AS(ComplexMatrix(2, 2, std::vector<cplx>(3)), Error);
  CHECK_THROWS_AS(ComplexMatrix(1, 1, std::vector<cplx>{cplx(NAN, 0)}), Error);
  CHECK_THROWS_AS(determinant(ComplexMatrix(2, 3)), Error);
}

TEST_CASE("symmetric polynomials on simple matrices") {
  for (std::size_t n = 1; n <= 6; ++n) {
    const SymPolyVector p = symmetric_polys(ComplexMatrix::identity(n));
    for (std::size_t i = 1; i <= n; ++i) CHECK(p.p(i) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.p(0) == 1.0);
  }
  const SymPolyVector p = symmetric_polys(ComplexMatrix::diagonal({1.0, 2.0}));
  CHECK(p.p(1) == doctest::Approx(2.5));
  CHECK(p.p(2) == doctest::Approx(4.0));
}

TEST_CASE("symmetric polynomials agree with an eigenvalue oracle") {
  std::mt19937_64 rng(5);
  for (std::size_t n : {2u, 3u, 4u, 5u, 6u}) {
    for (int rep = 0; rep < 200; ++rep) {
      const ComplexMatrix x = oracle::random_matrix(rng, n, n + (rep % 2));
      const auto ref = oracle::sym_from_eigen(oracle::gram_eigenvalues(x));
      const SymPolyVector p = symmetric_polys(x);
      for (std::size_t i = 1; i <= n; ++i) {
        CHECK(std::abs(p.p(i) - ref[i - 1]) <= 1e-9 * std::pow(p.p(1), static_cast<double>(i)));
      }
      CHECK(rel(p.p(1) * static_cast<double>(n), oracle::norm_sq(x)) < 1e-12);
      CHECK(rel(p.p(n), gram_determinant(x.view())) < 1e-9);
    }
  }
}

TEST_CASE("shifted determinant") {
  CHECK(shifted_det(ComplexMatrix::identity(2), 1.0) == doctest::Approx(4.0));
  CHECK(shifted_det(ComplexMatrix::diagonal({1.0, 2.0}), 1.0) == doctest::Approx(10.0));
  CHECK(shifted_det(ComplexMatrix::identity(3), 0.0) == 1.0);
  CHECK_THROWS_AS(shifted_det(ComplexMatrix::identity(2), -1.0), Error);

  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    const ComplexMatrix x = oracle::random_matrix(rng, 4, 4);
    for (double c : {0.1, 1.0, 10.0}) {
      const double lu = oracle::lu_shifted_det(x, c);
      CHECK(rel(shifted_det(x, c), lu) < 1e-10);
      CHECK(rel(shifted_det_from_polys(symmetric_polys(x), c), lu) < 1e-10);
    }
  }
}

TEST_CASE("determinants") {
  std::mt19937_64 rng(3);
  for (std::size_t n = 1; n <= 5; ++n) {
    const ComplexMatrix x = oracle::random_matrix(rng, n, n);
    const cplx ref = oracle::to_eigen(x).partialPivLu().determinant();
    CHECK(std::abs(determinant(x) - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
    CHECK(rel(gram_determinant(x.view()), std::norm(ref)) < 1e-10);
  }
  const ComplexMatrix wide = oracle::random_matrix(rng, 2, 4);
  const auto lam = oracle::gram_eigenvalues(wide);
  CHECK(rel(gram_determinant(wide.view()), lam[0] * lam[1]) < 1e-9);
}

TEST_CASE("binomial coefficients") {
  CHECK(binomial(4, 2) == 6.0);
  CHECK(binomial(6, 0) == 1.0);
  CHECK(binomial(3, 5) == 0.0);
}

TEST_CASE("compensated summation is order robust") {
  std::vector<double> xs;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100000; ++i) xs.push_back(std::pow(10.0, 8 * u(rng)) * (u(rng) > 0 ? 1 : 1));
  CompensatedSum a, b;
  for (double x : xs) a += x;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) b += *it;
  CHECK(rel(a.value(), b.value()) < 1e-14);
  CompensatedSum left, right;
  for (std::size_t i = 0; i < xs.size(); ++i) (i < xs.size() / 3 ? left : right) += xs[i];
  left.merge(right);
  CHECK(left.count() == xs.size());
  CHECK(rel(left.value(), a.value()) < 1e-14);
  CHECK(a.error_bound() > 0);
}

TEST_CASE("rational arithmetic") {
  CHECK(Rational::parse("8") == Rational(8));
  CHECK(Rational::parse("-5/2") == Rational(-5, 2));
  CHECK(Rational::parse("0.25") == Rational(1, 4));
  CHECK(Rational::parse("1e-3") == Rational(1, 1000));
  CHECK(Rational(6, 4) == Rational(3, 2));
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(1, 2) / Rational(-1, 4) == Rational(-2));
  CHECK(Rational(3, 2).to_string() == "3/2");
  CHECK(Rational(-4).to_string() == "-4");
  CHECK(Rational::from_double(1.5) == Rational(3, 2));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK_THROWS_AS(Rational(1, 0), Error);
  CHECK_THROWS_AS(Rational::parse("x"), Error);
  CHECK_THROWS_AS(Rational(INT64_MAX) * Rational(INT64_MAX), Error);
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(8.0) == "8");
  CHECK(format_number(5.5) == "5.5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(INFINITY) == "inf");
}
