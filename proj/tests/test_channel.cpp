#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "shiftsum/channel.hpp"
#include "shiftsum/codes.hpp"
#include "shiftsum/detsum.hpp"
#include "shiftsum/errors.hpp"

using namespace shiftsum;

namespace {

SimResult synthetic_result(double K, double d) {
  SimResult r;
  for (double db = 10; db <= 40; db += 5) {
    SimPoint p;
    p.snrDb = db;
    p.errorRate = K * std::pow(10.0, -d * db / 10.0);
    p.errors = 100;
    p.trials = 1000;
    r.points.push_back(p);
  }
  return r;
}

ChannelConfig golden_small() {
  ChannelConfig c;
  c.n_r = 2;
  c.snrGridDb = {5, 15};
  c.trialsPerPoint = 300;
  c.seed = 9;
  c.fixedRadius = 1.0;
  return c;
}

}  // namespace

TEST_CASE("coding scheme and fixed codes") {
  const FiniteCode c = coding_scheme(golden_code(), 1.0, 16.0);
  CHECK(c.radius == doctest::Approx(2.0));
  CHECK(c.scale == doctest::Approx(0.5));
  CHECK(c.points.size() == 1712);
  CHECK(fixed_code(golden_code(), 1.0).points.size() == 16);
  CHECK(coding_scheme(golden_code(), 0.0, 100.0).points.size() == 16);
  CHECK_THROWS_AS(coding_scheme(golden_code(), 1.0, 0.5), Error);
  CHECK_THROWS_AS(coding_scheme(golden_code(), -1.0, 10.0), Error);
}

TEST_CASE("energy normalization") {
  CHECK(normalize_energy(fixed_code(gaussian_diagonal(1), 1.0), 1) == doctest::Approx(1.0));
  const std::vector<ComplexMatrix> scalars{ComplexMatrix(1, 1, std::vector<oracle::cplx>{1.0}),
                                           ComplexMatrix(1, 1, std::vector<oracle::cplx>{2.0})};
  const double theta = normalize_energy(scalars, 1);
  CHECK(theta * theta == doctest::Approx(0.4));
  const std::vector<ComplexMatrix> scaled{3.0 * scalars[0], 3.0 * scalars[1]};
  CHECK(normalize_energy(scaled, 1) == doctest::Approx(theta / 3.0));
  // Golden L(1): sixteen unit-norm 2x2 codewords.
  CHECK(normalize_energy(fixed_code(golden_code(), 1.0), 2) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("union bound over the difference ball") {
  const MatrixLattice zi = gaussian_diagonal(1);
  const FiniteCode code = fixed_code(zi, 1.0);
  // Norms {1, sqrt2} alone: 4/101^2 + 4/201^2.
  CHECK(shifted_sum(zi, 2, 100.0, std::sqrt(2.0)) == doctest::Approx(4.91e-4).epsilon(2e-3));
  // The ball of radius 2M also holds the four points of norm 2.
  const double expected = 4.0 / (101.0 * 101.0) + 4.0 / (201.0 * 201.0) + 4.0 / (401.0 * 401.0);
  CHECK(union_bound(zi, code, 1.0, 2, 100.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(union_bound(zi, code, 1.0, 2, 0.0) == doctest::Approx(12.0));
  double prev = INFINITY;
  for (double rho : {1.0, 10.0, 100.0, 1000.0}) {
    const double b = union_bound(zi, code, 1.0, 2, rho);
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("Wilson half-width") {
  CHECK(wilson_half_width(0, 100) > 0);
  CHECK(wilson_half_width(30, 100) == doctest::Approx(wilson_half_width(70, 100)));
  CHECK(wilson_half_width(50, 10000) < wilson_half_width(5, 100));
  CHECK(wilson_half_width(0, 0) == 0);
}

TEST_CASE("noiseless channel gives no errors") {
  for (Decoder d : {Decoder::MlExhaustive, Decoder::NaiveLattice}) {
    ChannelConfig c = golden_small();
    c.decoder = d;
    c.noiseScale = 0.0;
    const SimResult r = simulate(golden_code(), c);
    for (const auto& p : r.points) CHECK(p.errors == 0);
  }
}

TEST_CASE("simulation is reproducible and independent of the thread count") {
  ChannelConfig c = golden_small();
  const SimResult a = simulate(golden_code(), c);
  const SimResult b = simulate(golden_code(), c);
  c.threads = 3;
  const SimResult t = simulate(golden_code(), c);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_json() == t.to_json());
  CHECK(a.points[0].errors > a.points[1].errors);
  CHECK(a.points[0].codeSize == 16);
  CHECK(a.points[0].theta == doctest::Approx(std::sqrt(2.0)));
  c.seed = 10;
  CHECK(simulate(golden_code(), c).to_json() != a.to_json());
  CHECK(a.to_csv().rfind("snr_db,error_rate,errors,trials,ci_halfwidth\n", 0) == 0);
}

TEST_CASE("ML decoding beats naive lattice decoding on matched seeds") {
  ChannelConfig c = golden_small();
  c.snrGridDb = {0, 10};
  c.trialsPerPoint = 1000;
  const SimResult ml = simulate(golden_code(), c);
  c.decoder = Decoder::NaiveLattice;
  const SimResult naive = simulate(golden_code(), c);
  for (std::size_t j = 0; j < ml.points.size(); ++j) {
    CHECK(ml.points[j].errorRate <=
          naive.points[j].errorRate + 3 * (ml.points[j].wilsonHalfWidth + naive.points[j].wilsonHalfWidth));
  }
}

TEST_CASE("simulation input validation") {
  ChannelConfig c = golden_small();
  c.codeCap = 10;
  try {
    simulate(golden_code(), c);
    FAIL("expected CodeTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CodeTooLarge);
  }
  c = golden_small();
  c.multiplexingGain = 0.5;
  CHECK_THROWS_AS(simulate(golden_code(), c), Error);
  c = golden_small();
  c.snrGridDb = {10, 5};
  CHECK_THROWS_AS(simulate(golden_code(), c), Error);
  c = golden_small();
  c.n_t = 3;
  CHECK_THROWS_AS(simulate(golden_code(), c), Error);
}

TEST_CASE("scheme mode grows the code with SNR") {
  ChannelConfig c;
  c.n_r = 2;
  c.snrGridDb = {0, 12};
  c.trialsPerPoint = 50;
  c.multiplexingGain = 0.5;
  const SimResult r = simulate(golden_code(), c);
  CHECK(r.points[0].codeSize <= r.points[1].codeSize);
  CHECK(r.points[1].scale < 1.0);
}

TEST_CASE("channel config JSON") {
  ChannelConfig c = golden_small();
  c.decoder = Decoder::NaiveLattice;
  const ChannelConfig b = channel_config_from_json(to_json(c));
  CHECK(to_json(b) == to_json(c));
  CHECK(parse_decoder("naive") == Decoder::NaiveLattice);
  CHECK(parse_decoder("ml") == Decoder::MlExhaustive);
  try {
    channel_config_from_json(nlohmann::json{{"n_r", "two"}});
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

TEST_CASE("naive lattice decoding examples") {
  const MatrixLattice zi = gaussian_diagonal(1);
  const ComplexMatrix h(1, 1, std::vector<oracle::cplx>{2.0});
  const ComplexMatrix y(1, 1, std::vector<oracle::cplx>{oracle::cplx(2.0, 0.8)});
  const LatticePoint p = naive_lattice_decode(zi, h, y, 1.0, 1.0);
  CHECK(p.coeffs == std::vector<Coeff>{1, 0});

  const MatrixLattice g = golden_code();
  const std::vector<Coeff> z{1, -2, 0, 3, -1, 0, 2, 1};
  const ComplexMatrix x = g.point(z);
  const LatticePoint q = naive_lattice_decode(g, ComplexMatrix::identity(2), x, 1.0, 1.0);
  CHECK(q.coeffs == z);

  try {
    naive_lattice_decode(zi, h, y, NAN, 1.0);
    FAIL("expected RadiusOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RadiusOverflow);
  }
}

TEST_CASE("naive lattice decoding matches an exhaustive search") {
  std::mt19937_64 rng(21);
  struct Shape {
    std::size_t n, T, k;
  };
  const Shape shapes[] = {{1, 1, 2}, {2, 1, 3}, {2, 1, 4}, {1, 2, 4}};
  int mismatches = 0;
  int checked = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const Shape s = shapes[inst % 4];
    std::vector<ComplexMatrix> basis;
    for (std::size_t j = 0; j < s.k; ++j) basis.push_back(oracle::random_matrix(rng, s.n, s.T));
    const MatrixLattice l = build_lattice(basis);
    const ComplexMatrix h = oracle::random_matrix(rng, 2, s.n, std::sqrt(0.5));
    std::uniform_int_distribution<int> coef(-2, 2);
    std::vector<Coeff> z(s.k);
    for (auto& v : z) v = coef(rng);
    const ComplexMatrix sent = l.point(z);
    const ComplexMatrix noise = oracle::random_matrix(rng, 2, s.T, 0.3);
    const ComplexMatrix y = h * sent + noise;
    const LatticePoint got = naive_lattice_decode(l, h, y, 1.0, 1.0);
    const auto ref = oracle::exhaustive_cvp(l, h, y, 1.0, std::vector<long long>(z.begin(), z.end()));
    if (ref.empty()) continue;
    ++checked;
    std::vector<long long> mine(got.coeffs.begin(), got.coeffs.end());
    if (mine != ref) {
      ++mismatches;
      const auto d = [&](const std::vector<long long>& c) {
        return (oracle::to_eigen(y) - oracle::to_eigen(h) * oracle::to_eigen(oracle::combine(l, c))).squaredNorm();
      };
      MESSAGE("instance " << inst << " decoder " << d(mine) << " oracle " << d(ref));
    }
  }
  CHECK(mismatches == 0);
  CHECK(checked >= 180);
}

TEST_CASE("diversity slope") {
  CHECK(diversity_slope(synthetic_result(1.0, 4.0), 3) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(diversity_slope(synthetic_result(37.0, 2.0), 4) == doctest::Approx(2.0).epsilon(1e-9));
  SimResult thin = synthetic_result(1.0, 4.0);
  for (auto& p : thin.points) p.errors = 5;
  try {
    diversity_slope(thin, 3);
    FAIL("expected InsufficientStatistics");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientStatistics);
  }
  CHECK_THROWS_AS(diversity_slope(synthetic_result(1.0, 4.0), 1), Error);
}
