#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "shiftsum/codes.hpp"
#include "shiftsum/errors.hpp"
#include "shiftsum/lattice.hpp"

using namespace shiftsum;

namespace {

MatrixLattice gaussian_integers() { return build_lattice({ComplexMatrix(1, 1, {cplx(1, 0)}), ComplexMatrix(1, 1, {cplx(0, 1)})}); }

std::set<std::vector<long long>> enumerated_set(const MatrixLattice& l, double radius, EnumerationOptions o = {}) {
  std::set<std::vector<long long>> s;
  enumerate(l, radius, [&](const PointView& p) {
    const bool fresh = s.insert(std::vector<long long>(p.coeffs.begin(), p.coeffs.end())).second;
    CHECK(fresh);
  }, o);
  return s;
}

// Random rank-k basis of small integers in M_{n x T}(C).
MatrixLattice random_lattice(std::mt19937_64& rng, std::size_t n, std::size_t t, std::size_t k) {
  std::uniform_int_distribution<int> d(-2, 2);
  while (true) {
    std::vector<ComplexMatrix> basis;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<cplx> e(n * t);
      for (auto& v : e) v = cplx(d(rng), d(rng));
      basis.emplace_back(n, t, e);
    }
    try {
      return build_lattice(basis);
    } catch (const Error&) {
    }
  }
}

}  // namespace

TEST_CASE("Gaussian integers") {
  const MatrixLattice z = gaussian_integers();
  CHECK(z.rank() == 2);
  CHECK(z.min_norm_sq() == doctest::Approx(1.0));
  CHECK(z.covolume() == doctest::Approx(1.0));
  CHECK(enumerated_set(z, 1.0).size() == 4);
  CHECK(enumerated_set(z, std::sqrt(2.0)).size() == 8);
  const double radii[] = {1.0, std::sqrt(2.0), 2.0};
  const auto counts = shell_counts(z, radii);
  CHECK(counts == std::vector<std::uint64_t>{4, 8, 12});
  const double half[] = {0.5};
  CHECK(shell_counts(z, half) == std::vector<std::uint64_t>{0});
}

TEST_CASE("build_lattice validation") {
  CHECK_THROWS_AS(build_lattice({}), Error);
  try {
    build_lattice({ComplexMatrix(1, 1, {cplx(1, 0)}), ComplexMatrix(1, 1, {cplx(2, 0)})});
    FAIL("expected DependentBasis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DependentBasis);
  }
  try {
    build_lattice({ComplexMatrix(1, 1), ComplexMatrix(2, 1)});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  try {
    build_lattice({ComplexMatrix(1, 1, {cplx(1, 0)}), ComplexMatrix(1, 1, {cplx(0, 1)}),
                   ComplexMatrix(1, 1, {cplx(1, 1)})});
    FAIL("expected DependentBasis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DependentBasis);
  }
}

TEST_CASE("gram and cholesky are consistent") {
  const MatrixLattice g = golden_code();
  const Eigen::MatrixXd& r = g.cholesky_upper();
  CHECK((r.transpose() * r - g.gram()).norm() < 1e-12);
  CHECK(g.gram().isApprox(g.gram().transpose()));
}

TEST_CASE("enumeration matches a box scan on random small lattices") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t k = 1 + static_cast<std::size_t>(rep % 4);
    const MatrixLattice l = random_lattice(rng, 1 + rep % 2, 1 + (rep / 2) % 2, k);
    const double radius = 1.0 + 4.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto mine = enumerated_set(l, radius);
    const auto ref = oracle::ball_points(l, radius);
    CHECK(mine == std::set<std::vector<long long>>(ref.begin(), ref.end()));
    for (const auto& z : mine) {
      std::vector<long long> neg(z);
      for (auto& v : neg) v = -v;
      CHECK(mine.count(neg) == 1);
    }
  }
}

TEST_CASE("sign-deduplicated stream keeps exactly one of each pair") {
  const MatrixLattice g = golden_code();
  EnumerationOptions o;
  o.dedupSigns = true;
  const auto half = enumerated_set(g, 2.0, o);
  const auto full = enumerated_set(g, 2.0);
  CHECK(2 * half.size() == full.size());
  for (const auto& z : half) {
    auto it = std::find_if(z.rbegin(), z.rend(), [](long long v) { return v != 0; });
    REQUIRE(it != z.rend());
    CHECK(*it > 0);
  }
}

TEST_CASE("golden code counts match the box scan at M = 2") {
  const MatrixLattice g = golden_code();
  const double radius[] = {2.0};
  CHECK(shell_counts(g, radius).front() == oracle::ball_points(g, 2.0).size());
}

TEST_CASE("golden shell counts approach the volume growth") {
  const MatrixLattice g = golden_code();
  const double radii[] = {1.0, 2.0, 4.0};
  const auto c = shell_counts(g, radii);
  const double r1 = static_cast<double>(c[1]) / static_cast<double>(c[0]);
  const double r2 = static_cast<double>(c[2]) / static_cast<double>(c[1]);
  CHECK(std::abs(r2 - 256.0) < std::abs(r1 - 256.0));
  CHECK(predicted_point_count(g, 4.0) == doctest::Approx(static_cast<double>(c[2])).epsilon(0.2));
}

TEST_CASE("partitioned enumeration covers every point once, for any thread count") {
  const MatrixLattice g = golden_code();
  for (unsigned threads : {1u, 3u}) {
    EnumerationOptions o;
    o.threads = threads;
    o.partitions = 7;
    auto states = enumerate_partitioned<std::vector<std::vector<long long>>>(
        g, 2.0, o, [] { return std::vector<std::vector<long long>>{}; },
        [](auto& st, const PointView& p) { st.emplace_back(p.coeffs.begin(), p.coeffs.end()); });
    std::set<std::vector<long long>> all;
    std::size_t total = 0;
    for (const auto& s : states) {
      total += s.size();
      all.insert(s.begin(), s.end());
    }
    CHECK(total == 1712);
    CHECK(all.size() == 1712);
  }
}

TEST_CASE("budget is enforced") {
  const MatrixLattice g = golden_code();
  EnumerationOptions o;
  o.budget = 1000;
  try {
    enumerate(g, 4.0, [](const PointView&) {}, o);
    FAIL("expected BudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
  CHECK_THROWS_AS(enumerate(g, -1.0, [](const PointView&) {}), Error);
}

TEST_CASE("points reconstruct from coefficients") {
  const MatrixLattice g = golden_code();
  for (const auto& p : collect_points(g, 1.5)) {
    const ComplexMatrix ref = oracle::combine(g, std::vector<long long>(p.coeffs.begin(), p.coeffs.end()));
    for (std::size_t t = 0; t < ref.entries().size(); ++t) CHECK(std::abs(ref.entries()[t] - p.x.entries()[t]) < 1e-9);
    CHECK(std::abs(p.normF * p.normF - oracle::norm_sq(ref)) < 1e-9 * p.normF * p.normF);
  }
  const LatticePoint withsym = PointView{std::span<const Coeff>(), ComplexMatrix::identity(2).view(), 2.0}.materialize(true);
  REQUIRE(withsym.sym.has_value());
  CHECK(withsym.sym->p(2) == doctest::Approx(1.0));
}

TEST_CASE("scaling and JSON round trip") {
  const MatrixLattice g = golden_code();
  const MatrixLattice s = g.scaled(2.0);
  CHECK(s.min_norm_sq() == doctest::Approx(4.0 * g.min_norm_sq()));
  const MatrixLattice back = lattice_from_json(lattice_to_json(g));
  CHECK(back.rank() == g.rank());
  CHECK((back.gram() - g.gram()).norm() < 1e-12);
  const auto path = std::filesystem::temp_directory_path() / "shiftsum_lattice_test.json";
  {
    std::ofstream out(path);
    out << lattice_to_json(gaussian_integers()).dump();
  }
  CHECK(load_lattice_json(path).rank() == 2);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(lattice_from_json(nlohmann::json{{"n", 1}}), Error);
}

TEST_CASE("radius bins") {
  const double radii[] = {1.0, 2.0, 3.0};
  CHECK(radius_bin(radii, 1.0) == 0);
  CHECK(radius_bin(radii, 1.5) == 1);
  CHECK(radius_bin(radii, 4.0) == 1);
  CHECK(radius_bin(radii, 9.5) == 3);
}
