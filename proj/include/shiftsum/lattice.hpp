#pragma once

// Rank-k matrix lattices Z B_1 + ... + Z B_k in M_{n x T}(C) and sphere
// enumeration of L(M) = {X in L : 0 < ||X||_F <= M}.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "shiftsum/complex_matrix.hpp"

namespace shiftsum {

using Coeff = std::int64_t;

/// Points with ||X||_F^2 <= M^2 (1 + kRadiusTolerance) belong to L(M), so a
/// radius computed in floating point (sqrt(2), 4*sqrt(2), ...) keeps the lattice
/// points lying exactly on its sphere.
inline constexpr double kRadiusTolerance = 1e-10;

inline constexpr std::uint64_t kDefaultPointBudget = std::uint64_t{1} << 31;

class MatrixLattice {
 public:
  /// Validates and caches the real Gram matrix, its Cholesky factor and the
  /// squared minimum norm. Throws DimensionMismatch or DependentBasis.
  static MatrixLattice build(std::vector<ComplexMatrix> basis);

  std::size_t n() const noexcept { return n_; }
  std::size_t T() const noexcept { return t_; }
  std::size_t rank() const noexcept { return basis_.size(); }
  const std::vector<ComplexMatrix>& basis() const noexcept { return basis_; }

  /// Gram matrix under <A, B> = Re tr(A B*).
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  /// Upper-triangular R with gram() == R^T R.
  const Eigen::MatrixXd& cholesky_upper() const noexcept { return chol_upper_; }
  double min_norm_sq() const noexcept { return min_norm_sq_; }
  /// sqrt(det gram()), the volume of a fundamental cell in R^k.
  double covolume() const noexcept { return covolume_; }

  ComplexMatrix point(std::span<const Coeff> coeffs) const;

  /// The lattice beta * L (basis scaled by beta > 0).
  MatrixLattice scaled(double beta) const;

 private:
  MatrixLattice() = default;

  std::size_t n_ = 0;
  std::size_t t_ = 0;
  std::vector<ComplexMatrix> basis_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd chol_upper_;
  double min_norm_sq_ = 0;
  double covolume_ = 0;
};

inline MatrixLattice build_lattice(std::vector<ComplexMatrix> basis) {
  return MatrixLattice::build(std::move(basis));
}

/// A materialized element of L(M).
struct LatticePoint {
  std::vector<Coeff> coeffs;
  ComplexMatrix x;
  double normF = 0;
  std::optional<SymPolyVector> sym;
};

/// Borrowed view of the point currently visited by the enumerator. Only
/// valid for the duration of the callback.
struct PointView {
  std::span<const Coeff> coeffs;
  MatrixView x;
  double normSq = 0;

  LatticePoint materialize(bool with_sym = false) const;
};

using PointVisitor = std::function<void(const PointView&)>;

struct EnumerationOptions {
  /// Yield exactly one of +-X (the one whose last nonzero coefficient is
  /// positive).
  bool dedupSigns = false;
  /// Cap on the volume-heuristic point count and on the actual count.
  std::uint64_t budget = kDefaultPointBudget;
  /// Worker threads for partitioned runs; 0 means hardware concurrency.
  unsigned threads = 1;
  /// Fixed partition count so results do not depend on `threads`.
  std::size_t partitions = 16;
};

/// Gaussian-heuristic estimate V_k M^k / covolume of |L(M)|.
double predicted_point_count(const MatrixLattice& lattice, double radius);

/// Throws BudgetExceeded when the predicted count exceeds opts.budget.
void check_enumeration_budget(const MatrixLattice& lattice, double radius, const EnumerationOptions& opts);

/// Visits every point of L(M) exactly once (or one of each +-pair).
/// Throws BudgetExceeded when the predicted count exceeds the budget.
void enumerate(const MatrixLattice& lattice, double radius, const PointVisitor& visit,
               const EnumerationOptions& opts = {});

/// Visits the subset of L(M) whose top coefficient z_{k-1} satisfies
/// (z_{k-1} - lo) mod parts == part. The partitions are disjoint and cover L(M).
void enumerate_partition(const MatrixLattice& lattice, double radius, std::size_t part, std::size_t parts,
                         const PointVisitor& visit, const EnumerationOptions& opts = {});

/// Runs one partition per task on `opts.threads` workers and returns the
/// per-partition states in partition order, so a left-to-right merge is
/// deterministic.
template <class State>
std::vector<State> enumerate_partitioned(const MatrixLattice& lattice, double radius, const EnumerationOptions& opts,
                                         const std::function<State()>& init,
                                         const std::function<void(State&, const PointView&)>& visit);

std::vector<LatticePoint> collect_points(const MatrixLattice& lattice, double radius,
                                         const EnumerationOptions& opts = {});

/// |L(M)| for each radius, from a single enumeration at the largest radius.
std::vector<std::uint64_t> shell_counts(const MatrixLattice& lattice, std::span<const double> radii,
                                        const EnumerationOptions& opts = {});

/// Smallest index j with normSq <= radii[j]^2 (1 + tol), or radii.size().
std::size_t radius_bin(std::span<const double> radii, double normSq);

// {"n":..., "T":..., "basis":[[[re,im],...],...]}, one flat row-major entry
// list per basis matrix.
nlohmann::json lattice_to_json(const MatrixLattice& lattice);
MatrixLattice lattice_from_json(const nlohmann::json& j);
MatrixLattice load_lattice_json(const std::filesystem::path& path);

namespace detail {
void run_partitions(std::size_t parts, unsigned threads, const std::function<void(std::size_t)>& task);
}

template <class State>
std::vector<State> enumerate_partitioned(const MatrixLattice& lattice, double radius, const EnumerationOptions& opts,
                                         const std::function<State()>& init,
                                         const std::function<void(State&, const PointView&)>& visit) {
  const std::size_t parts = std::max<std::size_t>(1, opts.partitions);
  check_enumeration_budget(lattice, radius, opts);
  std::vector<State> states;
  states.reserve(parts);
  for (std::size_t p = 0; p < parts; ++p) states.push_back(init());
  detail::run_partitions(parts, opts.threads, [&](std::size_t p) {
    State& st = states[p];
    enumerate_partition(lattice, radius, p, parts, [&](const PointView& v) { visit(st, v); }, opts);
  });
  return states;
}

}  // namespace shiftsum
