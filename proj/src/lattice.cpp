#include "shiftsum/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "shiftsum/errors.hpp"

namespace shiftsum {

namespace {

Eigen::VectorXd realify(const ComplexMatrix& m) {
  const auto e = m.entries();
  Eigen::VectorXd v(2 * e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    v(2 * i) = e[i].real();
    v(2 * i + 1) = e[i].imag();
  }
  return v;
}

double inflated_radius_sq(double radius) { return radius * radius * (1.0 + kRadiusTolerance); }

// Depth-first Fincke-Pohst enumeration over the coefficient space using the
// factorization gram = R^T R. Partial matrix sums are kept per level so the
// leaf only adds one basis matrix.
class Enumerator {
 public:
  Enumerator(const MatrixLattice& lattice, double radius, const EnumerationOptions& opts, std::size_t part,
             std::size_t parts, const PointVisitor& visit)
      : lat_(lattice),
        k_(lattice.rank()),
        nt_(lattice.n() * lattice.T()),
        r_(lattice.cholesky_upper()),
        limit_sq_(inflated_radius_sq(radius)),
        // Slightly looser bound for pruning so rounding in the triangular
        // recurrence never drops a point; membership uses limit_sq_.
        prune_sq_(limit_sq_ * (1.0 + 1e-9) + 1e-300),
        opts_(opts),
        part_(part),
        parts_(parts),
        visit_(visit),
        z_(k_, 0),
        partial_(k_ + 1, 0.0),
        acc_((k_ + 1) * nt_, cplx(0.0)),
        basis_(k_ * nt_) {
    for (std::size_t j = 0; j < k_; ++j) {
      const auto e = lattice.basis()[j].entries();
      std::copy(e.begin(), e.end(), basis_.begin() + static_cast<std::ptrdiff_t>(j * nt_));
    }
  }

  void run() { descend(k_ - 1, true); }

 private:
  void descend(std::size_t level, bool all_zero_above) {
    const double rii = r_(level, level);
    double center = 0.0;
    for (std::size_t j = level + 1; j < k_; ++j) center -= r_(level, j) * static_cast<double>(z_[j]);
    center /= rii;
    const double room = prune_sq_ - partial_[level + 1];
    if (room < 0) return;
    const double half = std::sqrt(room) / rii;
    Coeff lo = static_cast<Coeff>(std::ceil(center - half));
    const Coeff hi = static_cast<Coeff>(std::floor(center + half));
    const Coeff lo_full = lo;
    if (opts_.dedupSigns && all_zero_above) lo = std::max<Coeff>(lo, 0);

    cplx* acc = acc_.data() + level * nt_;
    const cplx* above = acc_.data() + (level + 1) * nt_;
    const cplx* b = basis_.data() + level * nt_;

    for (Coeff z = lo; z <= hi; ++z) {
      if (level == k_ - 1 && parts_ > 1 && static_cast<std::size_t>(z - lo_full) % parts_ != part_) continue;
      const double diff = static_cast<double>(z) - center;
      const double part_sq = partial_[level + 1] + rii * rii * diff * diff;
      if (part_sq > prune_sq_) continue;
      z_[level] = z;
      partial_[level] = part_sq;
      const double zd = static_cast<double>(z);
      for (std::size_t t = 0; t < nt_; ++t) acc[t] = above[t] + zd * b[t];
      const bool zero_here = all_zero_above && z == 0;
      if (level > 0) {
        descend(level - 1, zero_here);
      } else if (!zero_here) {
        emit(acc);
      }
    }
    z_[level] = 0;
  }

  void emit(const cplx* x) {
    double norm_sq = 0;
    for (std::size_t t = 0; t < nt_; ++t) norm_sq += std::norm(x[t]);
    if (norm_sq > limit_sq_) return;
    if (++count_ > opts_.budget) {
      throw Error(ErrorCode::BudgetExceeded, "enumeration produced more than " + std::to_string(opts_.budget) +
                                                 " points");
    }
    PointView v{z_, MatrixView{lat_.n(), lat_.T(), std::span<const cplx>(x, nt_)}, norm_sq};
    visit_(v);
  }

  const MatrixLattice& lat_;
  std::size_t k_;
  std::size_t nt_;
  const Eigen::MatrixXd& r_;
  double limit_sq_;
  double prune_sq_;
  const EnumerationOptions& opts_;
  std::size_t part_;
  std::size_t parts_;
  const PointVisitor& visit_;
  std::vector<Coeff> z_;
  std::vector<double> partial_;
  std::vector<cplx> acc_;
  std::vector<cplx> basis_;
  std::uint64_t count_ = 0;
};

}  // namespace

MatrixLattice MatrixLattice::build(std::vector<ComplexMatrix> basis) {
  if (basis.empty()) throw Error(ErrorCode::InvalidArgument, "lattice basis is empty");
  const std::size_t n = basis.front().rows();
  const std::size_t t = basis.front().cols();
  for (const auto& b : basis) {
    if (b.rows() != n || b.cols() != t) {
      throw Error(ErrorCode::DimensionMismatch, "basis matrices must all be " + std::to_string(n) + "x" +
                                                    std::to_string(t));
    }
  }
  const std::size_t k = basis.size();
  if (k > 2 * n * t) {
    throw Error(ErrorCode::DependentBasis, "rank " + std::to_string(k) + " exceeds real dimension 2nT");
  }

  MatrixLattice lat;
  lat.n_ = n;
  lat.t_ = t;
  lat.basis_ = std::move(basis);

  Eigen::MatrixXd real(2 * n * t, k);
  for (std::size_t j = 0; j < k; ++j) real.col(static_cast<Eigen::Index>(j)) = realify(lat.basis_[j]);
  lat.gram_ = real.transpose() * real;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lat.gram_, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmax > 0) || !(lmin > 1e-12 * lmax)) {
    throw Error(ErrorCode::DependentBasis, "basis is numerically dependent over R (Gram condition > 1e12)");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lat.gram_);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::DependentBasis, "Gram matrix is not positive definite");
  lat.chol_upper_ = llt.matrixU();
  lat.covolume_ = 1.0;
  for (std::size_t i = 0; i < k; ++i) lat.covolume_ *= lat.chol_upper_(i, i);

  // A basis vector realizes min_i G_ii, so the shortest vector lies inside
  // that radius.
  const double probe = std::sqrt(lat.gram_.diagonal().minCoeff());
  double best = std::numeric_limits<double>::infinity();
  EnumerationOptions opts;
  opts.dedupSigns = true;
  enumerate_partition(lat, probe, 0, 1, [&](const PointView& v) { best = std::min(best, v.normSq); }, opts);
  lat.min_norm_sq_ = best;
  if (!(best > 0) || !std::isfinite(best)) throw Error(ErrorCode::NumericalFailure, "minimum norm search failed");
  return lat;
}

ComplexMatrix MatrixLattice::point(std::span<const Coeff> coeffs) const {
  if (coeffs.size() != rank()) throw Error(ErrorCode::DimensionMismatch, "coefficient vector length != rank");
  std::vector<cplx> e(n_ * t_, cplx(0.0));
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const auto b = basis_[j].entries();
    const double z = static_cast<double>(coeffs[j]);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += z * b[i];
  }
  return ComplexMatrix(n_, t_, std::move(e));
}

MatrixLattice MatrixLattice::scaled(double beta) const {
  if (!(beta > 0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  std::vector<ComplexMatrix> b;
  b.reserve(basis_.size());
  for (const auto& m : basis_) b.push_back(cplx(beta) * m);
  return build(std::move(b));
}

LatticePoint PointView::materialize(bool with_sym) const {
  LatticePoint p{std::vector<Coeff>(coeffs.begin(), coeffs.end()), ComplexMatrix(x.rows, x.cols, x.data),
                 std::sqrt(normSq), std::nullopt};
  if (with_sym) p.sym = symmetric_polys(x);
  return p;
}

double predicted_point_count(const MatrixLattice& lattice, double radius) {
  const double k = static_cast<double>(lattice.rank());
  const double log_vol = 0.5 * k * std::log(std::numbers::pi) - std::lgamma(0.5 * k + 1.0) + k * std::log(radius);
  return std::exp(log_vol) / lattice.covolume();
}

void check_enumeration_budget(const MatrixLattice& lattice, double radius, const EnumerationOptions& opts) {
  if (!(radius > 0) || !std::isfinite(radius)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  const double predicted = predicted_point_count(lattice, radius);
  if (predicted > static_cast<double>(opts.budget)) {
    throw Error(ErrorCode::BudgetExceeded, "predicted " + std::to_string(predicted) + " points at radius " +
                                               std::to_string(radius) + " exceeds budget " +
                                               std::to_string(opts.budget));
  }
}

void enumerate_partition(const MatrixLattice& lattice, double radius, std::size_t part, std::size_t parts,
                         const PointVisitor& visit, const EnumerationOptions& opts) {
  if (!(radius > 0) || !std::isfinite(radius)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  if (parts == 0 || part >= parts) throw Error(ErrorCode::InvalidArgument, "bad partition index");
  Enumerator e(lattice, radius, opts, part, parts, visit);
  e.run();
}

void enumerate(const MatrixLattice& lattice, double radius, const PointVisitor& visit,
               const EnumerationOptions& opts) {
  check_enumeration_budget(lattice, radius, opts);
  enumerate_partition(lattice, radius, 0, 1, visit, opts);
}

std::vector<LatticePoint> collect_points(const MatrixLattice& lattice, double radius,
                                         const EnumerationOptions& opts) {
  std::vector<LatticePoint> out;
  enumerate(lattice, radius, [&](const PointView& v) { out.push_back(v.materialize()); }, opts);
  return out;
}

std::size_t radius_bin(std::span<const double> radii, double norm_sq) {
  // radii are increasing, so the first radius that admits the point wins.
  auto it = std::lower_bound(radii.begin(), radii.end(), norm_sq,
                             [](double r, double ns) { return inflated_radius_sq(r) < ns; });
  return static_cast<std::size_t>(it - radii.begin());
}

std::vector<std::uint64_t> shell_counts(const MatrixLattice& lattice, std::span<const double> radii,
                                        const EnumerationOptions& opts) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0)) throw Error(ErrorCode::InvalidArgument, "radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw Error(ErrorCode::InvalidArgument, "radii must be increasing");
  }
  std::vector<std::uint64_t> counts(radii.size(), 0);
  if (radii.empty()) return counts;
  using Bins = std::vector<std::uint64_t>;
  auto states = enumerate_partitioned<Bins>(
      lattice, radii.back(), opts, [&] { return Bins(radii.size(), 0); },
      [&](Bins& bins, const PointView& v) {
        const std::size_t b = radius_bin(radii, v.normSq);
        if (b < bins.size()) ++bins[b];
      });
  for (const auto& s : states)
    for (std::size_t i = 0; i < s.size(); ++i) counts[i] += s[i];
  const std::uint64_t mult = opts.dedupSigns ? 2 : 1;
  std::uint64_t run = 0;
  for (auto& c : counts) {
    run += c;
    c = run * mult;
  }
  return counts;
}

nlohmann::json lattice_to_json(const MatrixLattice& lattice) {
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& b : lattice.basis()) {
    nlohmann::json entries = nlohmann::json::array();
    for (const cplx& z : b.entries()) entries.push_back({z.real(), z.imag()});
    basis.push_back(std::move(entries));
  }
  return {{"n", lattice.n()}, {"T", lattice.T()}, {"basis", std::move(basis)}};
}

MatrixLattice lattice_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto t = j.at("T").get<std::size_t>();
    std::vector<ComplexMatrix> basis;
    for (const auto& bj : j.at("basis")) {
      std::vector<cplx> e;
      for (const auto& z : bj) {
        if (!z.is_array() || z.size() != 2) throw Error(ErrorCode::ConfigError, "entries must be [re, im] pairs");
        e.emplace_back(z[0].get<double>(), z[1].get<double>());
      }
      if (e.size() != n * t) {
        throw Error(ErrorCode::DimensionMismatch, "basis matrix has " + std::to_string(e.size()) +
                                                      " entries, expected n*T = " + std::to_string(n * t));
      }
      basis.emplace_back(n, t, std::move(e));
    }
    return MatrixLattice::build(std::move(basis));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ConfigError, std::string("lattice JSON: ") + ex.what());
  }
}

MatrixLattice load_lattice_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + ex.what());
  }
  return lattice_from_json(j);
}

namespace detail {

void run_partitions(std::size_t parts, unsigned threads, const std::function<void(std::size_t)>& task) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, parts));
  if (workers <= 1) {
    for (std::size_t p = 0; p < parts; ++p) task(p);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t p = next++; p < parts; p = next++) {
        try {
          task(p);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

}  // namespace shiftsum
