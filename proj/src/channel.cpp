#include "shiftsum/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "shiftsum/detsum.hpp"
#include "shiftsum/errors.hpp"
#include "shiftsum/format.hpp"

namespace shiftsum {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One independent stream per (seed, snr point, trial): the result never
// depends on how trials are split across workers.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t snr_index, std::uint64_t trial) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (snr_index * 0xd1b54a32d192ed03ULL));
  return splitmix64(s ^ trial);
}

ComplexMatrix gaussian_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double sigma) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  std::vector<cplx> e(rows * cols);
  for (auto& v : e) {
    const double re = nd(rng);
    const double im = nd(rng);
    v = sigma * cplx(re, im);
  }
  return ComplexMatrix(rows, cols, std::move(e));
}

double dist_sq(const ComplexMatrix& a, const ComplexMatrix& b) {
  double s = 0;
  const auto x = a.entries();
  const auto y = b.entries();
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(x[i] - y[i]);
  return s;
}

Eigen::VectorXd realify(const ComplexMatrix& m) {
  const auto e = m.entries();
  Eigen::VectorXd v(2 * e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    v(2 * i) = e[i].real();
    v(2 * i + 1) = e[i].imag();
  }
  return v;
}

class SphereDecoder {
 public:
  SphereDecoder(const Eigen::MatrixXd& r, const Eigen::VectorXd& yt, std::uint64_t budget)
      : r_(r), y_(yt), k_(static_cast<std::size_t>(r.cols())), budget_(budget), z_(k_, 0), best_(k_, 0) {}

  std::vector<Coeff> run() {
    babai();
    best_dist_ = babai_dist_;
    // The Babai point lies on the initial sphere, so the search always ends
    // with a point at least as close.
    limit_ = babai_dist_ * (1.0 + 1e-12) + 1e-300;
    search(k_ - 1, 0.0);
    return best_;
  }

 private:
  double center(std::size_t level) const {
    double c = y_(static_cast<Eigen::Index>(level));
    for (std::size_t j = level + 1; j < k_; ++j) c -= r_(level, j) * static_cast<double>(z_[j]);
    return c / r_(level, level);
  }

  static Coeff round_checked(double c) {
    if (!std::isfinite(c) || std::abs(c) > 1e15) {
      throw Error(ErrorCode::RadiusOverflow, "sphere decoder center out of range");
    }
    return static_cast<Coeff>(std::llround(c));
  }

  void babai() {
    double d = 0;
    for (std::size_t l = k_; l-- > 0;) {
      const double c = center(l);
      z_[l] = round_checked(c);
      const double e = r_(l, l) * (c - static_cast<double>(z_[l]));
      d += e * e;
    }
    best_ = z_;
    babai_dist_ = d;
  }

  void search(std::size_t level, double partial) {
    const double c = center(level);
    const double rii = r_(level, level);
    const Coeff z0 = round_checked(c);
    // Schnorr-Euchner zig-zag: z0, z0+1, z0-1, ... (or mirrored), stopping
    // each direction once it leaves the sphere.
    const int first = c >= static_cast<double>(z0) ? 1 : -1;
    bool up_open = true;
    bool down_open = true;
    for (Coeff step = 0; up_open || down_open; ++step) {
      for (int dir : {first, -first}) {
        if (step == 0 && dir != first) continue;
        bool& open = (dir > 0) ? up_open : down_open;
        if (step > 0 && !open) continue;
        const Coeff z = z0 + dir * step;
        const double e = rii * (c - static_cast<double>(z));
        const double d = partial + e * e;
        if (d > limit_) {
          if (step == 0) return;
          open = false;
          continue;
        }
        if (++nodes_ > budget_) throw Error(ErrorCode::RadiusOverflow, "sphere decoder node budget exhausted");
        z_[level] = z;
        if (level == 0) {
          if (d < best_dist_) {
            best_dist_ = d;
            best_ = z_;
            limit_ = d;
          }
        } else {
          search(level - 1, d);
        }
      }
    }
  }

  const Eigen::MatrixXd& r_;
  const Eigen::VectorXd& y_;
  std::size_t k_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<Coeff> z_;
  std::vector<Coeff> best_;
  double babai_dist_ = 0;
  double best_dist_ = 0;
  double limit_ = 0;
};

void validate(const MatrixLattice& lattice, const ChannelConfig& cfg) {
  if (cfg.n_r < 1) throw Error(ErrorCode::InvalidArgument, "n_r must be positive");
  if (cfg.n_t != 0 && static_cast<std::size_t>(cfg.n_t) != lattice.n()) {
    throw Error(ErrorCode::DimensionMismatch, "n_t does not match the lattice");
  }
  if (cfg.T != 0 && static_cast<std::size_t>(cfg.T) != lattice.T()) {
    throw Error(ErrorCode::DimensionMismatch, "T does not match the lattice");
  }
  if (cfg.snrGridDb.empty()) throw Error(ErrorCode::InvalidArgument, "empty SNR grid");
  for (std::size_t i = 1; i < cfg.snrGridDb.size(); ++i) {
    if (!(cfg.snrGridDb[i] > cfg.snrGridDb[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "SNR grid must be strictly increasing");
    }
  }
  if (cfg.trialsPerPoint == 0) throw Error(ErrorCode::InvalidArgument, "trialsPerPoint must be positive");
  if (cfg.multiplexingGain.has_value() == cfg.fixedRadius.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of multiplexingGain and fixedRadius");
  }
  if (!(cfg.noiseScale >= 0)) throw Error(ErrorCode::InvalidArgument, "noiseScale must be nonnegative");
}

}  // namespace

std::string to_string(Decoder d) { return d == Decoder::MlExhaustive ? "ml-exhaustive" : "naive-lattice"; }

Decoder parse_decoder(const std::string& s) {
  if (s == "ml-exhaustive" || s == "ml") return Decoder::MlExhaustive;
  if (s == "naive-lattice" || s == "naive") return Decoder::NaiveLattice;
  throw Error(ErrorCode::InvalidArgument, "unknown decoder '" + s + "'");
}

nlohmann::json to_json(const ChannelConfig& c) {
  nlohmann::json j{{"n_t", c.n_t},
                   {"T", c.T},
                   {"n_r", c.n_r},
                   {"snrGridDb", c.snrGridDb},
                   {"trialsPerPoint", c.trialsPerPoint},
                   {"seed", c.seed},
                   {"decoder", to_string(c.decoder)},
                   {"noiseScale", c.noiseScale},
                   {"codeCap", c.codeCap},
                   {"decodeNodeBudget", c.decodeNodeBudget}};
  if (c.multiplexingGain) j["multiplexingGain"] = *c.multiplexingGain;
  if (c.fixedRadius) j["fixedRadius"] = *c.fixedRadius;
  return j;
}

ChannelConfig channel_config_from_json(const nlohmann::json& j) {
  try {
    ChannelConfig c;
    c.n_t = j.value("n_t", 0);
    c.T = j.value("T", 0);
    c.n_r = j.value("n_r", 1);
    c.snrGridDb = j.at("snrGridDb").get<std::vector<double>>();
    c.trialsPerPoint = j.value("trialsPerPoint", c.trialsPerPoint);
    c.seed = j.value("seed", c.seed);
    c.decoder = parse_decoder(j.value("decoder", std::string("ml-exhaustive")));
    if (j.contains("multiplexingGain")) c.multiplexingGain = j.at("multiplexingGain").get<double>();
    if (j.contains("fixedRadius")) c.fixedRadius = j.at("fixedRadius").get<double>();
    c.noiseScale = j.value("noiseScale", 1.0);
    c.codeCap = j.value("codeCap", c.codeCap);
    c.decodeNodeBudget = j.value("decodeNodeBudget", c.decodeNodeBudget);
    c.threads = j.value("threads", 1u);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("channel config: ") + e.what());
  }
}

std::string SimResult::to_csv() const {
  std::string out = "snr_db,error_rate,errors,trials,ci_halfwidth\n";
  for (const auto& p : points) {
    out += format_number(p.snrDb) + "," + format_number(p.errorRate) + "," + std::to_string(p.errors) + "," +
           std::to_string(p.trials) + "," + format_number(p.wilsonHalfWidth) + "\n";
  }
  return out;
}

nlohmann::json SimResult::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    pts.push_back({{"snrDb", p.snrDb},
                   {"errorRate", p.errorRate},
                   {"errors", p.errors},
                   {"trials", p.trials},
                   {"wilsonHalfWidth", p.wilsonHalfWidth},
                   {"codeSize", p.codeSize},
                   {"theta", p.theta},
                   {"scale", p.scale}});
  }
  return {{"decoder", shiftsum::to_string(decoder)},
          {"seed", seed},
          {"n_r", n_r},
          {"energyConvention", energyConvention},
          {"points", pts}};
}

double wilson_half_width(std::uint64_t errors, std::uint64_t trials, double z) {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  return z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

FiniteCode coding_scheme(const MatrixLattice& lattice, double r, double rho, const EnumerationOptions& opts) {
  if (!(r >= 0)) throw Error(ErrorCode::InvalidArgument, "multiplexing gain must be nonnegative");
  if (!(rho >= 1)) throw Error(ErrorCode::InvalidArgument, "coding scheme needs rho >= 1");
  const double expo = r * static_cast<double>(lattice.T()) / static_cast<double>(lattice.rank());
  const double radius = std::pow(rho, expo);
  FiniteCode code;
  code.radius = radius;
  code.scale = 1.0 / radius;
  code.points = collect_points(lattice, radius, opts);
  return code;
}

FiniteCode fixed_code(const MatrixLattice& lattice, double radius, const EnumerationOptions& opts) {
  FiniteCode code;
  code.radius = radius;
  code.scale = 1.0;
  code.points = collect_points(lattice, radius, opts);
  return code;
}

double normalize_energy(std::span<const ComplexMatrix> codewords, std::size_t T) {
  if (codewords.empty()) throw Error(ErrorCode::InvalidArgument, "empty code");
  double energy = 0;
  for (const auto& x : codewords) energy += x.frobenius_norm_sq();
  if (!(energy > 0)) throw Error(ErrorCode::InvalidArgument, "code has zero energy");
  return std::sqrt(static_cast<double>(T) * static_cast<double>(codewords.size()) / energy);
}

double normalize_energy(const FiniteCode& code, std::size_t T) {
  if (code.points.empty()) throw Error(ErrorCode::InvalidArgument, "empty code");
  double energy = 0;
  for (const auto& p : code.points) energy += p.normF * p.normF;
  energy *= code.scale * code.scale;
  if (!(energy > 0)) throw Error(ErrorCode::InvalidArgument, "code has zero energy");
  return std::sqrt(static_cast<double>(T) * static_cast<double>(code.points.size()) / energy);
}

double union_bound(const MatrixLattice& lattice, const FiniteCode& code, double theta, int n_r, double rho,
                   const EnumerationOptions& opts) {
  if (n_r < 1) throw Error(ErrorCode::InvalidArgument, "n_r must be positive");
  if (!(rho >= 0)) throw Error(ErrorCode::InvalidArgument, "rho must be nonnegative");
  const double c = rho * theta * theta * code.scale * code.scale;
  EnumerationOptions o = opts;
  o.dedupSigns = true;
  return shifted_sum(lattice, n_r, c, 2.0 * code.radius, o);
}

LatticePoint naive_lattice_decode(const MatrixLattice& lattice, const ComplexMatrix& H, const ComplexMatrix& y,
                                  double theta, double scale, std::uint64_t nodeBudget) {
  if (H.cols() != lattice.n()) throw Error(ErrorCode::DimensionMismatch, "H must have n columns");
  if (y.rows() != H.rows() || y.cols() != lattice.T()) {
    throw Error(ErrorCode::DimensionMismatch, "y must be n_r x T");
  }
  const std::size_t k = lattice.rank();
  const std::size_t dim = 2 * y.rows() * y.cols();
  if (k > dim) throw Error(ErrorCode::DimensionMismatch, "effective lattice is rank deficient (k > 2 n_r T)");
  if (!std::isfinite(theta * scale)) throw Error(ErrorCode::RadiusOverflow, "non-finite channel gain");

  const ComplexMatrix heff = H * cplx(theta * scale);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) g.col(static_cast<Eigen::Index>(j)) = realify(heff * lattice.basis()[j]);
  const Eigen::VectorXd yr = realify(y);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd r =
      qr.matrixQR().topRows(static_cast<Eigen::Index>(k)).triangularView<Eigen::Upper>();
  const Eigen::VectorXd yt = (qr.householderQ().transpose() * yr).head(static_cast<Eigen::Index>(k));
  const double scale_r = r.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    if (!(std::abs(r(i, i)) > 1e-13 * scale_r)) {
      throw Error(ErrorCode::RadiusOverflow, "effective lattice is numerically singular");
    }
  }
  if (!yt.allFinite()) throw Error(ErrorCode::RadiusOverflow, "non-finite received signal");

  SphereDecoder dec(r, yt, nodeBudget);
  std::vector<Coeff> z = dec.run();
  ComplexMatrix x = lattice.point(z);
  const double nf = x.frobenius_norm();
  return LatticePoint{std::move(z), std::move(x), nf, std::nullopt};
}

SimResult simulate(const MatrixLattice& lattice, const ChannelConfig& cfg, const EnumerationOptions& opts) {
  validate(lattice, cfg);
  const std::size_t n = lattice.n();
  const std::size_t T = lattice.T();
  const auto nr = static_cast<std::size_t>(cfg.n_r);

  SimResult result;
  result.decoder = cfg.decoder;
  result.seed = cfg.seed;
  result.n_r = cfg.n_r;

  std::optional<FiniteCode> fixed;
  if (cfg.fixedRadius) fixed = fixed_code(lattice, *cfg.fixedRadius, opts);

  constexpr std::size_t kChunks = 16;
  for (std::size_t si = 0; si < cfg.snrGridDb.size(); ++si) {
    const double snr_db = cfg.snrGridDb[si];
    const double rho = std::pow(10.0, snr_db / 10.0);
    FiniteCode scheme;
    if (!fixed) scheme = coding_scheme(lattice, *cfg.multiplexingGain, rho, opts);
    const FiniteCode& code = fixed ? *fixed : scheme;
    if (code.points.empty()) throw Error(ErrorCode::InvalidArgument, "code is empty at this SNR");
    if (cfg.decoder == Decoder::MlExhaustive && code.points.size() > cfg.codeCap) {
      throw Error(ErrorCode::CodeTooLarge, "code has " + std::to_string(code.points.size()) +
                                               " words, above the exhaustive-decoder cap " +
                                               std::to_string(cfg.codeCap));
    }
    const double theta = normalize_energy(code, T);
    const double gain = std::sqrt(rho / static_cast<double>(n)) * theta * code.scale;

    std::vector<std::uint64_t> chunk_errors(kChunks, 0);
    const std::uint64_t trials = cfg.trialsPerPoint;
    detail::run_partitions(kChunks, cfg.threads, [&](std::size_t part) {
      const std::uint64_t lo = trials * part / kChunks;
      const std::uint64_t hi = trials * (part + 1) / kChunks;
      std::vector<ComplexMatrix> received;
      std::uint64_t errs = 0;
      for (std::uint64_t t = lo; t < hi; ++t) {
        std::mt19937_64 rng(trial_seed(cfg.seed, si, t));
        std::uniform_int_distribution<std::size_t> pick(0, code.points.size() - 1);
        const std::size_t sent = pick(rng);
        const ComplexMatrix h = gaussian_matrix(rng, nr, n, 1.0);
        const ComplexMatrix noise = gaussian_matrix(rng, nr, T, cfg.noiseScale);
        const ComplexMatrix hg = h * cplx(gain);
        const ComplexMatrix y = hg * code.points[sent].x + noise;

        bool error = false;
        if (cfg.decoder == Decoder::MlExhaustive) {
          std::size_t best = 0;
          double best_d = std::numeric_limits<double>::infinity();
          for (std::size_t c = 0; c < code.points.size(); ++c) {
            const double d = dist_sq(y, hg * code.points[c].x);
            if (d < best_d) {
              best_d = d;
              best = c;
            }
          }
          error = best != sent;
        } else {
          try {
            const LatticePoint dec =
                naive_lattice_decode(lattice, h * cplx(std::sqrt(rho / static_cast<double>(n))), y, theta,
                                     code.scale, cfg.decodeNodeBudget);
            error = dec.coeffs != code.points[sent].coeffs;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::RadiusOverflow) throw;
            error = true;
          }
        }
        if (error) ++errs;
      }
      chunk_errors[part] = errs;
    });

    SimPoint p;
    p.snrDb = snr_db;
    p.trials = trials;
    for (auto e : chunk_errors) p.errors += e;
    p.errorRate = static_cast<double>(p.errors) / static_cast<double>(trials);
    p.wilsonHalfWidth = wilson_half_width(p.errors, trials);
    p.codeSize = code.points.size();
    p.theta = theta;
    p.scale = code.scale;
    result.points.push_back(p);
  }
  return result;
}

double diversity_slope(const SimResult& result, std::size_t window, std::uint64_t minErrors) {
  if (window < 2) throw Error(ErrorCode::InvalidArgument, "slope window must be at least 2");
  std::vector<const SimPoint*> eligible;
  for (const auto& p : result.points) {
    if (p.errors >= minErrors && p.errors > 0) eligible.push_back(&p);
  }
  if (eligible.size() < window) {
    throw Error(ErrorCode::InsufficientStatistics,
                std::to_string(eligible.size()) + " SNR points have >= " + std::to_string(minErrors) +
                    " errors, need " + std::to_string(window));
  }
  std::sort(eligible.begin(), eligible.end(), [](auto* a, auto* b) { return a->snrDb < b->snrDb; });
  const std::vector<const SimPoint*> top(eligible.end() - static_cast<std::ptrdiff_t>(window), eligible.end());
  double mx = 0;
  double my = 0;
  for (auto* p : top) {
    mx += p->snrDb / 10.0;
    my += -std::log10(p->errorRate);
  }
  mx /= static_cast<double>(window);
  my /= static_cast<double>(window);
  double sxy = 0;
  double sxx = 0;
  for (auto* p : top) {
    const double dx = p->snrDb / 10.0 - mx;
    sxy += dx * (-std::log10(p->errorRate) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0)) throw Error(ErrorCode::InvalidArgument, "slope window has repeated SNR values");
  return sxy / sxx;
}

}  // namespace shiftsum
