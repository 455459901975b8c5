#pragma once

// Rayleigh block-fading MIMO simulation of finite lattice codes:
//   Y = sqrt(rho/n) H theta X + N,
// with H (n_r x n) and N (n_r x T) i.i.d. circularly symmetric CN(0, 1).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shiftsum/lattice.hpp"

namespace shiftsum {

enum class Decoder { MlExhaustive, NaiveLattice };
std::string to_string(Decoder d);
Decoder parse_decoder(const std::string& s);

struct ChannelConfig {
  /// Transmit antennas and block length; 0 means "take from the lattice",
  /// otherwise they must match it.
  int n_t = 0;
  int T = 0;
  int n_r = 1;
  /// Strictly increasing.
  std::vector<double> snrGridDb;
  std::uint64_t trialsPerPoint = 1000;
  std::uint64_t seed = 1;
  Decoder decoder = Decoder::MlExhaustive;
  /// Exactly one of these: scheme mode (code rho^{-rT/k} L(rho^{rT/k}) per
  /// SNR point) or a fixed code L(fixedRadius).
  std::optional<double> multiplexingGain;
  std::optional<double> fixedRadius;
  /// Multiplies N; 0 gives a noiseless channel.
  double noiseScale = 1.0;
  /// Largest code the exhaustive ML decoder accepts.
  std::size_t codeCap = 4096;
  /// Sphere-decoder node budget per decode; exceeding it is an error event.
  std::uint64_t decodeNodeBudget = std::uint64_t{1} << 24;
  unsigned threads = 1;
};

nlohmann::json to_json(const ChannelConfig& c);
ChannelConfig channel_config_from_json(const nlohmann::json& j);

struct SimPoint {
  double snrDb = 0;
  double errorRate = 0;
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
  /// 95% Wilson score interval half-width.
  double wilsonHalfWidth = 0;
  std::size_t codeSize = 0;
  double theta = 0;
  double scale = 1;
};

struct SimResult {
  Decoder decoder = Decoder::MlExhaustive;
  std::uint64_t seed = 0;
  int n_r = 0;
  std::vector<SimPoint> points;
  /// The energy convention applied when computing theta.
  std::string energyConvention = "per-channel-use: E||theta X||_F^2 = T";

  /// Columns snr_db,error_rate,errors,trials,ci_halfwidth.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

double wilson_half_width(std::uint64_t errors, std::uint64_t trials, double z = 1.959963984540054);

/// scale * L(radius), listed in enumeration order.
struct FiniteCode {
  std::vector<LatticePoint> points;
  double scale = 1;
  double radius = 0;
};

/// L(rho^{rT/k}) scaled by rho^{-rT/k}. Requires rho >= 1, r >= 0.
FiniteCode coding_scheme(const MatrixLattice& lattice, double r, double rho, const EnumerationOptions& opts = {});
/// L(radius) with scale 1.
FiniteCode fixed_code(const MatrixLattice& lattice, double radius, const EnumerationOptions& opts = {});

/// theta with theta^2 = T |code| / sum ||scale X||_F^2.
double normalize_energy(const FiniteCode& code, std::size_t T);
double normalize_energy(std::span<const ComplexMatrix> codewords, std::size_t T);

/// sum over L(2 radius) of det(I + rho theta^2 scale^2 XX*)^{-n_r}. The
/// 1/n factor of the channel is left out.
double union_bound(const MatrixLattice& lattice, const FiniteCode& code, double theta, int n_r, double rho,
                   const EnumerationOptions& opts = {});

/// Closest point of the whole lattice to y under ||y - H (theta scale) X'||_F.
/// Schnorr-Euchner search inside the ball through the Babai point. Throws
/// RadiusOverflow when the input is not finite or the node budget runs out.
LatticePoint naive_lattice_decode(const MatrixLattice& lattice, const ComplexMatrix& H, const ComplexMatrix& y,
                                  double theta, double scale,
                                  std::uint64_t nodeBudget = std::uint64_t{1} << 24);

/// Block-error simulation; deterministic in (seed, config) and independent of
/// the thread count. Throws CodeTooLarge for ml-exhaustive above codeCap.
SimResult simulate(const MatrixLattice& lattice, const ChannelConfig& cfg, const EnumerationOptions& opts = {});

/// Least-squares slope of -log10 errorRate against log10 rho over the
/// `window` highest-SNR points having at least `minErrors` errors. Throws
/// InsufficientStatistics when fewer than `window` points qualify.
double diversity_slope(const SimResult& result, std::size_t window, std::uint64_t minErrors = 20);

}  // namespace shiftsum
