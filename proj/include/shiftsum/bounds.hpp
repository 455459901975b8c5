#pragma once

// Growth-exponent fitting, the W_i envelope of shifted sums, DMT lower-bound
// lines and SNR threshold exponents.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shiftsum/detsum.hpp"
#include "shiftsum/rational.hpp"

namespace shiftsum {

// ---------------------------------------------------------------------------
// Growth fits

/// log value = logK + s log M + t log log M.
struct GrowthFit {
  double s = 0;
  double t = 0;
  double logK = 0;
  /// RMS residual in the log domain.
  double residual = 0;
  std::size_t samples = 0;
  /// |t| >= 0.25.
  bool hasLogFactor = false;
};

struct GrowthFitOptions {
  /// false pins t = 0 (pure power law).
  bool fitLogFactor = true;
};

/// Least squares over the curve points. Needs >= 4 samples, M >= 2 and
/// positive values; throws DegenerateFit when the design is rank deficient.
GrowthFit growth_fit(const SumCurve& curve, const GrowthFitOptions& opts = {});
nlohmann::json to_json(const GrowthFit& fit);

// ---------------------------------------------------------------------------
// W_i envelope

/// Hypothesis sum_{L(M)} det(XX*)^{-l} <= K M^s (log M)^logPower.
struct GrowthExponent {
  double s = 0;
  double logPower = 0;
};

/// Keyed by l = m - i.
using ExponentTable = std::map<int, GrowthExponent>;

enum class WiRegime { Constant, Log, Poly };
std::string to_string(WiRegime r);

struct WiEntry {
  int i = 0;
  /// i + n(m - i).
  double cExponent = 0;
  double mExponent = 0;
  double logPower = 0;
  WiRegime regime = WiRegime::Constant;
};

struct WiEnvelope {
  int n = 0;
  int k = 0;
  int m = 0;
  ExponentTable sTable;
  /// Where sTable came from ("literature", "fit", ...).
  std::string source;
  std::vector<WiEntry> entries;

  /// Shape c^{-cExponent} M^{mExponent} (1 + log M)^{logPower}, i.e. W_i
  /// with G_i = 1. 1 + log M keeps the log shape positive at M = 1.
  static double shape(const WiEntry& e, double M, double c);
  nlohmann::json to_json() const;
};

/// W_i shapes for the requested split indices (all of 0..m when empty).
/// For 0 < i < m the weight ||X||^{-2i} is handled by dyadic summing:
/// s(m-i) < 2i constant, = 2i one more log, > 2i M^{s-2i}. For i = 0 there is
/// no weight and W_0 is the hypothesis itself, c^{-nm} M^{s(m)}. For i = m the
/// lattice point count M^k is weighted instead: k < 2m constant, = 2m log,
/// > 2m M^{k-2m}. `tieTolerance` decides when a fitted s counts as 2i.
/// Throws MissingExponent when sTable lacks a needed l.
WiEnvelope wi_envelope(int n, int k, int m, const ExponentTable& sTable, std::span<const int> indices = {},
                       std::string source = "literature", double tieTolerance = 1e-9);

// ---------------------------------------------------------------------------
// DMT curves

struct DmtSegment {
  Rational intercept;
  Rational slope;
  /// Operation and inputs that produced the line.
  std::string provenance;
};

/// r -> max(0, max_j (intercept_j + slope_j r)) on [0, rMax].
class DmtCurve {
 public:
  DmtCurve(std::vector<DmtSegment> segments, Rational rMax);

  const std::vector<DmtSegment>& segments() const noexcept { return segments_; }
  Rational rMax() const noexcept { return r_max_; }

  double evaluate(double r) const;
  Rational evaluate_exact(Rational r) const;
  /// Interior points of [0, rMax] where the active line changes (including
  /// the clip at 0).
  std::vector<Rational> breakpoints() const;

  /// Columns r,d on start, start+step, ..., stop.
  std::string to_csv(double start, double stop, double step) const;
  nlohmann::json to_json() const;

 private:
  std::vector<DmtSegment> segments_;
  Rational r_max_;
};

/// d(r) = (a - rT(2a+b)/k)^+ on [0, rMax].
DmtCurve dmt_ml_bound(Rational a, Rational b, int k, int T, Rational rMax);
/// Same, with rMax at the zero crossing ak/(T(2a+b)).
DmtCurve dmt_ml_bound(Rational a, Rational b, int k, int T);
/// d(r) = (a - 2rTa/k)^+ on [0, k/(2T)].
DmtCurve dmt_naive_bound(Rational a, int k, int T);
/// Pointwise maximum. Segments are kept in a canonical order with duplicates
/// merged, so the result does not depend on argument order.
DmtCurve dmt_envelope(std::span<const DmtCurve> curves);

/// d(r) = n_r (1 - r/n) when k = 2nT and n_r > nT + 1.
std::optional<DmtCurve> full_multiplexing_check(int n, int T, int n_r, int k);

// ---------------------------------------------------------------------------
// Error probability and SNR thresholds

/// K M^{d+t} rho^{-d}.
double pe_upper_bound(double K, double d, double t, double M, double rho);
/// (t + d)/d, exact.
Rational snr_threshold_exponent(Rational d, Rational t);
/// M^{(t+d)/d}: the threshold up to the unknown constant K'.
double snr_threshold(double d, double t, double M);

}  // namespace shiftsum
