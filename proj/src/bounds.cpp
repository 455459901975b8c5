#include "shiftsum/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "shiftsum/errors.hpp"
#include "shiftsum/format.hpp"

namespace shiftsum {

GrowthFit growth_fit(const SumCurve& curve, const GrowthFitOptions& opts) {
  const auto& pts = curve.points;
  if (pts.size() < 4) {
    throw Error(ErrorCode::InvalidArgument, "growth fit needs >= 4 samples, got " + std::to_string(pts.size()));
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(pts.size());
  const Eigen::Index cols = opts.fitLogFactor ? 3 : 2;
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& p = pts[static_cast<std::size_t>(r)];
    if (!(p.M >= 2.0)) throw Error(ErrorCode::InvalidArgument, "growth fit needs M >= 2 (log log M)");
    if (!(p.value > 0.0)) throw Error(ErrorCode::InvalidArgument, "growth fit needs positive values");
    a(r, 0) = 1.0;
    a(r, 1) = std::log(p.M);
    if (opts.fitLogFactor) a(r, 2) = std::log(std::log(p.M));
    b(r) = std::log(p.value);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) throw Error(ErrorCode::DegenerateFit, "design matrix is rank deficient (repeated M?)");
  const Eigen::VectorXd x = qr.solve(b);
  GrowthFit fit;
  fit.logK = x(0);
  fit.s = x(1);
  fit.t = opts.fitLogFactor ? x(2) : 0.0;
  fit.residual = std::sqrt((a * x - b).squaredNorm() / static_cast<double>(rows));
  fit.samples = pts.size();
  fit.hasLogFactor = std::abs(fit.t) >= 0.25;
  return fit;
}

nlohmann::json to_json(const GrowthFit& fit) {
  return {{"s", fit.s},           {"t", fit.t},
          {"logK", fit.logK},     {"residual", fit.residual},
          {"samples", fit.samples}, {"hasLogFactor", fit.hasLogFactor}};
}

std::string to_string(WiRegime r) {
  switch (r) {
    case WiRegime::Constant: return "constant";
    case WiRegime::Log: return "log";
    case WiRegime::Poly: return "poly";
  }
  return "unknown";
}

double WiEnvelope::shape(const WiEntry& e, double M, double c) {
  return std::pow(c, -e.cExponent) * std::pow(M, e.mExponent) * std::pow(1.0 + std::log(M), e.logPower);
}

nlohmann::json WiEnvelope::to_json() const {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [l, g] : sTable) table[std::to_string(l)] = {{"s", g.s}, {"logPower", g.logPower}};
  nlohmann::json ents = nlohmann::json::array();
  for (const auto& e : entries) {
    ents.push_back({{"i", e.i},
                    {"cExponent", e.cExponent},
                    {"MExponent", e.mExponent},
                    {"logPower", e.logPower},
                    {"regime", to_string(e.regime)}});
  }
  return {{"n", n}, {"k", k}, {"m", m}, {"source", source}, {"sTable", table}, {"entries", ents}};
}

WiEnvelope wi_envelope(int n, int k, int m, const ExponentTable& sTable, std::span<const int> indices,
                       std::string source, double tieTolerance) {
  if (n < 1 || k < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "wi_envelope needs n, k, m >= 1");
  std::vector<int> idx(indices.begin(), indices.end());
  if (idx.empty()) {
    for (int i = 0; i <= m; ++i) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

  WiEnvelope env;
  env.n = n;
  env.k = k;
  env.m = m;
  env.sTable = sTable;
  env.source = std::move(source);
  for (int i : idx) {
    if (i < 0 || i > m) throw Error(ErrorCode::InvalidArgument, "split index out of range 0..m");
    WiEntry e;
    e.i = i;
    e.cExponent = i + static_cast<double>(n) * (m - i);
    if (i == m) {
      // sum ||X||^{-2m} over L(M) with |L(M)| ~ M^k.
      if (k < 2 * m) {
        e.regime = WiRegime::Constant;
      } else if (k == 2 * m) {
        e.regime = WiRegime::Log;
        e.logPower = 1;
      } else {
        e.regime = WiRegime::Poly;
        e.mExponent = k - 2 * m;
      }
    } else {
      const int l = m - i;
      const auto it = sTable.find(l);
      if (it == sTable.end()) {
        throw Error(ErrorCode::MissingExponent, "no growth exponent s(" + std::to_string(l) + ") for i = " +
                                                    std::to_string(i));
      }
      const GrowthExponent g = it->second;
      if (i == 0) {
        e.mExponent = std::abs(g.s) <= tieTolerance ? 0.0 : g.s;
        e.logPower = g.logPower;
        e.regime = e.mExponent > 0 ? WiRegime::Poly : (g.logPower > 0 ? WiRegime::Log : WiRegime::Constant);
      } else {
        const double weight = 2.0 * i;
        if (std::abs(g.s - weight) <= tieTolerance) {
          e.regime = WiRegime::Log;
          e.logPower = g.logPower + 1;
        } else if (g.s < weight) {
          e.regime = WiRegime::Constant;
        } else {
          e.regime = WiRegime::Poly;
          e.mExponent = g.s - weight;
          e.logPower = g.logPower;
        }
      }
    }
    env.entries.push_back(e);
  }
  return env;
}

// ---------------------------------------------------------------------------

DmtCurve::DmtCurve(std::vector<DmtSegment> segments, Rational rMax) : segments_(std::move(segments)), r_max_(rMax) {
  if (segments_.empty()) throw Error(ErrorCode::InvalidArgument, "DMT curve needs at least one line");
  if (rMax < Rational(0)) throw Error(ErrorCode::InvalidArgument, "DMT range must be nonnegative");
}

double DmtCurve::evaluate(double r) const {
  double best = 0.0;
  for (const auto& s : segments_) best = std::max(best, s.intercept.to_double() + s.slope.to_double() * r);
  return best;
}

Rational DmtCurve::evaluate_exact(Rational r) const {
  Rational best(0);
  for (const auto& s : segments_) best = max(best, s.intercept + s.slope * r);
  return best;
}

std::vector<Rational> DmtCurve::breakpoints() const {
  // Candidate points: pairwise intersections (the clip at 0 is the line 0).
  std::vector<std::pair<Rational, Rational>> lines;
  for (const auto& s : segments_) lines.emplace_back(s.intercept, s.slope);
  lines.emplace_back(Rational(0), Rational(0));
  std::set<Rational> cand{Rational(0), r_max_};
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      if (lines[a].second == lines[b].second) continue;
      const Rational r = (lines[b].first - lines[a].first) / (lines[a].second - lines[b].second);
      if (r > Rational(0) && r < r_max_) cand.insert(r);
    }
  }
  auto active = [&](Rational r) {
    std::size_t best = 0;
    Rational v = lines[0].first + lines[0].second * r;
    for (std::size_t j = 1; j < lines.size(); ++j) {
      const Rational w = lines[j].first + lines[j].second * r;
      if (w > v) {
        v = w;
        best = j;
      }
    }
    return std::pair{best, v};
  };
  std::vector<Rational> pts(cand.begin(), cand.end());
  std::vector<Rational> out;
  for (std::size_t j = 1; j + 1 < pts.size(); ++j) {
    const Rational left = (pts[j - 1] + pts[j]) / Rational(2);
    const Rational right = (pts[j] + pts[j + 1]) / Rational(2);
    const auto [la, lv] = active(left);
    const auto [ra, rv] = active(right);
    // Different active lines on either side, with a genuine slope change.
    if (la != ra && lines[la].second != lines[ra].second) out.push_back(pts[j]);
  }
  return out;
}

std::string DmtCurve::to_csv(double start, double stop, double step) const {
  if (!(step > 0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
  std::string out = "r,d\n";
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long j = 0; j <= count; ++j) {
    const double r = start + static_cast<double>(j) * step;
    out += format_number(r) + "," + format_number(evaluate(r)) + "\n";
  }
  return out;
}

nlohmann::json DmtCurve::to_json() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : segments_) {
    segs.push_back({{"intercept", s.intercept.to_string()},
                    {"slope", s.slope.to_string()},
                    {"provenance", s.provenance}});
  }
  nlohmann::json bps = nlohmann::json::array();
  for (const auto& b : breakpoints()) bps.push_back(b.to_string());
  return {{"segments", segs}, {"rMax", r_max_.to_string()}, {"breakpoints", bps}};
}

DmtCurve dmt_ml_bound(Rational a, Rational b, int k, int T, Rational rMax) {
  if (!(a > Rational(0))) throw Error(ErrorCode::InvalidArgument, "dmt_ml_bound needs a > 0");
  if (k <= 0 || T <= 0) throw Error(ErrorCode::InvalidArgument, "dmt_ml_bound needs k, T > 0");
  const Rational slope = -(Rational(T) * (Rational(2) * a + b) / Rational(k));
  const std::string prov = "dmt_ml_bound(a=" + a.to_string() + ", b=" + b.to_string() +
                           ", k=" + std::to_string(k) + ", T=" + std::to_string(T) + ")";
  return DmtCurve({{a, slope, prov}}, rMax);
}

DmtCurve dmt_ml_bound(Rational a, Rational b, int k, int T) {
  const Rational denom = Rational(T) * (Rational(2) * a + b);
  if (!(denom > Rational(0))) throw Error(ErrorCode::InvalidArgument, "dmt_ml_bound needs 2a + b > 0");
  return dmt_ml_bound(a, b, k, T, a * Rational(k) / denom);
}

DmtCurve dmt_naive_bound(Rational a, int k, int T) {
  if (!(a > Rational(0))) throw Error(ErrorCode::InvalidArgument, "dmt_naive_bound needs a > 0");
  if (k <= 0 || T <= 0) throw Error(ErrorCode::InvalidArgument, "dmt_naive_bound needs k, T > 0");
  const Rational slope = -(Rational(2 * T) * a / Rational(k));
  const std::string prov =
      "dmt_naive_bound(a=" + a.to_string() + ", k=" + std::to_string(k) + ", T=" + std::to_string(T) + ")";
  return DmtCurve({{a, slope, prov}}, Rational(k, 2 * T));
}

DmtCurve dmt_envelope(std::span<const DmtCurve> curves) {
  if (curves.empty()) throw Error(ErrorCode::InvalidArgument, "dmt_envelope needs at least one curve");
  std::map<std::pair<Rational, Rational>, std::set<std::string>> lines;
  Rational r_max(0);
  for (const auto& c : curves) {
    r_max = max(r_max, c.rMax());
    for (const auto& s : c.segments()) lines[{s.slope, s.intercept}].insert(s.provenance);
  }
  std::vector<DmtSegment> segs;
  for (const auto& [key, provs] : lines) {
    std::string p;
    for (const auto& s : provs) p += (p.empty() ? "" : " | ") + s;
    segs.push_back({key.second, key.first, p});
  }
  return DmtCurve(std::move(segs), r_max);
}

std::optional<DmtCurve> full_multiplexing_check(int n, int T, int n_r, int k) {
  if (n <= 0 || T <= 0 || n_r <= 0) throw Error(ErrorCode::InvalidArgument, "n, T, n_r must be positive");
  if (k != 2 * n * T) return std::nullopt;
  if (n_r <= n * T + 1) return std::nullopt;
  return dmt_ml_bound(Rational(n_r), Rational(0), k, T, Rational(n));
}

double pe_upper_bound(double K, double d, double t, double M, double rho) {
  if (!(K > 0) || !(M > 0) || !(rho > 0)) throw Error(ErrorCode::InvalidArgument, "K, M, rho must be positive");
  return K * std::pow(M, d + t) * std::pow(rho, -d);
}

Rational snr_threshold_exponent(Rational d, Rational t) {
  if (!(d > Rational(0))) throw Error(ErrorCode::InvalidArgument, "diversity d must be positive");
  return (t + d) / d;
}

double snr_threshold(double d, double t, double M) {
  if (!(d > 0)) throw Error(ErrorCode::InvalidArgument, "diversity d must be positive");
  if (!(M > 0)) throw Error(ErrorCode::InvalidArgument, "M must be positive");
  return std::pow(M, (t + d) / d);
}

}  // namespace shiftsum
