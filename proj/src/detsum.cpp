#include "shiftsum/detsum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shiftsum/compensated_sum.hpp"
#include "shiftsum/errors.hpp"
#include "shiftsum/format.hpp"

namespace shiftsum {

namespace {

void validate(const MatrixLattice& lattice, const SumSpec& spec) {
  if (!(spec.m > 0) || !std::isfinite(spec.m)) throw Error(ErrorCode::InvalidArgument, "exponent m must be > 0");
  switch (spec.family) {
    case SumFamily::Approximate:
      if (lattice.n() != lattice.T()) {
        throw Error(ErrorCode::DimensionMismatch, "approximate sum needs square codewords (n == T)");
      }
      break;
    case SumFamily::Shifted:
      if (!(spec.c >= 0) || !std::isfinite(spec.c)) throw Error(ErrorCode::InvalidArgument, "shift c must be >= 0");
      break;
    case SumFamily::Mixed:
      if (spec.i < 0 || static_cast<double>(spec.i) > spec.m) {
        throw Error(ErrorCode::InvalidArgument, "mixed split index must satisfy 0 <= i <= m");
      }
      break;
  }
}

// det(XX*), applying the SingularPoint / skipSingular policy.
double checked_gram_det(const SumSpec& spec, const PointView& p, bool& skip) {
  const double d = gram_determinant(p.x);
  const double scale = std::pow(p.normSq, static_cast<double>(p.x.rows));
  if (d <= 1e-12 * scale) {
    if (spec.skipSingular) {
      skip = true;
      return 0.0;
    }
    throw Error(ErrorCode::SingularPoint, "det(XX*) = 0 at a nonzero lattice point");
  }
  return d;
}

struct Bins {
  std::vector<CompensatedSum> sums;
  std::vector<std::uint64_t> counts;
};

}  // namespace

std::string to_string(SumFamily f) {
  switch (f) {
    case SumFamily::Approximate: return "approximate";
    case SumFamily::Shifted: return "shifted";
    case SumFamily::Mixed: return "mixed";
  }
  return "unknown";
}

SumFamily parse_sum_family(const std::string& s) {
  if (s == "approximate") return SumFamily::Approximate;
  if (s == "shifted") return SumFamily::Shifted;
  if (s == "mixed") return SumFamily::Mixed;
  throw Error(ErrorCode::ConfigError, "unknown sum family '" + s + "'");
}

nlohmann::json to_json(const SumSpec& s) {
  nlohmann::json j{{"family", to_string(s.family)}, {"m", s.m}};
  if (s.family == SumFamily::Shifted) j["c"] = s.c;
  if (s.family == SumFamily::Mixed) j["i"] = s.i;
  j["dedupSigns"] = s.dedupSigns;
  j["skipSingular"] = s.skipSingular;
  return j;
}

SumSpec sum_spec_from_json(const nlohmann::json& j) {
  SumSpec s;
  s.family = parse_sum_family(j.at("family").get<std::string>());
  s.m = j.at("m").get<double>();
  s.c = j.value("c", 0.0);
  s.i = j.value("i", 0);
  s.dedupSigns = j.value("dedupSigns", false);
  s.skipSingular = j.value("skipSingular", false);
  return s;
}

std::string SumCurve::to_csv() const {
  std::string out = "M,value,pointCount\n";
  for (const auto& p : points) {
    out += format_number(p.M) + "," + format_number(p.value) + "," + std::to_string(p.pointCount) + "\n";
  }
  return out;
}

nlohmann::json SumCurve::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({{"M", p.M}, {"value", p.value}, {"pointCount", p.pointCount}});
  return {{"spec", shiftsum::to_json(spec)}, {"points", std::move(pts)}, {"errorBound", errorBound}};
}

SumCurve SumCurve::from_csv(const std::string& text) {
  SumCurve c;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("M,", 0) == 0) continue;
    }
    std::istringstream ls(line);
    std::string a, b, cnt;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) {
      throw Error(ErrorCode::ConfigError, "curve CSV row needs M,value: '" + line + "'");
    }
    std::getline(ls, cnt, ',');
    try {
      c.points.push_back({std::stod(a), std::stod(b), cnt.empty() ? 0 : std::stoull(cnt)});
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad number in curve CSV row '" + line + "'");
    }
  }
  return c;
}

double sum_term(const SumSpec& spec, const PointView& p) {
  bool skip = false;
  switch (spec.family) {
    case SumFamily::Approximate: {
      const double d = checked_gram_det(spec, p, skip);
      return skip ? 0.0 : std::pow(d, -0.5 * spec.m);
    }
    case SumFamily::Shifted:
      return std::pow(shifted_det(p.x, spec.c), -spec.m);
    case SumFamily::Mixed: {
      const double rest = spec.m - spec.i;
      double v = std::pow(p.normSq, -static_cast<double>(spec.i));
      if (rest > 0) {
        const double d = checked_gram_det(spec, p, skip);
        if (skip) return 0.0;
        v *= std::pow(d, -rest);
      }
      return v;
    }
  }
  return 0.0;
}

SumCurve sum_curve(const MatrixLattice& lattice, const SumSpec& spec, std::span<const double> radii,
                   const EnumerationOptions& opts) {
  validate(lattice, spec);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (!(radii[j] > 0)) throw Error(ErrorCode::InvalidArgument, "radii must be positive");
    if (j > 0 && !(radii[j] > radii[j - 1])) throw Error(ErrorCode::InvalidArgument, "radii must be increasing");
  }
  SumCurve curve;
  curve.spec = spec;
  if (radii.empty()) return curve;

  EnumerationOptions eopts = opts;
  eopts.dedupSigns = spec.dedupSigns;
  const std::size_t nb = radii.size();
  auto states = enumerate_partitioned<Bins>(
      lattice, radii.back(), eopts,
      [&] { return Bins{std::vector<CompensatedSum>(nb), std::vector<std::uint64_t>(nb, 0)}; },
      [&](Bins& b, const PointView& p) {
        const std::size_t bin = radius_bin(radii, p.normSq);
        if (bin >= nb) return;
        b.sums[bin].add(sum_term(spec, p));
        ++b.counts[bin];
      });

  const double mult = spec.dedupSigns ? 2.0 : 1.0;
  CompensatedSum running;
  std::uint64_t count = 0;
  for (std::size_t j = 0; j < nb; ++j) {
    for (const auto& st : states) {
      running.merge(st.sums[j]);
      count += st.counts[j];
    }
    curve.points.push_back({radii[j], mult * running.value(), static_cast<std::uint64_t>(mult) * count});
  }
  curve.errorBound = mult * running.error_bound();
  return curve;
}

double evaluate_sum(const MatrixLattice& lattice, const SumSpec& spec, double radius,
                    const EnumerationOptions& opts) {
  const double r[1] = {radius};
  return sum_curve(lattice, spec, r, opts).points.front().value;
}

double approximate_sum(const MatrixLattice& lattice, double m, double radius, const EnumerationOptions& opts,
                       bool skipSingular) {
  SumSpec s;
  s.family = SumFamily::Approximate;
  s.m = m;
  s.skipSingular = skipSingular;
  s.dedupSigns = opts.dedupSigns;
  return evaluate_sum(lattice, s, radius, opts);
}

double shifted_sum(const MatrixLattice& lattice, double m, double c, double radius, const EnumerationOptions& opts) {
  SumSpec s;
  s.family = SumFamily::Shifted;
  s.m = m;
  s.c = c;
  s.dedupSigns = opts.dedupSigns;
  return evaluate_sum(lattice, s, radius, opts);
}

double mixed_sum(const MatrixLattice& lattice, double m, int i, double radius, const EnumerationOptions& opts,
                 bool skipSingular) {
  SumSpec s;
  s.family = SumFamily::Mixed;
  s.m = m;
  s.i = i;
  s.skipSingular = skipSingular;
  s.dedupSigns = opts.dedupSigns;
  return evaluate_sum(lattice, s, radius, opts);
}

DominationCheck shifted_dominated_by_mixed(const MatrixLattice& lattice, double m, double c, double radius, int i,
                                           const EnumerationOptions& opts) {
  DominationCheck r;
  r.lhs = shifted_sum(lattice, m, c, radius, opts);
  const double mixed = mixed_sum(lattice, m, i, radius, opts);
  r.cExponent = i + static_cast<double>(lattice.n()) * (m - i);
  // c == 0 makes the right-hand side c^{-e} infinite: the bound is vacuous.
  r.rhs = (c == 0.0) ? std::numeric_limits<double>::infinity() : std::pow(c, -r.cExponent) * mixed;
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-9);
  return r;
}

std::string to_string(GrowthRegime r) {
  switch (r) {
    case GrowthRegime::Convergent: return "convergent";
    case GrowthRegime::Logarithmic: return "logarithmic";
    case GrowthRegime::Polynomial: return "polynomial";
  }
  return "unknown";
}

DyadicResult dyadic_bound(std::span<const DyadicSample> f, double K, double s, double t) {
  if (f.empty()) throw Error(ErrorCode::InvalidArgument, "dyadic_bound needs at least one sample");
  if (!(K > 0)) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  std::vector<DyadicSample> samples(f.begin(), f.end());
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  for (const auto& smp : samples) {
    if (!(smp.x >= 1.0)) throw Error(ErrorCode::InvalidArgument, "samples must lie in [1, M]");
    if (!(smp.f > 0.0)) throw Error(ErrorCode::InvalidArgument, "f must be positive");
  }
  const double big_m = samples.back().x;
  // [1, 2] is the first interval of the partition, so even M = 1 uses one.
  const int levels = std::max(1, static_cast<int>(std::ceil(std::log2(big_m))));

  CompensatedSum prefix;
  std::size_t next = 0;
  for (int j = 0; j <= levels; ++j) {
    const double edge = std::ldexp(1.0, j);
    while (next < samples.size() && samples[next].x <= edge) prefix.add(samples[next++].f);
    const double cap = K * std::pow(edge, s);
    if (prefix.value() > cap * (1.0 + 1e-12)) {
      throw Error(ErrorCode::HypothesisViolated, "prefix sum up to " + format_number(edge) + " is " +
                                                     format_number(prefix.value()) + " > K M^s = " +
                                                     format_number(cap));
    }
  }

  DyadicResult r;
  CompensatedSum weighted;
  for (const auto& smp : samples) weighted.add(smp.f / std::pow(smp.x, t));
  r.empiricalSum = weighted.value();
  CompensatedSum bound;
  for (int i = 1; i <= levels; ++i) bound.add(std::pow(2.0, (s - t) * i));
  r.proofBound = std::pow(2.0, t) * K * bound.value();
  r.regime = t > s ? GrowthRegime::Convergent : (t == s ? GrowthRegime::Logarithmic : GrowthRegime::Polynomial);
  if (r.empiricalSum > r.proofBound * (1.0 + 1e-12)) {
    throw Error(ErrorCode::NumericalFailure, "dyadic bound violated although the hypothesis holds");
  }
  return r;
}

ConvergenceProbe convergence_probe(const MatrixLattice& lattice, double m, double c, std::span<const double> radii,
                                   const EnumerationOptions& opts) {
  if (lattice.min_norm_sq() < 1.0 - 1e-12) {
    throw Error(ErrorCode::HypothesisViolated, "convergence probe needs ||X||_F >= 1 on nonzero points");
  }
  if (radii.empty()) throw Error(ErrorCode::InvalidArgument, "empty radius grid");
  SumSpec s;
  s.family = SumFamily::Shifted;
  s.m = m;
  s.c = c;
  ConvergenceProbe probe;
  probe.curve = sum_curve(lattice, s, radii, opts);
  const auto& pts = probe.curve.points;
  const double last = pts.back().value;
  const double prev = pts.size() > 1 ? pts[pts.size() - 2].value : 0.0;
  probe.lastIncrementFraction = last > 0 ? (last - prev) / last : 1.0;
  probe.saturated = pts.size() > 1 && probe.lastIncrementFraction < 0.01;
  return probe;
}

}  // namespace shiftsum
