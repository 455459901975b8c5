#include "shiftsum/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "shiftsum/errors.hpp"
#include "shiftsum/format.hpp"

namespace shiftsum {

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage '") + name + "': " + e.detail());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("stage '") + name + "': " + e.what());
  }
}

nlohmann::json exponent_table_to_json(const ExponentTable& t) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [l, g] : t) j[std::to_string(l)] = {{"s", g.s}, {"logPower", g.logPower}};
  return j;
}

ExponentTable exponent_table_from_json(const nlohmann::json& j) {
  ExponentTable t;
  for (const auto& [key, v] : j.items()) {
    int l = 0;
    try {
      l = std::stoi(key);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "exponent table key '" + key + "' is not an integer");
    }
    if (v.is_number()) {
      t[l] = {v.get<double>(), 0.0};
    } else {
      t[l] = {v.at("s").get<double>(), v.value("logPower", 0.0)};
    }
  }
  return t;
}

std::vector<double> radii_from_json(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return geometric_grid(j.at("start").get<double>(), j.at("factor").get<double>(), j.at("count").get<std::size_t>());
}

void check_known_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [key, v] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end()) {
      throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
    }
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string curve_label(const SumCurve& c, std::size_t index) {
  std::string s = "curve" + std::to_string(index) + "_" + to_string(c.spec.family) + "_m" + format_number(c.spec.m);
  if (c.spec.family == SumFamily::Shifted) s += "_c" + format_number(c.spec.c);
  if (c.spec.family == SumFamily::Mixed) s += "_i" + std::to_string(c.spec.i);
  return s;
}

void validate_radii(const ExperimentConfig& c) {
  if (c.sums.empty()) return;
  if (c.radii.empty()) throw Error(ErrorCode::ConfigError, "sum curves need a radius grid");
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    if (!(c.radii[i] > 0)) throw Error(ErrorCode::ConfigError, "radii must be positive");
    if (i > 0 && !(c.radii[i] > c.radii[i - 1])) throw Error(ErrorCode::ConfigError, "radii must increase");
  }
  if (c.fit && c.radii.size() > 2) {
    // Growth fits need a geometric grid (each radius a fixed multiple of the last).
    const double factor = c.radii[1] / c.radii[0];
    for (std::size_t i = 2; i < c.radii.size(); ++i) {
      if (std::abs(c.radii[i] / c.radii[i - 1] - factor) > 1e-9 * factor) {
        throw Error(ErrorCode::ConfigError, "growth fitting needs a geometric radius grid");
      }
    }
  }
}

Rational exact(double x) { return Rational::from_double(x, 1'000'000); }

}  // namespace

std::string to_string(NaiveSource s) {
  switch (s) {
    case NaiveSource::None: return "none";
    case NaiveSource::Convergence: return "convergence";
    case NaiveSource::DiagonalNf: return "diagonal-nf";
  }
  return "none";
}

NaiveSource parse_naive_source(const std::string& s) {
  if (s == "none") return NaiveSource::None;
  if (s == "convergence") return NaiveSource::Convergence;
  if (s == "diagonal-nf") return NaiveSource::DiagonalNf;
  throw Error(ErrorCode::ConfigError, "unknown naive DMT source '" + s + "'");
}

std::vector<double> geometric_grid(double start, double factor, std::size_t count) {
  if (!(start > 0) || !(factor > 1) || count == 0) {
    throw Error(ErrorCode::InvalidArgument, "geometric grid needs start > 0, factor > 1, count >= 1");
  }
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(start * std::pow(factor, static_cast<double>(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Config

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json sums = nlohmann::json::array();
  for (const auto& s : c.sums) sums.push_back(to_json(s));
  nlohmann::json j{
      {"name", c.name},
      {"code", to_json(c.code)},
      {"radii", c.radii},
      {"sums", sums},
      {"fit", {{"enabled", c.fit}, {"fitLogFactor", c.fitOptions.fitLogFactor}, {"minRadius", c.fitMinRadius}}},
      {"envelope",
       {{"enabled", c.envelope.enabled},
        {"m", c.envelope.m},
        {"indices", c.envelope.indices},
        {"literature", exponent_table_to_json(c.envelope.literature)},
        {"fitTieTolerance", c.envelope.fitTieTolerance}}},
      {"dmt",
       {{"enabled", c.dmt.enabled},
        {"n_r", c.dmt.n_r},
        {"T", c.dmt.T},
        {"k", c.dmt.k},
        {"naive", to_string(c.dmt.naive)}}},
      {"compare",
       {{"enabled", c.compare.enabled},
        {"m", c.compare.m},
        {"c", c.compare.c},
        {"M", c.compare.M},
        {"slack", c.compare.slack}}},
      {"simulation", c.simulation ? to_json(*c.simulation) : nlohmann::json(nullptr)},
      {"seed", c.seed},
      {"budget", c.budget},
      {"partitions", c.partitions}};
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  try {
    check_known_keys(j,
                     {"name", "code", "radii", "sums", "fit", "envelope", "dmt", "compare", "simulation", "seed",
                      "budget", "partitions", "threads", "outputDir"},
                     "experiment config");
    ExperimentConfig c;
    c.name = j.value("name", c.name);
    c.code = code_spec_from_json(j.at("code"));
    if (j.contains("radii")) c.radii = radii_from_json(j.at("radii"));
    for (const auto& s : j.value("sums", nlohmann::json::array())) c.sums.push_back(sum_spec_from_json(s));
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      if (f.is_boolean()) {
        c.fit = f.get<bool>();
      } else {
        c.fit = f.value("enabled", true);
        c.fitOptions.fitLogFactor = f.value("fitLogFactor", true);
        c.fitMinRadius = f.value("minRadius", 2.0);
      }
    }
    if (j.contains("envelope") && !j.at("envelope").is_null()) {
      const auto& e = j.at("envelope");
      c.envelope.enabled = e.value("enabled", true);
      c.envelope.m = e.value("m", 0);
      c.envelope.indices = e.value("indices", std::vector<int>{});
      if (e.contains("literature")) c.envelope.literature = exponent_table_from_json(e.at("literature"));
      c.envelope.fitTieTolerance = e.value("fitTieTolerance", 0.5);
    }
    if (j.contains("dmt") && !j.at("dmt").is_null()) {
      const auto& d = j.at("dmt");
      c.dmt.enabled = d.value("enabled", true);
      c.dmt.n_r = d.value("n_r", 1);
      c.dmt.T = d.value("T", 0);
      c.dmt.k = d.value("k", 0);
      c.dmt.naive = parse_naive_source(d.value("naive", std::string("none")));
    }
    if (j.contains("compare") && !j.at("compare").is_null()) {
      const auto& d = j.at("compare");
      c.compare.enabled = d.value("enabled", true);
      c.compare.m = d.value("m", 1);
      c.compare.c = d.value("c", std::vector<double>{});
      c.compare.M = d.value("M", std::vector<double>{});
      c.compare.slack = d.value("slack", 1e-9);
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("simulation") && !j.at("simulation").is_null()) {
      nlohmann::json s = j.at("simulation");
      if (!s.contains("seed")) s["seed"] = c.seed;
      c.simulation = channel_config_from_json(s);
    }
    c.budget = j.value("budget", c.budget);
    c.partitions = j.value("partitions", c.partitions);
    c.threads = j.value("threads", 1u);
    c.outputDir = j.value("outputDir", std::string());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() { return {"golden", "diagonal-nf-2", "gaussian-diagonal-2"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  auto shifted = [](double m, double cc) {
    SumSpec s;
    s.family = SumFamily::Shifted;
    s.m = m;
    s.c = cc;
    s.dedupSigns = true;
    return s;
  };
  auto approximate = [](double m) {
    SumSpec s;
    s.family = SumFamily::Approximate;
    s.m = m;
    s.dedupSigns = true;
    return s;
  };
  if (name == "golden") {
    c.code.kind = CodeKind::Golden;
    c.radii = geometric_grid(1.0, std::numbers::sqrt2, 6);
    c.sums = {approximate(4), approximate(8), shifted(4, 1), shifted(4, 10), shifted(4, 100)};
    c.fit = true;
    c.envelope.enabled = true;
    c.envelope.indices = {0, 2, 4};
    // sum |det X|^{-2 n_r} <= K M^4 for n_r > 1.
    c.envelope.literature = {{2, {4.0, 0.0}}, {4, {4.0, 0.0}}};
    c.dmt.enabled = true;
    c.dmt.n_r = 4;
    c.dmt.naive = NaiveSource::Convergence;
    c.compare.enabled = true;
    c.compare.m = 4;
    c.compare.c = {1, 10, 100};
    c.compare.M = {2, 4};
    ChannelConfig sim;
    sim.n_r = 2;
    for (int i = 0; i <= 8; ++i) sim.snrGridDb.push_back(5.0 + 2.5 * i);
    sim.trialsPerPoint = 10000;
    sim.fixedRadius = 1.0;
    sim.seed = c.seed;
    c.simulation = sim;
  } else if (name == "diagonal-nf-2") {
    c.code.kind = CodeKind::DiagonalNf;
    c.code.n = 2;
    c.radii = geometric_grid(1.0, 2.0, 6);
    c.sums = {approximate(2), approximate(4), shifted(2, 1), shifted(2, 10), shifted(2, 100)};
    c.fit = true;
    c.envelope.enabled = true;
    // sum det(XX*)^{-l} <= K log(M)^{3n-1} for l >= 1.
    c.envelope.literature = {{1, {0.0, 5.0}}, {2, {0.0, 5.0}}};
    c.dmt.enabled = true;
    c.dmt.n_r = 2;
    c.dmt.naive = NaiveSource::DiagonalNf;
    c.compare.enabled = true;
    c.compare.m = 2;
    c.compare.c = {1, 10, 100};
    c.compare.M = {4, 8};
  } else if (name == "gaussian-diagonal-2") {
    c.code.kind = CodeKind::GaussianDiagonal;
    c.code.n = 2;
    c.radii = geometric_grid(1.0, 2.0, 6);
    c.sums = {shifted(1, 1), shifted(2, 1), shifted(3, 1)};
    c.fit = true;
    c.dmt.enabled = true;
    c.dmt.n_r = 3;
    c.dmt.naive = NaiveSource::Convergence;
    ChannelConfig sim;
    sim.n_r = 2;
    for (int i = 0; i <= 4; ++i) sim.snrGridDb.push_back(5.0 * i);
    sim.trialsPerPoint = 2000;
    sim.fixedRadius = 1.0;
    sim.seed = c.seed;
    c.simulation = sim;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown preset '" + name + "'");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Comparison table

std::string CompareTable::to_csv() const {
  std::string out = "c,M,empirical,envelope,ratio,active_index,within_slack\n";
  for (const auto& x : cells) {
    out += format_number(x.c) + "," + format_number(x.M) + "," + format_number(x.empirical) + "," +
           format_number(x.envelope) + "," + format_number(x.ratio) + "," + std::to_string(x.activeIndex) + "," +
           (x.withinSlack ? "1" : "0") + "\n";
  }
  return out;
}

nlohmann::json CompareTable::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& x : cells) {
    cs.push_back({{"c", x.c},
                  {"M", x.M},
                  {"empirical", x.empirical},
                  {"envelope", x.envelope},
                  {"ratio", x.ratio},
                  {"activeIndex", x.activeIndex},
                  {"withinSlack", x.withinSlack}});
  }
  return {{"m", m}, {"anchorM", anchorM}, {"anchorC", anchorC}, {"anchorConstant", anchorConstant}, {"cells", cs}};
}

CompareTable compare_bound_vs_truth(const MatrixLattice& lattice, const WiEnvelope& envelope,
                                    const CompareConfig& cmp, const EnumerationOptions& opts) {
  if (cmp.c.empty() || cmp.M.empty()) throw Error(ErrorCode::InvalidArgument, "comparison grid is empty");
  if (envelope.entries.empty()) throw Error(ErrorCode::InvalidArgument, "envelope has no entries");
  std::vector<double> cs = cmp.c;
  std::vector<double> ms = cmp.M;
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());

  auto min_shape = [&](double M, double c) {
    double best = std::numeric_limits<double>::infinity();
    int arg = envelope.entries.front().i;
    for (const auto& e : envelope.entries) {
      const double v = WiEnvelope::shape(e, M, c);
      if (v < best) {
        best = v;
        arg = e.i;
      }
    }
    return std::pair{best, arg};
  };

  std::vector<std::vector<double>> emp(cs.size());
  for (std::size_t a = 0; a < cs.size(); ++a) {
    SumSpec s;
    s.family = SumFamily::Shifted;
    s.m = cmp.m;
    s.c = cs[a];
    s.dedupSigns = true;
    const SumCurve curve = sum_curve(lattice, s, ms, opts);
    for (const auto& p : curve.points) emp[a].push_back(p.value);
  }

  CompareTable t;
  t.m = cmp.m;
  t.anchorM = ms.back();
  t.anchorC = cs.back();
  const double anchor_emp = emp.back().back();
  t.anchorConstant = anchor_emp / min_shape(t.anchorM, t.anchorC).first;
  for (std::size_t a = 0; a < cs.size(); ++a) {
    for (std::size_t b = 0; b < ms.size(); ++b) {
      CompareCell cell;
      cell.c = cs[a];
      cell.M = ms[b];
      cell.empirical = emp[a][b];
      const auto [shape, arg] = min_shape(ms[b], cs[a]);
      cell.envelope = t.anchorConstant * shape;
      cell.activeIndex = arg;
      cell.ratio = (a + 1 == cs.size() && b + 1 == ms.size()) ? 1.0 : cell.empirical / cell.envelope;
      cell.withinSlack = cell.ratio <= 1.0 + cmp.slack;
      t.cells.push_back(cell);
    }
  }
  return t;
}

CompareTable compare_bound_vs_truth(const ExperimentConfig& config) {
  const MatrixLattice lattice = stage("construct", [&] { return build_code(config.code); });
  EnumerationOptions opts;
  opts.budget = config.budget;
  opts.partitions = config.partitions;
  opts.threads = config.threads;
  return stage("compare", [&] {
    const WiEnvelope env =
        wi_envelope(static_cast<int>(lattice.n()), static_cast<int>(lattice.rank()), config.compare.m,
                    config.envelope.literature, config.envelope.indices, "literature");
    return compare_bound_vs_truth(lattice, env, config.compare, opts);
  });
}

// ---------------------------------------------------------------------------
// Run

ExperimentReport run(const ExperimentConfig& config) {
  ExperimentReport rep;
  rep.config = config;
  rep.configHash = config_hash(config);

  stage("config", [&] { validate_radii(config); });
  const MatrixLattice lattice = stage("construct", [&] { return build_code(config.code); });
  const int n = static_cast<int>(lattice.n());
  const int k = static_cast<int>(lattice.rank());
  rep.construction = {{"code", to_json(config.code)},
                      {"n", lattice.n()},
                      {"T", lattice.T()},
                      {"k", lattice.rank()},
                      {"minNormSq", lattice.min_norm_sq()},
                      {"covolume", lattice.covolume()}};

  EnumerationOptions opts;
  opts.budget = config.budget;
  opts.partitions = config.partitions;
  opts.threads = config.threads;

  stage("sums", [&] {
    for (const auto& s : config.sums) rep.curves.push_back(sum_curve(lattice, s, config.radii, opts));
  });

  if (config.fit) {
    stage("fit", [&] {
      for (std::size_t j = 0; j < rep.curves.size(); ++j) {
        SumCurve sub;
        sub.spec = rep.curves[j].spec;
        for (const auto& p : rep.curves[j].points) {
          if (p.M >= config.fitMinRadius * (1.0 - 1e-12)) sub.points.push_back(p);
        }
        if (sub.points.size() < 4) {
          rep.notes.push_back(curve_label(rep.curves[j], j) + ": fewer than 4 radii >= " +
                              format_number(config.fitMinRadius) + ", no growth fit");
          continue;
        }
        rep.fits.push_back({j, growth_fit(sub, config.fitOptions)});
      }
    });
  }

  const int dmt_m = config.envelope.m > 0 ? config.envelope.m : config.dmt.n_r;
  if (config.envelope.enabled) {
    stage("envelope", [&] {
      if (!config.envelope.literature.empty()) {
        rep.envelopes.push_back(
            wi_envelope(n, k, dmt_m, config.envelope.literature, config.envelope.indices, "literature"));
      }
      // sum det(XX*)^{-l} is the approximate family with m = 2l.
      ExponentTable fitted;
      for (const auto& f : rep.fits) {
        const SumSpec& s = rep.curves[f.curve].spec;
        if (s.family != SumFamily::Approximate) continue;
        const double l = s.m / 2.0;
        if (l != std::floor(l) || l < 1) continue;
        fitted[static_cast<int>(l)] = {f.fit.s, f.fit.hasLogFactor ? std::max(0.0, f.fit.t) : 0.0};
      }
      if (!fitted.empty()) {
        try {
          rep.envelopes.push_back(wi_envelope(n, k, dmt_m, fitted, config.envelope.indices, "fit",
                                              config.envelope.fitTieTolerance));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::MissingExponent) throw;
          rep.notes.push_back("fitted envelope skipped: " + e.detail());
        }
      }
      for (const auto& env : rep.envelopes) {
        for (const auto& e : env.entries) {
          if (e.i == env.m && k == 2 * env.m) {
            rep.notes.push_back(env.source + " envelope: W_" + std::to_string(env.m) +
                                " carries a log M factor at k = 2m (it does not move DMT exponents)");
          }
        }
      }
    });
  }

  if (config.dmt.enabled) {
    stage("dmt", [&] {
      const int T = config.dmt.T > 0 ? config.dmt.T : static_cast<int>(lattice.T());
      const int kk = config.dmt.k > 0 ? config.dmt.k : k;
      const int n_r = config.dmt.n_r;
      for (const auto& env : rep.envelopes) {
        if (env.m != n_r) {
          rep.notes.push_back(env.source + " envelope has m = " + std::to_string(env.m) + " != n_r = " +
                              std::to_string(n_r) + "; no ML DMT lines from it");
          continue;
        }
        std::vector<DmtCurve> lines;
        for (const auto& e : env.entries) {
          const Rational a = exact(e.cExponent);
          const Rational b = exact(e.mExponent);
          DmtCurve line = dmt_ml_bound(a, b, kk, T);
          std::vector<DmtSegment> segs = line.segments();
          segs.front().provenance += " from W_" + std::to_string(e.i) + " (" + env.source + ")";
          lines.emplace_back(std::move(segs), line.rMax());
        }
        if (!lines.empty()) rep.dmt.push_back({"ml-" + env.source, dmt_envelope(lines)});
      }
      switch (config.dmt.naive) {
        case NaiveSource::None: break;
        case NaiveSource::Convergence:
          if (kk <= 2 * n_r) {
            rep.dmt.push_back({"naive-convergence", dmt_naive_bound(Rational(n_r), kk, T)});
            if (kk == 2 * n_r) {
              rep.notes.push_back("naive-convergence: k = 2 n_r, the whole-lattice sum grows like log M; the "
                                  "line ignores that factor");
            }
          } else {
            rep.notes.push_back("naive-convergence: k > 2 n_r, the whole-lattice sum diverges; no naive line");
          }
          break;
        case NaiveSource::DiagonalNf:
          if (config.code.kind != CodeKind::DiagonalNf || n_r < 2) {
            rep.notes.push_back("naive diagonal-nf line needs the diagonal number-field code and n_r >= 2");
          } else {
            rep.dmt.push_back({"naive-diagonal-nf", dmt_naive_bound(Rational(n * n_r - 1), kk, T)});
          }
          break;
      }
      if (auto fm = full_multiplexing_check(n, T, n_r, kk)) rep.dmt.push_back({"full-multiplexing", *fm});
    });

    stage("thresholds", [&] {
      for (const auto& env : rep.envelopes) {
        for (const auto& e : env.entries) {
          ThresholdEntry t;
          t.source = env.source;
          t.i = e.i;
          t.d = exact(e.cExponent);
          t.t = exact(e.mExponent);
          t.exponent = snr_threshold_exponent(t.d, t.t);
          rep.thresholds.push_back(t);
        }
      }
    });
  }

  if (config.compare.enabled) {
    rep.compare = stage("compare", [&] {
      const WiEnvelope env = wi_envelope(n, k, config.compare.m, config.envelope.literature,
                                         config.envelope.indices, "literature");
      return compare_bound_vs_truth(lattice, env, config.compare, opts);
    });
    std::size_t over = 0;
    for (const auto& c : rep.compare->cells) over += c.withinSlack ? 0 : 1;
    if (over > 0) {
      rep.notes.push_back("compare: " + std::to_string(over) + " of " + std::to_string(rep.compare->cells.size()) +
                          " cells exceed the anchored envelope");
    }
  }

  if (config.simulation) {
    stage("simulate", [&] {
      ChannelConfig sim = *config.simulation;
      sim.threads = config.threads;
      rep.simulation = simulate(lattice, sim, opts);
      std::optional<FiniteCode> fixed;
      if (sim.fixedRadius) fixed = fixed_code(lattice, *sim.fixedRadius, opts);
      for (const auto& p : rep.simulation->points) {
        const double rho = std::pow(10.0, p.snrDb / 10.0);
        const FiniteCode code = fixed ? *fixed : coding_scheme(lattice, *sim.multiplexingGain, rho, opts);
        rep.unionBounds.push_back({p.snrDb, union_bound(lattice, code, p.theta, sim.n_r, rho, opts)});
      }
      rep.notes.push_back("simulation energy convention: " + rep.simulation->energyConvention +
                          "; the union bound leaves out the 1/n SNR factor");
    });
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report output

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json curves_j = nlohmann::json::array();
  for (std::size_t j = 0; j < curves.size(); ++j) {
    auto cj = curves[j].to_json();
    cj["label"] = curve_label(curves[j], j);
    curves_j.push_back(std::move(cj));
  }
  nlohmann::json fits_j = nlohmann::json::array();
  for (const auto& f : fits) {
    auto fj = shiftsum::to_json(f.fit);
    fj["curve"] = f.curve;
    fj["label"] = curve_label(curves[f.curve], f.curve);
    fits_j.push_back(std::move(fj));
  }
  nlohmann::json env_j = nlohmann::json::array();
  for (const auto& e : envelopes) env_j.push_back(e.to_json());
  nlohmann::json dmt_j = nlohmann::json::array();
  for (const auto& d : dmt) {
    auto dj = d.curve.to_json();
    dj["name"] = d.name;
    dmt_j.push_back(std::move(dj));
  }
  nlohmann::json thr_j = nlohmann::json::array();
  for (const auto& t : thresholds) {
    thr_j.push_back({{"source", t.source},
                     {"i", t.i},
                     {"d", t.d.to_string()},
                     {"t", t.t.to_string()},
                     {"exponent", t.exponent.to_string()},
                     {"operation", "snr_threshold_exponent"}});
  }
  nlohmann::json ub_j = nlohmann::json::array();
  for (const auto& u : unionBounds) ub_j.push_back({{"snrDb", u.snrDb}, {"bound", u.bound}});
  return {{"configHash", configHash},
          {"config", shiftsum::to_json(config)},
          {"construction", construction},
          {"curves", curves_j},
          {"fits", fits_j},
          {"envelopes", env_j},
          {"dmt", dmt_j},
          {"thresholds", thr_j},
          {"compare", compare ? compare->to_json() : nlohmann::json(nullptr)},
          {"simulation", simulation ? simulation->to_json() : nlohmann::json(nullptr)},
          {"unionBounds", ub_j},
          {"notes", notes}};
}

std::string ExperimentReport::summary() const {
  std::ostringstream o;
  o << "experiment " << config.name << " (config hash " << configHash << ")\n";
  o << "code " << to_string(config.code.kind) << ": n=" << construction.at("n") << " T=" << construction.at("T")
    << " k=" << construction.at("k") << " minNormSq=" << format_number(construction.at("minNormSq").get<double>())
    << "\n";
  for (std::size_t j = 0; j < curves.size(); ++j) {
    const auto& c = curves[j];
    o << curve_label(c, j) << ":";
    for (const auto& p : c.points) o << " " << format_number(p.M) << "->" << format_number(p.value);
    o << "\n";
  }
  for (const auto& f : fits) {
    o << "fit " << curve_label(curves[f.curve], f.curve) << ": s=" << format_number(f.fit.s)
      << " t=" << format_number(f.fit.t) << " residual=" << format_number(f.fit.residual)
      << (f.fit.hasLogFactor ? " (log factor)" : "") << "\n";
  }
  for (const auto& e : envelopes) {
    o << "envelope (" << e.source << ", m=" << e.m << "):";
    for (const auto& w : e.entries) {
      o << " W_" << w.i << "=c^-" << format_number(w.cExponent) << " M^" << format_number(w.mExponent)
        << " log^" << format_number(w.logPower) << " [" << to_string(w.regime) << "]";
    }
    o << "\n";
  }
  for (const auto& d : dmt) {
    o << "dmt " << d.name << ":";
    for (const auto& s : d.curve.segments()) o << " (" << s.intercept.to_string() << " + " << s.slope.to_string() << " r)";
    o << " on [0, " << d.curve.rMax().to_string() << "]; d(0)=" << d.curve.evaluate_exact(Rational(0)).to_string()
      << "\n";
  }
  for (const auto& t : thresholds) {
    o << "threshold " << t.source << " W_" << t.i << ": d=" << t.d.to_string() << " t=" << t.t.to_string()
      << " -> rho >= K' M^" << t.exponent.to_string() << "\n";
  }
  if (compare) {
    o << "compare (m=" << compare->m << ", anchor M=" << format_number(compare->anchorM)
      << " c=" << format_number(compare->anchorC) << "):";
    for (const auto& c : compare->cells) {
      o << " [c=" << format_number(c.c) << " M=" << format_number(c.M) << " ratio=" << format_number(c.ratio)
        << " i=" << c.activeIndex << "]";
    }
    o << "\n";
  }
  if (simulation) {
    o << "simulation (" << to_string(simulation->decoder) << ", n_r=" << simulation->n_r << "):\n";
    for (std::size_t j = 0; j < simulation->points.size(); ++j) {
      const auto& p = simulation->points[j];
      o << "  " << format_number(p.snrDb) << " dB: rate=" << format_number(p.errorRate) << " +- "
        << format_number(p.wilsonHalfWidth) << " (" << p.errors << "/" << p.trials << ")";
      if (j < unionBounds.size()) o << " union bound=" << format_number(unionBounds[j].bound);
      o << "\n";
    }
  }
  for (const auto& n : notes) o << "note: " << n << "\n";
  return o.str();
}

std::vector<std::string> write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json old;
    try {
      in >> old;
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::IoError, manifest.string() + " is unreadable; refusing to overwrite");
    }
    if (old.value("configHash", std::string()) != report.configHash) {
      throw Error(ErrorCode::IoError, dir.string() + " holds results for config " +
                                          old.value("configHash", std::string("?")) + ", not " +
                                          report.configHash);
    }
  }

  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + (dir / name).string());
    files.push_back(name);
  };

  put("report.json", report.to_json().dump(2) + "\n");
  put("summary.txt", report.summary());
  for (std::size_t j = 0; j < report.curves.size(); ++j) {
    put(curve_label(report.curves[j], j) + ".csv", report.curves[j].to_csv());
  }
  for (const auto& d : report.dmt) {
    put("dmt_" + d.name + ".csv", d.curve.to_csv(0.0, d.curve.rMax().to_double(), 0.01));
  }
  if (report.compare) put("compare.csv", report.compare->to_csv());
  if (report.simulation) put("simulation.csv", report.simulation->to_csv());
  nlohmann::json m{{"configHash", report.configHash}, {"files", files}};
  put("manifest.json", m.dump(2) + "\n");
  return files;
}

}  // namespace shiftsum
