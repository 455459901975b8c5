#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shiftsum/bounds.hpp"
#include "shiftsum/channel.hpp"
#include "shiftsum/codes.hpp"
#include "shiftsum/detsum.hpp"
#include "shiftsum/errors.hpp"
#include "shiftsum/format.hpp"
#include "shiftsum/lattice.hpp"
#include "shiftsum/pipeline.hpp"
#include "shiftsum/rational.hpp"

namespace shiftsum::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double to_double(const std::string& s, const std::string& flag) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(flag + ": '" + s + "' is not a number");
  }
}

/// start:stop:step, inclusive of stop.
std::vector<double> parse_range(const std::string& text, const std::string& flag) {
  const auto p = split(text, ':');
  if (p.size() != 3) throw UsageError(flag + " expects start:stop:step, got '" + text + "'");
  const double start = to_double(p[0], flag);
  const double stop = to_double(p[1], flag);
  const double step = to_double(p[2], flag);
  if (!(step > 0) || stop < start) throw UsageError(flag + " needs step > 0 and stop >= start");
  std::vector<double> v;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long j = 0; j <= count; ++j) v.push_back(start + static_cast<double>(j) * step);
  return v;
}

/// start:factor:count geometric progression.
std::vector<double> parse_geometric(const std::string& text, const std::string& flag) {
  const auto p = split(text, ':');
  if (p.size() != 3) throw UsageError(flag + " expects start:factor:count, got '" + text + "'");
  const double start = to_double(p[0], flag);
  const double factor = to_double(p[1], flag);
  const double count = to_double(p[2], flag);
  if (!(start > 0) || !(factor > 1) || count < 1 || count != std::floor(count)) {
    throw UsageError(flag + " needs start > 0, factor > 1 and an integer count >= 1");
  }
  return geometric_grid(start, factor, static_cast<std::size_t>(count));
}

/// "l:s[:logPower],..."
ExponentTable parse_s_table(const std::string& text) {
  ExponentTable t;
  for (const auto& item : split(text, ',')) {
    const auto p = split(item, ':');
    if (p.size() < 2 || p.size() > 3) throw UsageError("--s expects l:s[:logPower] items, got '" + item + "'");
    const double l = to_double(p[0], "--s");
    if (l != std::floor(l)) throw UsageError("--s: l must be an integer");
    t[static_cast<int>(l)] = {to_double(p[1], "--s"), p.size() == 3 ? to_double(p[2], "--s") : 0.0};
  }
  return t;
}

Rational to_rational(const std::string& s, const std::string& flag) {
  try {
    return Rational::parse(s);
  } catch (const Error&) {
    throw UsageError(flag + ": '" + s + "' is not a number");
  }
}

struct Common {
  std::string format;
  std::string out;
  unsigned threads = 1;
  std::uint64_t budget = kDefaultPointBudget;
};

struct CodeArgs {
  std::string kind = "golden";
  int n = 2;
  std::string basis;
  std::string normalization = "raw";

  MatrixLattice build() const {
    CodeSpec spec;
    try {
      spec.kind = parse_code_kind(kind);
      spec.normalization = parse_normalization(normalization);
    } catch (const Error& e) {
      throw UsageError(e.detail());
    }
    spec.n = n;
    spec.basisFile = basis;
    if (spec.kind == CodeKind::Custom && basis.empty()) throw UsageError("--code custom needs --basis");
    return build_code(spec);
  }
};

void add_common(CLI::App* sub, Common& c, const std::string& default_format) {
  c.format = default_format;
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", c.out, "Write output to this file instead of stdout");
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  sub->add_option("--budget", c.budget, "Cap on enumerated lattice points");
}

void add_code(CLI::App* sub, CodeArgs& a) {
  sub->add_option("--code", a.kind, "golden | diagonal-nf | gaussian-diagonal | custom");
  sub->add_option("--n", a.n, "Matrix size for the diagonal codes");
  sub->add_option("--basis", a.basis, "Basis JSON file for --code custom");
  sub->add_option("--normalize", a.normalization, "raw | unit-minnorm");
}

EnumerationOptions enum_opts(const Common& c, bool dedup) {
  EnumerationOptions o;
  o.threads = c.threads;
  o.budget = c.budget;
  o.dedupSigns = dedup;
  return o;
}

void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + c.out);
  f << text;
}

std::string json_line(const nlohmann::json& j) { return j.dump() + "\n"; }

std::string number_line(double v) {
  // A bare JSON number; non-finite values have no JSON spelling.
  if (!std::isfinite(v)) return json_line(nlohmann::json(format_number(v)));
  return format_number(v) + "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shifted inverse determinant sums, DMT bounds and fading simulations for matrix lattices"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every command");

  std::function<void()> action;
  std::string verb;

  // construct
  Common construct_c;
  CodeArgs construct_code;
  auto* construct = app.add_subcommand("construct", "Build a code and print its basis and invariants");
  add_common(construct, construct_c, "json");
  add_code(construct, construct_code);
  construct->callback([&] {
    action = [&] {
      const MatrixLattice l = construct_code.build();
      nlohmann::json j = lattice_to_json(l);
      j["k"] = l.rank();
      j["minNormSq"] = l.min_norm_sq();
      j["covolume"] = l.covolume();
      if (construct_c.format == "csv") {
        std::string csv = "n,T,k,minNormSq,covolume\n" + std::to_string(l.n()) + "," + std::to_string(l.T()) + "," +
                          std::to_string(l.rank()) + "," + format_number(l.min_norm_sq()) + "," +
                          format_number(l.covolume()) + "\n";
        emit(construct_c, out, csv);
      } else {
        emit(construct_c, out, json_line(j));
      }
    };
  });

  // enumerate
  Common enum_c;
  CodeArgs enum_code;
  double enum_radius = 1;
  bool enum_dedup = false;
  bool enum_count = false;
  auto* enumerate_cmd = app.add_subcommand("enumerate", "List the lattice points of norm at most M");
  add_common(enumerate_cmd, enum_c, "csv");
  add_code(enumerate_cmd, enum_code);
  enumerate_cmd->add_option("--M", enum_radius, "Radius")->required();
  enumerate_cmd->add_flag("--dedup", enum_dedup, "One representative per +-X pair");
  enumerate_cmd->add_flag("--count", enum_count, "Print only the number of points");
  enumerate_cmd->callback([&] {
    action = [&] {
      const MatrixLattice l = enum_code.build();
      const EnumerationOptions o = enum_opts(enum_c, enum_dedup);
      if (enum_count) {
        const double r[] = {enum_radius};
        // shell_counts reports |L(M)|; with --dedup only one of each pair is listed.
        const auto counts = shell_counts(l, r, o);
        emit(enum_c, out, std::to_string(enum_dedup ? counts.front() / 2 : counts.front()) + "\n");
        return;
      }
      const auto pts = collect_points(l, enum_radius, o);
      if (enum_c.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : pts) arr.push_back({{"coeffs", p.coeffs}, {"normSq", p.normF * p.normF}});
        emit(enum_c, out, json_line(arr));
        return;
      }
      std::string csv;
      for (std::size_t j = 0; j < l.rank(); ++j) csv += "z" + std::to_string(j) + ",";
      csv += "norm_sq\n";
      for (const auto& p : pts) {
        for (auto z : p.coeffs) csv += std::to_string(z) + ",";
        csv += format_number(p.normF * p.normF) + "\n";
      }
      emit(enum_c, out, csv);
    };
  });

  // sum
  Common sum_c;
  CodeArgs sum_code;
  std::string sum_family = "shifted";
  double sum_m = 1;
  double sum_shift = 0;
  int sum_i = 0;
  double sum_radius = 0;
  std::string sum_radii;
  bool sum_skip = false;
  auto* sum = app.add_subcommand("sum", "Evaluate an inverse determinant sum over L(M)");
  add_common(sum, sum_c, "json");
  add_code(sum, sum_code);
  sum->add_option("--family", sum_family, "approximate | shifted | mixed");
  sum->add_option("--m", sum_m, "Exponent m");
  sum->add_option("--c", sum_shift, "Shift c (shifted family)");
  sum->add_option("--i", sum_i, "Split index (mixed family)");
  auto* sum_m_opt = sum->add_option("--M", sum_radius, "Single radius");
  auto* sum_grid_opt = sum->add_option("--radii", sum_radii, "Radius grid start:factor:count");
  sum_m_opt->excludes(sum_grid_opt);
  sum->add_flag("--skip-singular", sum_skip, "Drop points with det(XX*) = 0");
  sum->callback([&] {
    action = [&] {
      SumSpec spec;
      try {
        spec.family = parse_sum_family(sum_family);
      } catch (const Error& e) {
        throw UsageError("--family: " + e.detail());
      }
      spec.m = sum_m;
      spec.c = sum_shift;
      spec.i = sum_i;
      spec.dedupSigns = true;
      spec.skipSingular = sum_skip;
      std::vector<double> radii;
      if (!sum_radii.empty()) {
        radii = parse_geometric(sum_radii, "--radii");
      } else if (*sum_m_opt) {
        radii = {sum_radius};
      } else {
        throw UsageError("sum needs --M or --radii");
      }
      const MatrixLattice l = sum_code.build();
      const SumCurve curve = sum_curve(l, spec, radii, enum_opts(sum_c, true));
      if (sum_c.format == "csv") {
        emit(sum_c, out, curve.to_csv());
      } else if (radii.size() == 1) {
        emit(sum_c, out, number_line(curve.points.front().value));
      } else {
        emit(sum_c, out, json_line(curve.to_json()));
      }
    };
  });

  // fit
  Common fit_c;
  std::string fit_curve;
  bool fit_no_log = false;
  double fit_min_m = 2.0;
  auto* fit = app.add_subcommand("fit", "Fit log S = log K + s log M + t log log M to a curve CSV");
  add_common(fit, fit_c, "json");
  fit->add_option("--curve", fit_curve, "CSV with columns M,value[,pointCount]")->required();
  fit->add_flag("--no-log", fit_no_log, "Pin t = 0");
  fit->add_option("--min-M", fit_min_m, "Ignore points below this radius");
  fit->callback([&] {
    action = [&] {
      std::ifstream in(fit_curve);
      if (!in) throw Error(ErrorCode::IoError, "cannot open " + fit_curve);
      std::stringstream buf;
      buf << in.rdbuf();
      SumCurve all = SumCurve::from_csv(buf.str());
      SumCurve curve;
      for (const auto& p : all.points) {
        if (p.M >= fit_min_m) curve.points.push_back(p);
      }
      GrowthFitOptions o;
      o.fitLogFactor = !fit_no_log;
      const GrowthFit f = growth_fit(curve, o);
      if (fit_c.format == "csv") {
        emit(fit_c, out,
             "s,t,logK,residual,samples,has_log_factor\n" + format_number(f.s) + "," + format_number(f.t) + "," +
                 format_number(f.logK) + "," + format_number(f.residual) + "," + std::to_string(f.samples) + "," +
                 (f.hasLogFactor ? "1" : "0") + "\n");
      } else {
        emit(fit_c, out, json_line(to_json(f)));
      }
    };
  });

  // envelope
  Common env_c;
  int env_n = 2;
  int env_k = 8;
  int env_m = 4;
  std::string env_s;
  std::vector<int> env_indices;
  double env_tol = 1e-9;
  auto* envelope = app.add_subcommand("envelope", "W_i envelope from growth exponents s(l)");
  add_common(envelope, env_c, "json");
  envelope->add_option("--n", env_n, "Matrix size n")->required();
  envelope->add_option("--k", env_k, "Lattice rank k")->required();
  envelope->add_option("--m", env_m, "Exponent m")->required();
  envelope->add_option("--s", env_s, "Exponent table l:s[:logPower],...")->required();
  envelope->add_option("--indices", env_indices, "Split indices (default 0..m)")->delimiter(',');
  envelope->add_option("--tie-tolerance", env_tol, "Tolerance for s(l) = 2i");
  envelope->callback([&] {
    action = [&] {
      const WiEnvelope e = wi_envelope(env_n, env_k, env_m, parse_s_table(env_s), env_indices, "cli", env_tol);
      if (env_c.format == "csv") {
        std::string csv = "i,c_exponent,M_exponent,log_power,regime\n";
        for (const auto& w : e.entries) {
          csv += std::to_string(w.i) + "," + format_number(w.cExponent) + "," + format_number(w.mExponent) + "," +
                 format_number(w.logPower) + "," + to_string(w.regime) + "\n";
        }
        emit(env_c, out, csv);
      } else {
        emit(env_c, out, json_line(e.to_json()));
      }
    };
  });

  // dmt
  Common dmt_c;
  std::string dmt_a;
  std::string dmt_b = "0";
  int dmt_k = 0;
  int dmt_t = 0;
  std::string dmt_grid = "0:1:0.01";
  bool dmt_naive = false;
  auto* dmt = app.add_subcommand("dmt", "DMT lower-bound line (a - rT(2a+b)/k)^+ or the naive (a - 2rTa/k)^+");
  add_common(dmt, dmt_c, "csv");
  dmt->add_option("--a", dmt_a, "c exponent a")->required();
  dmt->add_option("--b", dmt_b, "M exponent b");
  dmt->add_option("--k", dmt_k, "Lattice rank")->required();
  dmt->add_option("--T", dmt_t, "Block length")->required();
  dmt->add_option("--grid", dmt_grid, "r grid start:stop:step");
  dmt->add_flag("--naive", dmt_naive, "Naive lattice decoding line (ignores --b)");
  dmt->callback([&] {
    action = [&] {
      const Rational a = to_rational(dmt_a, "--a");
      const Rational b = to_rational(dmt_b, "--b");
      const DmtCurve curve = dmt_naive ? dmt_naive_bound(a, dmt_k, dmt_t) : dmt_ml_bound(a, b, dmt_k, dmt_t);
      if (dmt_c.format == "json") {
        emit(dmt_c, out, json_line(curve.to_json()));
        return;
      }
      std::string csv = "r,d\n";
      for (double r : parse_range(dmt_grid, "--grid")) {
        csv += format_number(r) + "," + format_number(curve.evaluate(r)) + "\n";
      }
      emit(dmt_c, out, csv);
    };
  });

  // threshold
  Common thr_c;
  std::string thr_d;
  std::string thr_t = "0";
  double thr_m = 0;
  auto* threshold = app.add_subcommand("threshold", "SNR threshold exponent (t + d)/d");
  add_common(threshold, thr_c, "json");
  threshold->add_option("--d", thr_d, "Diversity d")->required();
  threshold->add_option("--t", thr_t, "M exponent t");
  auto* thr_m_opt = threshold->add_option("--M", thr_m, "Also evaluate M^{(t+d)/d}");
  threshold->callback([&] {
    action = [&] {
      const Rational d = to_rational(thr_d, "--d");
      const Rational t = to_rational(thr_t, "--t");
      const Rational e = snr_threshold_exponent(d, t);
      if (*thr_m_opt) {
        emit(thr_c, out, number_line(snr_threshold(d.to_double(), t.to_double(), thr_m)));
      } else if (thr_c.format == "csv") {
        emit(thr_c, out, "exponent,exact\n" + format_number(e.to_double()) + "," + e.to_string() + "\n");
      } else {
        emit(thr_c, out, number_line(e.to_double()));
      }
    };
  });

  // simulate
  Common sim_c;
  CodeArgs sim_code;
  ChannelConfig sim_cfg;
  std::string sim_snr = "5:25:2.5";
  std::string sim_decoder = "ml-exhaustive";
  double sim_radius = 0;
  double sim_r = 0;
  bool sim_union = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo block error rate over a Rayleigh fading channel");
  add_common(simulate_cmd, sim_c, "csv");
  add_code(simulate_cmd, sim_code);
  simulate_cmd->add_option("--nr", sim_cfg.n_r, "Receive antennas");
  simulate_cmd->add_option("--snr", sim_snr, "SNR grid in dB, start:stop:step");
  simulate_cmd->add_option("--trials", sim_cfg.trialsPerPoint, "Trials per SNR point");
  simulate_cmd->add_option("--seed", sim_cfg.seed, "RNG seed");
  simulate_cmd->add_option("--decoder", sim_decoder, "ml-exhaustive | naive-lattice");
  auto* sim_radius_opt = simulate_cmd->add_option("--radius", sim_radius, "Fixed code L(radius)");
  auto* sim_r_opt = simulate_cmd->add_option("--r", sim_r, "Multiplexing gain (coding scheme mode)");
  sim_radius_opt->excludes(sim_r_opt);
  simulate_cmd->add_option("--code-cap", sim_cfg.codeCap, "Largest code for exhaustive ML");
  simulate_cmd->add_flag("--union-bound", sim_union, "Add the union bound per SNR point (JSON only)");
  simulate_cmd->callback([&] {
    action = [&] {
      try {
        sim_cfg.decoder = parse_decoder(sim_decoder);
      } catch (const Error& e) {
        throw UsageError("--decoder: " + e.detail());
      }
      sim_cfg.snrGridDb = parse_range(sim_snr, "--snr");
      if (*sim_r_opt) {
        sim_cfg.multiplexingGain = sim_r;
      } else {
        sim_cfg.fixedRadius = *sim_radius_opt ? sim_radius : 1.0;
      }
      sim_cfg.threads = sim_c.threads;
      const MatrixLattice l = sim_code.build();
      const EnumerationOptions o = enum_opts(sim_c, false);
      const SimResult res = simulate(l, sim_cfg, o);
      if (sim_c.format == "csv") {
        emit(sim_c, out, res.to_csv());
        return;
      }
      nlohmann::json j = res.to_json();
      if (sim_union) {
        nlohmann::json ub = nlohmann::json::array();
        for (const auto& p : res.points) {
          const double rho = std::pow(10.0, p.snrDb / 10.0);
          const FiniteCode code = sim_cfg.fixedRadius ? fixed_code(l, *sim_cfg.fixedRadius, o)
                                                      : coding_scheme(l, *sim_cfg.multiplexingGain, rho, o);
          ub.push_back(union_bound(l, code, p.theta, sim_cfg.n_r, rho, o));
        }
        j["unionBound"] = ub;
      }
      emit(sim_c, out, json_line(j));
    };
  });

  // run
  Common run_c;
  std::string run_preset;
  std::string run_config;
  bool run_print = false;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment end to end and write its report directory");
  add_common(run_cmd, run_c, "json");
  auto* preset_opt = run_cmd->add_option("--preset", run_preset, "golden | diagonal-nf-2 | gaussian-diagonal-2");
  auto* config_opt = run_cmd->add_option("--config", run_config, "Experiment config JSON file");
  preset_opt->excludes(config_opt);
  run_cmd->add_flag("--print-report", run_print, "Print report.json to stdout as well");
  run_cmd->callback([&] {
    action = [&] {
      ExperimentConfig cfg;
      if (!run_preset.empty()) {
        try {
          cfg = preset(run_preset);
        } catch (const Error& e) {
          throw UsageError("--preset: " + e.detail());
        }
      } else if (!run_config.empty()) {
        cfg = load_experiment_config(run_config);
      } else {
        throw UsageError("run needs --preset or --config");
      }
      cfg.threads = run_c.threads;
      if (run_c.budget != kDefaultPointBudget) cfg.budget = run_c.budget;
      std::string dir = run_c.out;
      if (dir.empty()) dir = cfg.outputDir;
      if (dir.empty()) {
        const char* env = std::getenv(kOutputDirEnv);
        dir = (env && *env) ? std::string(env) + "/" + cfg.name : "shiftsum-out/" + cfg.name;
      }
      const ExperimentReport rep = run(cfg);
      const auto files = write_report(rep, dir);
      if (run_print) {
        out << rep.to_json().dump(2) << "\n";
      } else if (run_c.format == "csv") {
        out << "output_dir,config_hash,files\n" << dir << "," << rep.configHash << "," << files.size() << "\n";
      } else {
        out << json_line({{"outputDir", dir}, {"configHash", rep.configHash}, {"files", files}});
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  verb = app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name();
  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error [" << verb << "]: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error [" << verb << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error [" << verb << "]: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace shiftsum::cli
