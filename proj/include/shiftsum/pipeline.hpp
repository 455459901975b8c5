#pragma once

// End-to-end studies: build a code, evaluate sum curves, fit growth
// exponents, derive W_i envelopes, DMT lines and SNR thresholds, optionally
// simulate, and persist everything under one config hash.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shiftsum/bounds.hpp"
#include "shiftsum/channel.hpp"
#include "shiftsum/codes.hpp"
#include "shiftsum/detsum.hpp"

namespace shiftsum {

/// How the naive-decoding DMT line is obtained.
///   convergence:  the whole-lattice sum is O(c^{-n_r}) once k <= 2 n_r
///                 (with a log factor at k = 2 n_r), so a = n_r.
///   diagonal-nf:  NVD diagonal code, O(c^{-(n n_r - 1)}), so a = n n_r - 1.
enum class NaiveSource { None, Convergence, DiagonalNf };
std::string to_string(NaiveSource s);
NaiveSource parse_naive_source(const std::string& s);

struct EnvelopeConfig {
  bool enabled = false;
  /// Exponent m of det(I + cXX*)^{-m}; 0 means the DMT n_r.
  int m = 0;
  /// Empty means 0..m.
  std::vector<int> indices;
  /// Growth exponents taken from the literature (keyed by l).
  ExponentTable literature;
  /// Tie tolerance when classifying fitted exponents against 2i.
  double fitTieTolerance = 0.5;
};

struct DmtConfig {
  bool enabled = false;
  int n_r = 1;
  /// 0 means "from the lattice".
  int T = 0;
  int k = 0;
  NaiveSource naive = NaiveSource::None;
};

struct CompareConfig {
  bool enabled = false;
  int m = 1;
  std::vector<double> c;
  std::vector<double> M;
  double slack = 1e-9;
};

struct ExperimentConfig {
  std::string name = "experiment";
  CodeSpec code;
  /// Increasing radius grid shared by all sum curves.
  std::vector<double> radii;
  std::vector<SumSpec> sums;
  bool fit = false;
  GrowthFitOptions fitOptions;
  /// Points with M below this are left out of growth fits (log log M needs M > 1).
  double fitMinRadius = 2.0;
  EnvelopeConfig envelope;
  DmtConfig dmt;
  CompareConfig compare;
  std::optional<ChannelConfig> simulation;
  std::uint64_t seed = 1;
  std::uint64_t budget = kDefaultPointBudget;
  std::size_t partitions = 16;
  /// Not part of the hash.
  unsigned threads = 1;
  std::string outputDir;
};

/// Canonical JSON (all fields, fixed key order); threads and outputDir are
/// omitted so they do not change the hash.
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// 16 hex digits (FNV-1a 64 of the canonical JSON dump).
std::string config_hash(const ExperimentConfig& c);

/// Radii start, start*factor, ..., count entries.
std::vector<double> geometric_grid(double start, double factor, std::size_t count);

/// Embedded configs: "golden", "diagonal-nf-2", "gaussian-diagonal-2".
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct NamedFit {
  std::size_t curve = 0;
  GrowthFit fit;
};

struct NamedDmt {
  std::string name;
  DmtCurve curve;
};

struct ThresholdEntry {
  std::string source;
  int i = 0;
  Rational d;
  Rational t;
  Rational exponent;
};

struct CompareCell {
  double c = 0;
  double M = 0;
  double empirical = 0;
  /// Anchored envelope K * min_i shape_i(M, c).
  double envelope = 0;
  double ratio = 0;
  int activeIndex = 0;
  bool withinSlack = false;
};

struct CompareTable {
  int m = 0;
  double anchorM = 0;
  double anchorC = 0;
  double anchorConstant = 0;
  std::vector<CompareCell> cells;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

struct UnionBoundPoint {
  double snrDb = 0;
  double bound = 0;
};

struct ExperimentReport {
  std::string configHash;
  ExperimentConfig config;
  nlohmann::json construction;
  std::vector<SumCurve> curves;
  std::vector<NamedFit> fits;
  std::vector<WiEnvelope> envelopes;
  std::vector<NamedDmt> dmt;
  std::vector<ThresholdEntry> thresholds;
  std::optional<CompareTable> compare;
  std::optional<SimResult> simulation;
  std::vector<UnionBoundPoint> unionBounds;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
  std::string summary() const;
};

/// Every thrown Error carries the stage that failed in its message.
ExperimentReport run(const ExperimentConfig& config);

/// Empirical shifted sums on the (c, M) grid against the literature W_i
/// envelope, with the constant fixed at the largest (M, c).
CompareTable compare_bound_vs_truth(const ExperimentConfig& config);
CompareTable compare_bound_vs_truth(const MatrixLattice& lattice, const WiEnvelope& envelope,
                                    const CompareConfig& cmp, const EnumerationOptions& opts = {});

/// Writes report.json, summary.txt, manifest.json and one CSV per curve into
/// `dir`. Refuses (IoError) when `dir` holds a manifest with another hash.
/// Returns the written file names in order.
std::vector<std::string> write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace shiftsum
