#include "shiftsum/codes.hpp"

#include <cmath>
#include <numbers>

#include "shiftsum/errors.hpp"

namespace shiftsum {

namespace {

constexpr double kTheta = std::numbers::phi;
constexpr double kThetaBar = 1.0 - std::numbers::phi;
const cplx kI(0.0, 1.0);

ComplexMatrix golden_codeword(cplx a, cplx b, cplx c, cplx d) {
  const cplx alpha = 1.0 + kI * (1.0 - kTheta);
  const cplx alpha_bar = 1.0 + kI * (1.0 - kThetaBar);
  const double s = 1.0 / std::sqrt(5.0);
  return ComplexMatrix(2, 2,
                       std::vector<cplx>{s * alpha * (a + b * kTheta), s * alpha * (c + d * kTheta),
                                         s * kI * alpha_bar * (c + d * kThetaBar),
                                         s * alpha_bar * (a + b * kThetaBar)});
}

}  // namespace

MatrixLattice golden_code() {
  std::vector<ComplexMatrix> basis;
  for (int pos = 0; pos < 4; ++pos) {
    for (const cplx unit : {cplx(1.0), kI}) {
      cplx v[4] = {0.0, 0.0, 0.0, 0.0};
      v[pos] = unit;
      basis.push_back(golden_codeword(v[0], v[1], v[2], v[3]));
    }
  }
  return MatrixLattice::build(std::move(basis));
}

MatrixLattice diagonal_nf_code(int n) {
  if (n != 2) {
    throw Error(ErrorCode::UnsupportedDegree,
                "diagonal number-field code implemented for n = 2 only, got n = " + std::to_string(n));
  }
  std::vector<ComplexMatrix> basis;
  // 1, i, theta, i*theta under (sigma_1, sigma_2).
  basis.push_back(ComplexMatrix::diagonal({1.0, 1.0}));
  basis.push_back(ComplexMatrix::diagonal({kI, kI}));
  basis.push_back(ComplexMatrix::diagonal({kTheta, kThetaBar}));
  basis.push_back(ComplexMatrix::diagonal({kI * kTheta, kI * kThetaBar}));
  return MatrixLattice::build(std::move(basis));
}

MatrixLattice gaussian_diagonal(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "gaussian_diagonal needs n >= 1");
  const auto un = static_cast<std::size_t>(n);
  std::vector<ComplexMatrix> basis;
  for (std::size_t j = 0; j < un; ++j) {
    for (const cplx unit : {cplx(1.0), kI}) {
      std::vector<cplx> d(un, 0.0);
      d[j] = unit;
      basis.push_back(ComplexMatrix::diagonal(d));
    }
  }
  return MatrixLattice::build(std::move(basis));
}

MatrixLattice unit_min_norm(const MatrixLattice& lattice) {
  return lattice.scaled(1.0 / std::sqrt(lattice.min_norm_sq()));
}

MatrixLattice build_code(const CodeSpec& spec) {
  MatrixLattice lat = [&] {
    switch (spec.kind) {
      case CodeKind::Golden: return golden_code();
      case CodeKind::DiagonalNf: return diagonal_nf_code(spec.n);
      case CodeKind::GaussianDiagonal: return gaussian_diagonal(spec.n);
      case CodeKind::Custom:
        if (spec.basisFile.empty()) throw Error(ErrorCode::ConfigError, "custom code needs a basis file");
        return load_lattice_json(spec.basisFile);
    }
    throw Error(ErrorCode::ConfigError, "unknown code kind");
  }();
  if (spec.normalization == Normalization::UnitMinNorm) return unit_min_norm(lat);
  return lat;
}

std::string to_string(CodeKind kind) {
  switch (kind) {
    case CodeKind::Golden: return "golden";
    case CodeKind::DiagonalNf: return "diagonal-nf";
    case CodeKind::GaussianDiagonal: return "gaussian-diagonal";
    case CodeKind::Custom: return "custom";
  }
  return "unknown";
}

std::string to_string(Normalization norm) {
  return norm == Normalization::Raw ? "raw" : "unit-minnorm";
}

CodeKind parse_code_kind(const std::string& s) {
  if (s == "golden") return CodeKind::Golden;
  if (s == "diagonal-nf") return CodeKind::DiagonalNf;
  if (s == "gaussian-diagonal") return CodeKind::GaussianDiagonal;
  if (s == "custom") return CodeKind::Custom;
  throw Error(ErrorCode::ConfigError, "unknown code kind '" + s + "'");
}

Normalization parse_normalization(const std::string& s) {
  if (s == "raw") return Normalization::Raw;
  if (s == "unit-minnorm") return Normalization::UnitMinNorm;
  throw Error(ErrorCode::ConfigError, "unknown normalization '" + s + "'");
}

nlohmann::json to_json(const CodeSpec& spec) {
  nlohmann::json j{{"kind", to_string(spec.kind)}, {"n", spec.n}, {"normalization", to_string(spec.normalization)}};
  if (spec.kind == CodeKind::Custom) j["basisFile"] = spec.basisFile;
  return j;
}

CodeSpec code_spec_from_json(const nlohmann::json& j) {
  CodeSpec spec;
  spec.kind = parse_code_kind(j.at("kind").get<std::string>());
  spec.n = j.value("n", 2);
  spec.normalization = parse_normalization(j.value("normalization", std::string("raw")));
  spec.basisFile = j.value("basisFile", std::string());
  return spec;
}

}  // namespace shiftsum
