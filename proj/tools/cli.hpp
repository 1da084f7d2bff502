#pragma once

// Command-line driver. `run` holds all the logic so tests can call it without
// spawning a process.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flb/flb.hpp"
#include "flb/io.hpp"

namespace flb::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFalse = 1,
  kExitUsage = 2,
  kExitInvalid = 3,
  kExitBreach = 4,
  kExitPrecondition = 5,
};

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::InvalidProblem:
    case ErrorCode::InvalidResolution:
      return kExitUsage;
    case ErrorCode::NotHermitian:
    case ErrorCode::NonFinite:
    case ErrorCode::NoConvergence:
    case ErrorCode::Singular:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::InvalidDimension:
      return kExitInvalid;
    case ErrorCode::ZeroTau:
    case ErrorCode::OffCircle:
    case ErrorCode::CouplingNotOne:
    case ErrorCode::DegenerateAngles:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::HypothesisNotMet:
      return kExitPrecondition;
  }
  return kExitUsage;
}

struct Tolerances {
  double trace = 1e-9;
  double moment = 1e-9;
  double det = 1e-8;
  double unit_det = 1e-9;
  double pairing = 1e-8;
  double detect = kDetectTol;
  double gauge = 1e-10;
};

struct TolSlot {
  const char* name;  // flag suffix; env name is FLB_TOL_ + upper-case with '_'
  double Tolerances::*field;
};

inline constexpr std::array<TolSlot, 7> kTolSlots{{
    {"trace", &Tolerances::trace},
    {"moment", &Tolerances::moment},
    {"det", &Tolerances::det},
    {"unit-det", &Tolerances::unit_det},
    {"pairing", &Tolerances::pairing},
    {"detect", &Tolerances::detect},
    {"gauge", &Tolerances::gauge},
}};

inline std::string env_name(const char* slot) {
  std::string out = "FLB_TOL_";
  for (const char* c = slot; *c; ++c) out += *c == '-' ? '_' : static_cast<char>(std::toupper(*c));
  return out;
}

inline double positive_tolerance(double v, const std::string& source) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::Parse, source + ": tolerance must be positive");
  return v;
}

inline double positive_tolerance(const std::string& text, const std::string& source) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw Error(ErrorCode::Parse, source + ": expected a number, got \"" + text + "\"");
  return positive_tolerance(v, source);
}

/// Defaults, then FLB_TOL_* from the environment, then flags.
inline Tolerances resolve_tolerances(const std::array<std::optional<double>, kTolSlots.size()>& flags) {
  Tolerances tol;
  for (std::size_t i = 0; i < kTolSlots.size(); ++i) {
    const std::string env = env_name(kTolSlots[i].name);
    if (const char* v = std::getenv(env.c_str())) tol.*kTolSlots[i].field = positive_tolerance(v, env);
    if (flags[i]) {
      tol.*kTolSlots[i].field = positive_tolerance(*flags[i], std::string("--tol-") + kTolSlots[i].name);
    }
  }
  return tol;
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    io::atomic_write(path, content);
  }
}

inline io::OperatorFile load(const std::string& path) {
  return io::parse_operator(io::read_file(path));
}

inline BlockJacobiOperator load_jacobi(const std::string& path) {
  BlockJacobiOperator J = io::as_jacobi(load(path));
  require_valid(J);
  return J;
}

inline std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
  std::string kind;
  std::size_t p = 1;
  std::size_t m = 1;
  std::uint64_t seed = 0;
  double spread = 0.3;
  bool real = false;
  std::string output;
};

inline int cmd_generate(const GenerateArgs& g, std::ostream& out) {
  const BlockJacobiOperator J = g.kind == "free"
                                    ? free_operator(g.p, g.m)
                                    : random_operator(g.p, g.m, g.seed, g.spread, g.real ? Field::Real : Field::Complex);
  emit(g.output, io::dump(io::to_json(J)), out);
  return kExitOk;
}

// ---- bands -----------------------------------------------------------------

struct BandsArgs {
  std::string input;
  std::size_t samples = 512;
  std::string csv;
  std::string summary;
};

inline int cmd_bands(const BandsArgs& a, std::ostream& out) {
  const io::OperatorFile f = load(a.input);
  BranchSamples s;
  BandStructure B;
  if (f.general) {
    s = sample_branches(f.coefficients, a.samples);
    B = bands_from_samples(f.coefficients, s);
  } else {
    const BlockJacobiOperator J = io::as_jacobi(f);
    s = sample_branches(J, a.samples);
    B = bands_from_samples(J, s);
  }
  const std::string summary = io::dump(io::to_json(B));
  if (!a.csv.empty()) io::atomic_write(a.csv, io::branches_csv(s));
  if (!a.summary.empty() && a.summary != "-") io::atomic_write(a.summary, summary);
  out << summary;
  return kExitOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string input;
  std::vector<double> tau_angles;
  std::size_t z_samples = 20;
  std::uint64_t seed = 7;
  std::optional<double> corrupt_a1;
};

struct ResidualRow {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool lower_bound = false;  // value must be ≥ −tol rather than ≤ tol

  bool ok() const { return lower_bound ? value >= -tol : value <= tol; }
};

inline double relative(double x, double ref) {
  return std::abs(x - ref) / std::max(1.0, std::abs(ref));
}

/// Residual table. `declared` supplies the coefficient-side quantities (traces,
/// coupling constant); `actual` is the operator the spectral side is computed
/// from. They coincide unless a corruption was injected.
inline std::vector<ResidualRow> verify_residuals(const BlockJacobiOperator& declared,
                                                 const BlockJacobiOperator& actual, const VerifyArgs& a,
                                                 const Tolerances& tol) {
  const std::size_t p = declared.p;
  const double pm = static_cast<double>(p * declared.m);
  const double c = coupling_constant(declared);

  double rhs1 = 0.0;
  double rhs2 = 0.0;
  for (std::size_t n = 0; n < p; ++n) {
    rhs1 += declared.b[n].trace().real();
    rhs2 += (declared.b[n] * declared.b[n]).trace().real() + 2.0 * (declared.a[n] * declared.a[n]).trace().real();
  }

  std::vector<double> angles = a.tau_angles;
  if (angles.empty()) {
    for (int k = 0; k < 8; ++k) angles.push_back(2.0 * std::numbers::pi * (k + 0.25) / 8.0);
  }

  // S1 off the diagonal needs p ≥ 2; a single site is extended to three.
  const std::size_t s1_ext = p == 1 ? 3 : 1;
  const BlockJacobiOperator s1_op = s1_ext == 1 ? actual : period_extend(actual, s1_ext);

  double s1 = 0.0;
  double s2 = 0.0;
  double cert = std::numeric_limits<double>::infinity();
  for (double x : angles) {
    const Complex t = unit(x);
    const double S1 = floquet_eigenvalues(s1_op, t).sum() / static_cast<double>(s1_ext);
    const MomentReport r = moment_report(actual, t);
    s1 = std::max(s1, relative(S1, rhs1));
    s2 = std::max(s2, relative(r.S2, rhs2));
    cert = std::min(cert, r.S2 - 2.0 * pm * std::pow(c, 2.0 / pm));
  }

  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  double det_identity = 0.0;
  const double c_actual = coupling_constant(actual);
  for (std::size_t k = 0; k < a.z_samples; ++k) {
    const Complex z = std::polar(3.0 * std::sqrt(unit01(rng)), 2.0 * std::numbers::pi * unit01(rng));
    const Complex tau = std::polar(0.5 * std::pow(4.0, unit01(rng)), 2.0 * std::numbers::pi * unit01(rng));
    const Complex lhs = char_det(actual, z, tau);
    const Complex rhs = char_det_from_floquet(actual, z, tau) * c_actual / c;
    det_identity = std::max(det_identity, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }

  // Real z across the spectral hull.
  const RealVector e1 = floquet_eigenvalues(actual, Complex(1.0, 0.0));
  const RealVector e2 = floquet_eigenvalues(actual, Complex(-1.0, 0.0));
  const double lo = std::min(e1.minCoeff(), e2.minCoeff());
  const double hi = std::max(e1.maxCoeff(), e2.maxCoeff());
  const bool real = has_real_coefficients(actual);
  double unit_det = 0.0;
  double pairing = 0.0;
  for (std::size_t k = 0; k < a.z_samples; ++k) {
    const double z = lo + (hi - lo) * unit01(rng);
    unit_det = std::max(unit_det, std::abs(det(monodromy_matrix(actual, z).M) - 1.0));
    pairing = std::max(pairing, reciprocal_pairing_residual(actual, z, !real));
  }

  return {
      {s1_ext == 1 ? "trace_s1" : "trace_s1_ext3", s1, tol.trace, false},
      {"trace_s2", s2, tol.trace, false},
      {"moment_certificate", cert, tol.moment, true},
      {"det_identity", det_identity, tol.det, false},
      {"unit_det_monodromy", unit_det, tol.unit_det, false},
      {real ? "reciprocal_pairing" : "reciprocal_pairing_conj", pairing, tol.pairing, false},
  };
}

inline int cmd_verify(const VerifyArgs& a, const Tolerances& tol, std::ostream& out) {
  const BlockJacobiOperator declared = load_jacobi(a.input);
  BlockJacobiOperator actual = declared;
  if (a.corrupt_a1) actual.a[0] *= *a.corrupt_a1;

  const auto rows = verify_residuals(declared, actual, a, tol);
  if (declared.p == 1) out << "note: p = 1, S1 evaluated on the 3-fold period extension\n";
  if (a.corrupt_a1) out << "note: a_1 scaled by " << fmt("%.17g", *a.corrupt_a1) << " after validation\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %-24s %-10s %s\n", "check", "residual", "tolerance", "status");
  out << line;
  std::size_t breaches = 0;
  for (const auto& r : rows) {
    if (!r.ok()) ++breaches;
    std::snprintf(line, sizeof line, "%-26s %-24.17g %-10.3g %s\n", r.name.c_str(), r.value,
                  r.lower_bound ? -r.tol : r.tol, r.ok() ? "ok" : "BREACH");
    out << line;
  }
  out << (breaches == 0 ? "all residuals within tolerance\n" : std::to_string(breaches) + " residual(s) out of tolerance\n");
  return breaches == 0 ? kExitOk : kExitBreach;
}

// ---- detect ----------------------------------------------------------------

struct DetectArgs {
  std::string input;
  std::string theorem;
  std::optional<double> kappa1;
  std::optional<double> kappa2;
  std::optional<std::size_t> n1;
  double tau_angle = 0.0;
  std::size_t samples = 512;
  std::optional<double> tol;
};

inline int cmd_detect(const DetectArgs& a, const Tolerances& tol, std::ostream& out, std::ostream& err) {
  auto need = [&](bool have, const char* what) {
    if (!have) {
      err << "detect: theorem " << a.theorem << " requires " << what << "\n";
      return false;
    }
    return true;
  };
  if (a.theorem == "ii" && !need(a.kappa1.has_value(), "--kappa1")) return kExitUsage;
  if (a.theorem == "iii" &&
      !need(a.kappa1 && a.kappa2 && a.n1, "--kappa1, --kappa2 and --n1")) {
    return kExitUsage;
  }
  const double t = a.tol ? positive_tolerance(*a.tol, "--tol") : tol.detect;
  const BlockJacobiOperator J = load_jacobi(a.input);

  DetectionVerdict v;
  if (a.theorem == "borg") {
    v = detect_borg_interval(J, t, a.samples);
  } else if (a.theorem == "i") {
    v = detect_free_by_moment(J, unit(a.tau_angle), t);
  } else if (a.theorem == "ii") {
    v = detect_free_by_eigen_formula(J, *a.kappa1, t);
  } else {
    v = detect_free_two_point(J, *a.kappa1, *a.kappa2, *a.n1, t);
  }
  io::json doc = io::to_json(v);
  doc["theorem"] = a.theorem;
  doc["tol"] = t;
  out << io::dump(doc);
  return v.verdict ? kExitOk : kExitFalse;
}

// ---- extremal --------------------------------------------------------------

struct ExtremalArgs {
  long long s = 0;
  double r = 0.0;
  bool oracle = false;
  std::size_t budget = 10000;
  std::uint64_t seed = 1;
};

inline int cmd_extremal(const ExtremalArgs& a, std::ostream& out) {
  if (a.s < 2) throw Error(ErrorCode::InvalidProblem, "extremal: s must be >= 2");
  const auto s = static_cast<std::size_t>(a.s);
  require_problem(s, a.r);
  const ExtremalConfig cfg = extremal_config(s, a.r);
  io::json doc;
  doc["s"] = s;
  doc["r"] = a.r;
  doc["closed_form"] = extremal_value(s, a.r);
  doc["config"] = cfg.x;
  doc["max_abs"] = cfg.max_abs;
  if (a.oracle) {
    const double best = oracle_max_sum_squares(s, a.r, a.budget, a.seed);
    doc["oracle_best"] = best;
    doc["gap"] = best - doc["closed_form"].get<double>();
  } else {
    doc["oracle_best"] = nullptr;
    doc["gap"] = nullptr;
  }
  out << io::dump(doc);
  return kExitOk;
}

// ---- gauge -----------------------------------------------------------------

struct GaugeArgs {
  std::string input;
  std::string output;
  std::string unitaries;
};

inline std::string default_unitaries_path(const std::string& output) {
  if (output.empty() || output == "-") return {};
  std::filesystem::path p(output);
  p.replace_extension(".unitaries.json");
  return p.string();
}

inline int cmd_gauge(const GaugeArgs& a, const Tolerances& tol, std::ostream& out) {
  const GeneralBlockJacobi G = load(a.input).coefficients;
  const GaugeResult r = gauge_normalize(G);
  const GaugeResiduals res = gauge_residuals(G, r);

  const std::string upath = a.unitaries.empty() ? default_unitaries_path(a.output) : a.unitaries;
  if (!upath.empty()) io::atomic_write(upath, io::dump(io::unitaries_to_json(r.u)));
  if (!a.output.empty() && a.output != "-") io::atomic_write(a.output, io::dump(io::to_json(r.normalized)));

  const double worst = std::max({res.a, res.b, res.unitary});
  io::json doc{{"residual_a", res.a},
               {"residual_b", res.b},
               {"residual_unitary", res.unitary},
               {"holonomy_commutator", holonomy_commutator(r)},
               {"tol", tol.gauge},
               {"within_tolerance", worst <= tol.gauge}};
  if (a.output.empty() || a.output == "-") doc["normalized"] = io::to_json(r.normalized);
  out << io::dump(doc);
  return worst <= tol.gauge ? kExitOk : kExitBreach;
}

// ---- entry -----------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral computations for periodic block Jacobi operators", "flb"};
  app.require_subcommand(1);
  app.fallthrough();

  std::array<std::optional<double>, kTolSlots.size()> tol_flags;
  for (std::size_t i = 0; i < kTolSlots.size(); ++i) {
    app.add_option(std::string("--tol-") + kTolSlots[i].name, tol_flags[i],
                   "tolerance override (env " + env_name(kTolSlots[i].name) + ")");
  }

  GenerateArgs gen;
  auto* sc_gen = app.add_subcommand("generate", "write a free or random operator file");
  sc_gen->add_option("kind", gen.kind)->required()->check(CLI::IsMember({"free", "random"}));
  sc_gen->add_option("p", gen.p)->required()->check(CLI::PositiveNumber);
  sc_gen->add_option("m", gen.m)->required()->check(CLI::PositiveNumber);
  sc_gen->add_option("--seed", gen.seed);
  sc_gen->add_option("--spread", gen.spread)->check(CLI::NonNegativeNumber);
  sc_gen->add_flag("--real", gen.real, "real symmetric coefficients");
  sc_gen->add_option("-o,--output", gen.output);

  BandsArgs bands;
  auto* sc_bands = app.add_subcommand("bands", "band structure and Floquet branch samples");
  sc_bands->add_option("-i,--input", bands.input)->required();
  sc_bands->add_option("--samples", bands.samples);
  sc_bands->add_option("--csv", bands.csv, "branch samples CSV");
  sc_bands->add_option("--summary", bands.summary, "band summary JSON");

  VerifyArgs ver;
  auto* sc_ver = app.add_subcommand("verify", "residuals of the trace, determinant and monodromy identities");
  sc_ver->add_option("-i,--input", ver.input)->required();
  sc_ver->add_option("--tau", ver.tau_angles, "unit-circle angles for the trace checks");
  sc_ver->add_option("--z-samples", ver.z_samples);
  sc_ver->add_option("--seed", ver.seed);
  sc_ver->add_option("--corrupt-a1", ver.corrupt_a1, "scale a_1 after validation (testing aid)");

  DetectArgs det;
  auto* sc_det = app.add_subcommand("detect", "free-operator detectors");
  sc_det->add_option("-i,--input", det.input)->required();
  sc_det->add_option("--theorem", det.theorem)->required()->check(CLI::IsMember({"borg", "i", "ii", "iii"}));
  sc_det->add_option("--kappa1", det.kappa1);
  sc_det->add_option("--kappa2", det.kappa2);
  sc_det->add_option("--n1", det.n1);
  sc_det->add_option("--tau", det.tau_angle, "angle of τ for theorem i");
  sc_det->add_option("--samples", det.samples);
  sc_det->add_option("--tol", det.tol);

  ExtremalArgs ext;
  auto* sc_ext = app.add_subcommand("extremal", "Chebyshev extremal problem");
  sc_ext->add_option("s", ext.s)->required();
  sc_ext->add_option("r", ext.r)->required();
  sc_ext->add_flag("--oracle", ext.oracle);
  sc_ext->add_option("--budget", ext.budget);
  sc_ext->add_option("--seed", ext.seed);

  GaugeArgs gauge;
  auto* sc_gauge = app.add_subcommand("gauge", "unitary gauge to positive off-diagonal blocks");
  sc_gauge->add_option("-i,--input", gauge.input)->required();
  sc_gauge->add_option("-o,--output", gauge.output);
  sc_gauge->add_option("--unitaries", gauge.unitaries);

  std::vector<const char*> argv{"flb"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "flb: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const Tolerances tol = resolve_tolerances(tol_flags);
    if (sc_gen->parsed()) return cmd_generate(gen, out);
    if (sc_bands->parsed()) return cmd_bands(bands, out);
    if (sc_ver->parsed()) return cmd_verify(ver, tol, out);
    if (sc_det->parsed()) return cmd_detect(det, tol, out, err);
    if (sc_ext->parsed()) return cmd_extremal(ext, out);
    if (sc_gauge->parsed()) return cmd_gauge(gauge, tol, out);
  } catch (const Error& e) {
    err << "flb: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "flb: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace flb::cli
