#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topodyn/certificates.hpp"
#include "topodyn/config.hpp"
#include "topodyn/errors.hpp"
#include "topodyn/limits.hpp"
#include "topodyn/serialize.hpp"
#include "topodyn/span.hpp"
#include "topodyn/systems.hpp"
#include "topodyn/version.hpp"

namespace topodyn {

struct RunOutcome {
  ordered_json report;  // deterministic payload; wall time deliberately absent
  int exit_code = 0;    // 0 witness/pass, 1 no-witness/fail, 2 invalid config
  bool passed = false;
  std::string summary;
  double wall_ms = 0.0;
  std::optional<ordered_json> certificate_doc;
  std::optional<std::string> csv;
};

namespace detail {

struct OpResult {
  ordered_json payload;
  bool passed = false;
  std::string summary;
  std::optional<ordered_json> certificate_doc;
  std::optional<std::string> csv;
};

// Witness battery shared by `witness`, `power-check`, `unimodular-check`.
// Every witness is re-validated through the actual system: the shift view
// constructs z, then apply_iter drives T^n z and the distance to v is the
// reported exactness error.
inline OpResult run_witness_battery(const System& sys, const ordered_json& params) {
  auto view = shift_view(sys);
  if (!view)
    throw invalid_input("witness battery requires a shift-family system");
  const WeightedShiftSpec& spec = *view->spec;
  double eps_u = get_double(params, "eps_u", 1e-3);
  double eps_v = get_double(params, "eps_v", eps_u);
  double exact_tol = get_double(params, "exact_tol", 1e-10);
  if (!(eps_u > 0.0) || !(eps_v > 0.0) || !(exact_tol > 0.0))
    throw invalid_input("witness tolerances must be > 0");

  std::vector<std::pair<ShiftVector, ShiftVector>> pairs;
  if (params.contains("pairs")) {
    for (const auto& pj : params.at("pairs"))
      pairs.emplace_back(
          shift_vector_from_config(require_key(pj, "u", "pair"), spec),
          shift_vector_from_config(require_key(pj, "v", "pair"), spec));
    if (pairs.empty()) throw invalid_input("witness: empty pair list");
  } else {
    long count = get_long(params, "count", 20);
    if (count < 1) throw invalid_input("witness: count must be >= 1");
    pairs = shift_battery(spec, static_cast<std::size_t>(count));
  }

  OpResult out;
  out.payload["eps_u"] = eps_u;
  out.payload["eps_v"] = eps_v;
  out.payload["exact_tol"] = exact_tol;
  out.payload["stride"] = view->stride;
  out.payload["lambda"] = complex_to_json(view->lambda);
  out.payload["witnesses"] = ordered_json::array();
  std::size_t found = 0;
  bool all_exact = true;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [u, v] = pairs[i];
    ordered_json wj;
    wj["pair_index"] = i;
    wj["u"] = shift_vector_to_json(u);
    wj["v"] = shift_vector_to_json(v);
    auto w = transitivity_witness(spec, u, v, eps_u, eps_v, view->stride,
                                  view->lambda);
    wj["found"] = w.has_value();
    if (w) {
      ++found;
      Point z = shift_to_point(spec, w->z);
      Point img = sys.apply_iter(z, w->time);
      double err = distance(img, shift_to_point(spec, v));
      wj["time"] = w->time;
      wj["perturbation_norm"] = w->perturbation_norm;
      wj["revalidation_error"] = err;
      wj["z"] = shift_vector_to_json(w->z);
      if (!(err <= exact_tol)) all_exact = false;
    }
    out.payload["witnesses"].push_back(wj);
  }
  out.passed = found == pairs.size() && all_exact;
  out.payload["found"] = found;
  out.payload["total"] = pairs.size();
  out.payload["all_exact"] = all_exact;
  std::ostringstream s;
  s << found << "/" << pairs.size() << " witnesses found"
    << (all_exact ? "" : ", exactness violated");
  out.summary = s.str();
  return out;
}

inline std::vector<BallPair> scan_pairs_from_params(const System& sys,
                                                    const ordered_json& params,
                                                    std::optional<double>& resolution) {
  if (params.contains("pairs")) {
    std::vector<BallPair> pairs;
    for (const auto& pj : params.at("pairs"))
      pairs.emplace_back(ball_from_config(require_key(pj, "u", "pair"), sys),
                         ball_from_config(require_key(pj, "v", "pair"), sys));
    return pairs;
  }
  if (params.contains("grid")) {
    double g = params.at("grid").get<double>();
    resolution = g;
    auto battery =
        static_cast<std::size_t>(get_long(params, "battery_count", 20));
    return grid_pairs(sys, g, battery);
  }
  throw invalid_input("scan: params need 'pairs' or 'grid'");
}

inline OpResult run_scan_op(const System& sys, const ordered_json& params,
                            std::uint64_t seed, int jobs, ScanMode mode) {
  std::optional<double> resolution;
  std::vector<BallPair> pairs = scan_pairs_from_params(sys, params, resolution);
  ScanOptions opt;
  opt.horizon = require_long(params, "N", "scan");
  opt.samples_per_ball =
      static_cast<std::size_t>(get_long(params, "samples", 128));
  if (opt.samples_per_ball < 1)
    throw invalid_input("scan: samples must be >= 1");
  opt.jobs = jobs;
  opt.seed = seed;
  ScanReport report = run_scan(sys, std::move(pairs), mode, opt, resolution);
  OpResult out;
  out.payload = scan_report_to_json(report);
  out.passed = report.all_hit();
  out.csv = scan_report_to_csv(report);
  std::size_t hits = 0;
  for (const PairVerdict& v : report.verdicts)
    if (v.hit) ++hits;
  std::ostringstream s;
  s << hits << "/" << report.verdicts.size() << " pairs hit within N="
    << opt.horizon;
  out.summary = s.str();
  return out;
}

inline OpResult dispatch(const ExperimentConfig& cfg, int jobs) {
  const System& sys = cfg.system;
  const ordered_json& params = cfg.params;
  OpResult out;

  if (cfg.operation == "orbit") {
    Point x = point_from_config(require_key(params, "x", "orbit"), sys);
    long n = require_long(params, "N", "orbit");
    auto orbit = orbit_segment(sys, x, n);
    out.payload["length"] = orbit.size();
    out.payload["orbit"] = ordered_json::array();
    for (const Point& p : orbit) out.payload["orbit"].push_back(point_to_json(p));
    out.passed = true;
    out.summary = "orbit of " + std::to_string(orbit.size()) + " points";
    return out;
  }

  if (cfg.operation == "limit") {
    Point x = point_from_config(require_key(params, "x", "limit"), sys);
    Point y = params.contains("y")
                  ? point_from_config(params.at("y"), sys)
                  : x;  // recurrence check: y defaults to x
    double eps = require_double(params, "eps", "limit");
    long n = require_long(params, "N", "limit");
    long min_times = get_long(params, "min_times", 3);
    auto w = limit_witness(sys, x, y, eps, n, min_times);
    out.payload["found"] = w.has_value();
    if (w) out.payload["witness"] = witness_times_to_json(*w);
    out.passed = w.has_value();
    out.summary = w ? std::to_string(w->times.size()) + " return times found"
                    : "no witness within horizon";
    return out;
  }

  if (cfg.operation == "jset") {
    Point x = point_from_config(require_key(params, "x", "jset"), sys);
    Point y = point_from_config(require_key(params, "y", "jset"), sys);
    double eps = require_double(params, "eps", "jset");
    double delta = require_double(params, "delta", "jset");
    long n = require_long(params, "N", "jset");
    auto samples = static_cast<std::size_t>(get_long(params, "samples", 64));
    auto w = jset_witness(sys, x, y, eps, delta, n, samples,
                          SeededSampler(cfg.seed));
    out.payload["found"] = w.has_value();
    if (w) out.payload["witness"] = jwitness_to_json(*w);
    out.passed = w.has_value();
    out.summary = w ? "witness at time " + std::to_string(w->time)
                    : "no witness within horizon";
    return out;
  }

  if (cfg.operation == "recurrent") {
    Point x = point_from_config(require_key(params, "x", "recurrent"), sys);
    Ball b0 = ball_from_config(require_key(params, "ball", "recurrent"), sys);
    long depth = require_long(params, "depth", "recurrent");
    ConstructOptions copt;
    copt.budget = get_long(params, "budget", 10000);
    copt.centers_per_time =
        static_cast<std::size_t>(get_long(params, "centers_per_time", 8));
    copt.shrink = get_double(params, "shrink", 0.9);
    copt.quality = get_double(params, "quality", 0.5);
    copt.refine_rounds = get_long(params, "refine_rounds", 20);
    copt.refine_points =
        static_cast<std::size_t>(get_long(params, "refine_points", 6));
    copt.refine_shrink = get_double(params, "refine_shrink", 0.35);
    copt.with_returns = !params.contains("with_returns") ||
                        params.at("with_returns").get<bool>();
    copt.seed = cfg.seed;
    ConstructionResult res = construct_recurrent_point(sys, x, b0, depth, copt);
    out.passed = res.certificate.has_value();
    out.payload["found"] = out.passed;
    if (res.certificate) {
      ordered_json cj = certificate_to_json(*res.certificate);
      out.payload["certificate"] = cj;
      out.certificate_doc = cj;
      out.summary = "certificate of depth " + std::to_string(depth);
    } else {
      out.payload["failure"] = res.failure;
      out.payload["partial_stages"] = ordered_json::array();
      for (const Stage& s : res.partial) {
        ordered_json sj;
        sj["approach"] = stage_ball_to_json(s.approach);
        if (s.ret) sj["return"] = stage_ball_to_json(*s.ret);
        out.payload["partial_stages"].push_back(sj);
      }
      out.summary = res.failure;
    }
    return out;
  }

  if (cfg.operation == "verify-cert") {
    ordered_json cert_doc;
    if (params.contains("certificate")) {
      cert_doc = params.at("certificate");
    } else if (params.contains("certificate_path")) {
      std::ifstream in(params.at("certificate_path").get<std::string>());
      if (!in) throw invalid_input("verify-cert: cannot open certificate file");
      in >> cert_doc;
    } else {
      throw invalid_input("verify-cert: need 'certificate' or 'certificate_path'");
    }
    NestedBallCertificate cert = certificate_from_json(cert_doc);
    VerificationReport report = verify_certificate(sys, cert);
    out.payload = verification_to_json(report);
    out.passed = report.all_passed();
    std::size_t ok = 0;
    for (const CheckResult& c : report.checks)
      if (c.passed) ++ok;
    out.summary = std::to_string(ok) + "/" + std::to_string(report.checks.size()) +
                  " checks passed";
    return out;
  }

  if (cfg.operation == "salas") {
    auto view = shift_view(sys);
    if (!view) throw invalid_input("salas: shift-family system required");
    long horizon = require_long(params, "horizon", "salas");
    double threshold = require_double(params, "threshold", "salas");
    SalasVerdict v = salas_verdict(*view->spec, horizon, threshold);
    out.payload = salas_to_json(v);
    out.passed = v.satisfied;
    out.summary = std::string(v.label());
    return out;
  }

  if (cfg.operation == "witness") return run_witness_battery(sys, params);

  if (cfg.operation == "power-check") {
    long p = require_long(params, "exponent", "power-check");
    System wrapped = power_system(sys, p);
    OpResult res = run_witness_battery(wrapped, params);
    res.payload["exponent"] = p;
    return res;
  }

  if (cfg.operation == "unimodular-check") {
    const ordered_json& lj = require_key(params, "lambda", "unimodular-check");
    Complex lambda{require_double(lj, "re", "lambda"),
                   get_double(lj, "im", 0.0)};
    System wrapped = scale_unimodular(sys, lambda);
    OpResult res = run_witness_battery(wrapped, params);
    res.payload["lambda_check"] = complex_to_json(lambda);
    return res;
  }

  if (cfg.operation == "scan")
    return run_scan_op(sys, params, cfg.seed, jobs, ScanMode::transitive);
  if (cfg.operation == "almost-scan")
    return run_scan_op(sys, params, cfg.seed, jobs, ScanMode::almost_transitive);

  if (cfg.operation == "span") {
    auto view = shift_view(sys);
    if (!view) throw invalid_input("span: shift-family system required");
    std::vector<ShiftVector> seeds;
    for (const auto& sj : require_key(params, "seeds", "span"))
      seeds.push_back(shift_vector_from_config(sj, *view->spec));
    long depth = require_long(params, "N", "span");
    double drop_tol = get_double(params, "drop_tol", 1e-10);
    OrbitSpanBasis basis = orbit_span_basis(sys, seeds, depth, drop_tol);
    out.payload = span_basis_to_json(basis);
    if (!params.contains("compress") || params.at("compress").get<bool>())
      out.payload["compressed"] = compressed_to_json(compressed_operator(sys, basis));
    out.passed = true;
    out.summary = "rank " + std::to_string(basis.rank());
    return out;
  }

  if (cfg.operation == "gdelta") {
    Point z = point_from_config(require_key(params, "z", "gdelta"), sys);
    Point x = point_from_config(require_key(params, "x", "gdelta"), sys);
    long s_max = require_long(params, "S", "gdelta");
    long n_max = require_long(params, "N", "gdelta");
    long m_max = require_long(params, "M", "gdelta");
    GDeltaReport report = gdelta_check(sys, z, x, s_max, n_max, m_max);
    out.payload = gdelta_to_json(report);
    out.passed = report.holds;
    out.summary = report.holds ? "membership formula holds at horizon"
                               : "membership formula fails at horizon";
    return out;
  }

  throw invalid_input("unknown operation: " + cfg.operation);
}

}  // namespace detail

inline RunOutcome run_experiment(const ExperimentConfig& cfg, int jobs = 1) {
  auto t0 = std::chrono::steady_clock::now();
  detail::OpResult res = detail::dispatch(cfg, jobs);
  auto t1 = std::chrono::steady_clock::now();

  RunOutcome outcome;
  outcome.wall_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  outcome.passed = res.passed;
  outcome.summary = res.summary;
  outcome.exit_code = res.passed ? 0 : 1;
  outcome.certificate_doc = res.certificate_doc;
  outcome.csv = res.csv;

  ordered_json report;
  report["tool"] = std::string(kToolName);
  report["version"] = std::string(kVersion);
  report["operation"] = cfg.operation;
  report["config"] = cfg.raw;
  report["seed"] = cfg.seed;
  report["passed"] = res.passed;
  report["summary"] = res.summary;
  report["result"] = res.payload;
  outcome.report = std::move(report);
  return outcome;
}

}  // namespace topodyn
