#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "topodyn/errors.hpp"
#include "topodyn/geometry.hpp"
#include "topodyn/sampler.hpp"
#include "topodyn/systems.hpp"

namespace topodyn {

struct StageBall {
  Ball ball;
  long time = 0;
  double margin = 0.0;  // enclosure clearance inside the stage target ball
};

struct Stage {
  StageBall approach;             // B(y_n, eps_n), time k_n
  std::optional<StageBall> ret;   // B(w_n, r_n), time m_n; absent in part-(i) runs
};

struct NestedBallCertificate {
  Point target;       // x
  Ball initial_ball;  // B(y, eps)
  std::vector<Stage> stages;
  Point limit_point;  // deepest ball center, distance to true z < 2^-depth
  long depth = 0;

  bool with_returns() const {
    for (const Stage& s : stages)
      if (!s.ret) return false;
    return !stages.empty();
  }
};

struct StageSearchOptions {
  long budget = 10000;              // candidate evaluations, coarse and refined
  std::size_t centers_per_time = 8;
  long min_time = 0;                // times searched are strictly greater
  double max_radius = std::numeric_limits<double>::infinity();
  double shrink = 0.9;              // keeps margins strictly positive
  double quality = 0.5;             // radius floor as a share of the per-time cap
  long refine_rounds = 20;          // refinement ladder schedule per time
  std::size_t refine_points = 6;
  double refine_shrink = 0.35;
};

namespace detail {

// Deterministic candidate centers in B: index 0 is the center itself, the
// rest follow a seed-rotated van der Corput offset (1-d) or a sampled
// direction (higher dimensions). Positions depend only on (seed, index),
// which makes the search prefix-stable in the budget.
inline Point stage_candidate(const Ball& ball, std::size_t index,
                             const SeededSampler& root) {
  if (index == 0) return ball.center;
  Point p = ball.center;
  std::size_t dim = p.coords.size();
  if (dim == 1) {
    SeededSampler s = root.split(0);
    double rot = s.next_unit();
    double u = van_der_corput(index) + rot;
    u -= std::floor(u);
    double offset = (2.0 * u - 1.0) * ball.radius * 0.95;
    p.coords[0] += offset;
    if (p.space == SpaceTag::circle) p.coords[0] = wrap_unit(p.coords[0]);
  } else {
    SeededSampler s = root.split(index);
    double norm2 = 0.0;
    std::vector<double> dir(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      dir[i] = s.next_gaussian();
      norm2 += dir[i] * dir[i];
    }
    if (norm2 > 0.0) {
      double u = van_der_corput(index);
      double scale = ball.radius * 0.95 *
                     std::pow(u, 1.0 / static_cast<double>(dim)) /
                     std::sqrt(norm2);
      for (std::size_t i = 0; i < dim; ++i) p.coords[i] += scale * dir[i];
    }
  }
  if (p.space == SpaceTag::interval)
    p.coords[0] = std::min(1.0, std::max(0.0, p.coords[0]));
  return p;
}

// Pulls p radially toward the ball center until its distance is at most
// `limit`, keeping refinement candidates strictly interior to the source.
inline Point clamp_into_ball(const Ball& ball, double limit, Point p) {
  if (p.space == SpaceTag::circle) {
    double t = p.coords[0] - ball.center.coords[0];
    t -= std::round(t);  // signed circle difference in [-1/2, 1/2]
    if (std::abs(t) > limit) t = std::copysign(limit, t);
    p.coords[0] = wrap_unit(ball.center.coords[0] + t);
    return p;
  }
  if (p.space == SpaceTag::interval) {
    double t = p.coords[0] - ball.center.coords[0];
    if (std::abs(t) > limit) t = std::copysign(limit, t);
    p.coords[0] =
        std::min(1.0, std::max(0.0, ball.center.coords[0] + t));
    return p;
  }
  double norm2 = 0.0;
  for (std::size_t i = 0; i < p.coords.size(); ++i) {
    double t = p.coords[i] - ball.center.coords[i];
    norm2 += t * t;
  }
  double norm = std::sqrt(norm2);
  if (norm > limit && norm > 0.0) {
    double scale = limit / norm;
    for (std::size_t i = 0; i < p.coords.size(); ++i)
      p.coords[i] = ball.center.coords[i] +
                    scale * (p.coords[i] - ball.center.coords[i]);
  }
  return p;
}

// Refinement candidate j around `anchor`: a symmetric ladder of offsets of
// the given width in one dimension (deterministic), a sampled direction in
// higher dimensions. Candidates are clamped into the interior of `source`.
inline Point refine_candidate(const Ball& source, const Point& anchor,
                              double width, std::size_t j, std::size_t points,
                              SeededSampler& rng) {
  Point p = anchor;
  std::size_t dim = p.coords.size();
  if (dim == 1) {
    double frac =
        (static_cast<double>(j) + 0.5) / static_cast<double>(points);
    p.coords[0] += width * (2.0 * frac - 1.0);
  } else {
    double norm2 = 0.0;
    std::vector<double> dir(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      dir[i] = rng.next_gaussian();
      norm2 += dir[i] * dir[i];
    }
    if (norm2 > 0.0) {
      double scale = width *
                     std::pow(rng.next_unit(), 1.0 / static_cast<double>(dim)) /
                     std::sqrt(norm2);
      for (std::size_t i = 0; i < dim; ++i) p.coords[i] += scale * dir[i];
    }
  }
  return clamp_into_ball(source, 0.95 * source.radius, std::move(p));
}

}  // namespace detail

// Shared stage search: a ball B' inside `source` and a time k > min_time
// with T^k B' enclosed in B(target, rho). Times ascend from the bound and
// coarse candidate orbits advance in lockstep. The ball around a candidate
// w takes the radius
//   shrink * min(slack(w), (rho - d(T^k w, target)) / L^k, max_radius),
// so margins stay strictly positive. A time is accepted only when that
// radius reaches `quality` times the cap available at the time,
// min(source radius, rho / L^k, max_radius); graze hits whose tiny radius
// would starve the following stage are skipped. When the coarse pass falls
// short but the Lipschitz cone of the source still reaches the target, a
// deterministic ladder around the best candidate refines the maximizer of
// the radius objective before the time is given up. Every candidate
// evaluation costs one unit of budget; the first accepted time wins, so
// the result is minimal in time and budget-prefix-stable.
inline std::optional<StageBall> find_stage(const System& sys, const Ball& source,
                                           const Point& target, double rho,
                                           const StageSearchOptions& opt,
                                           const SeededSampler& sampler) {
  if (!(rho > 0.0)) throw invalid_input("find_stage: rho must be > 0");
  if (!(source.radius > 0.0))
    throw invalid_input("find_stage: source radius must be > 0");
  if (opt.budget < 1) throw invalid_input("find_stage: budget must be >= 1");
  if (opt.centers_per_time < 1)
    throw invalid_input("find_stage: centers_per_time must be >= 1");
  if (!(opt.shrink > 0.0) || !(opt.shrink < 1.0))
    throw invalid_input("find_stage: shrink must lie in (0,1)");
  if (!(opt.quality >= 0.0) || !(opt.quality < 1.0))
    throw invalid_input("find_stage: quality must lie in [0,1)");
  if (opt.refine_rounds < 0)
    throw invalid_input("find_stage: refine_rounds must be >= 0");
  if (opt.refine_rounds > 0 && opt.refine_points < 1)
    throw invalid_input("find_stage: refine_points must be >= 1");
  if (!(opt.refine_shrink > 0.0) || !(opt.refine_shrink < 1.0))
    throw invalid_input("find_stage: refine_shrink must lie in (0,1)");
  sys.validate_point(source.center);
  sys.validate_point(target);

  std::size_t n_centers = opt.centers_per_time;
  std::vector<Point> centers(n_centers);
  std::vector<double> slack(n_centers);
  for (std::size_t i = 0; i < n_centers; ++i) {
    centers[i] = detail::stage_candidate(source, i, sampler);
    slack[i] = source.radius - distance(centers[i], source.center);
  }
  std::vector<Point> orbit = centers;
  SeededSampler refine_rng = sampler.split(n_centers + 1);

  double lip = sys.lipschitz();
  long probes = 0;

  // Radius objective of candidate w at time k; positive values are radii
  // before the shrink factor.
  auto score_of = [&](double slack_w, double d, double lip_k) {
    return std::min(slack_w, (rho - d) / lip_k);
  };
  auto accept = [&](const Point& w, double score, double d, double lip_k,
                    long k) -> std::optional<StageBall> {
    double radius = opt.shrink * std::min(score, opt.max_radius);
    if (!(radius > 0.0)) return std::nullopt;
    double margin = rho - d - radius * lip_k;
    if (!(margin > 0.0)) return std::nullopt;
    return StageBall{Ball{w, radius}, k, margin};
  };

  for (long k = 1;; ++k) {
    for (Point& p : orbit) p = sys.apply_unchecked(p);
    if (k <= opt.min_time) continue;
    double lip_k = std::pow(lip, static_cast<double>(k));
    if (!std::isfinite(lip_k)) return std::nullopt;  // radius would vanish
    double cap = std::min({source.radius, rho / lip_k, opt.max_radius});
    double floor = opt.quality * cap;

    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < n_centers; ++i) {
      if (++probes > opt.budget) return std::nullopt;
      if (!(slack[i] > 0.0)) continue;
      double d = distance(orbit[i], target);
      double score = score_of(slack[i], d, lip_k);
      if (score > 0.0 && score >= floor)
        if (auto hit = accept(centers[i], score, d, lip_k, k)) return hit;
      if (score > best_score) {
        best_score = score;
        best_i = i;
      }
    }

    // Refinement pays only while the image of the source can still reach
    // B(target, rho): best score >= -0.95 * source radius.
    if (best_score < -0.95 * source.radius) continue;
    Point anchor = centers[best_i];
    double width = source.radius;
    for (long round = 0; round < opt.refine_rounds; ++round) {
      Point round_best = anchor;
      double round_score = best_score;
      for (std::size_t j = 0; j < opt.refine_points; ++j) {
        if (++probes > opt.budget) return std::nullopt;
        Point w = detail::refine_candidate(source, anchor, width, j,
                                           opt.refine_points, refine_rng);
        double slack_w = source.radius - distance(w, source.center);
        if (!(slack_w > 0.0)) continue;
        Point image = w;
        for (long t = 0; t < k; ++t) image = sys.apply_unchecked(image);
        double d = distance(image, target);
        double score = score_of(slack_w, d, lip_k);
        if (score > 0.0 && score >= floor)
          if (auto hit = accept(w, score, d, lip_k, k)) return hit;
        if (score > round_score) {
          round_score = score;
          round_best = w;
        }
      }
      anchor = round_best;
      best_score = round_score;
      width *= opt.refine_shrink;
    }
  }
}

// T^k B' inside B(x, rho), k strictly above the supplied bound.
inline std::optional<StageBall> find_approach_stage(const System& sys,
                                                    const Ball& source,
                                                    const Point& x, double rho,
                                                    const StageSearchOptions& opt,
                                                    const SeededSampler& sampler) {
  return find_stage(sys, source, x, rho, opt, sampler);
}

// T^m B'' back inside the source ball itself.
inline std::optional<StageBall> find_return_stage(const System& sys,
                                                  const Ball& source,
                                                  const StageSearchOptions& opt,
                                                  const SeededSampler& sampler) {
  return find_stage(sys, source, source.center, source.radius, opt, sampler);
}

// ---------------------------------------------------------------------------
// Full construction: alternating approach stages (T^{k_n}-image in B(x,1/n))
// and return stages (T^{m_n}-image back in the approach ball), radii capped
// by 2^-n, all times forming one strictly increasing chain. On stage failure
// the partial prefix is returned for diagnostics.

struct ConstructionResult {
  std::optional<NestedBallCertificate> certificate;
  std::vector<Stage> partial;
  std::string failure;  // empty on success
};

struct ConstructOptions {
  long budget = 10000;  // per stage search, in candidate evaluations
  std::size_t centers_per_time = 8;
  double shrink = 0.9;
  double quality = 0.5;
  long refine_rounds = 20;
  std::size_t refine_points = 6;
  double refine_shrink = 0.35;
  bool with_returns = true;
  std::uint64_t seed = 0;
};

inline ConstructionResult construct_recurrent_point(const System& sys,
                                                    const Point& x,
                                                    const Ball& initial,
                                                    long depth,
                                                    const ConstructOptions& opt) {
  if (depth < 1) throw invalid_input("construct: depth must be >= 1");
  if (!(initial.radius > 0.0))
    throw invalid_input("construct: initial radius must be > 0");
  sys.validate_point(x);
  sys.validate_point(initial.center);

  ConstructionResult result;
  SeededSampler root(opt.seed);
  Ball current = initial;
  long last_time = 0;
  for (long n = 1; n <= depth; ++n) {
    StageSearchOptions sopt;
    sopt.budget = opt.budget;
    sopt.centers_per_time = opt.centers_per_time;
    sopt.shrink = opt.shrink;
    sopt.quality = opt.quality;
    sopt.refine_rounds = opt.refine_rounds;
    sopt.refine_points = opt.refine_points;
    sopt.refine_shrink = opt.refine_shrink;
    sopt.min_time = last_time;
    sopt.max_radius = std::pow(2.0, -static_cast<double>(n));
    auto approach =
        find_approach_stage(sys, current, x, 1.0 / static_cast<double>(n), sopt,
                            root.split(2 * static_cast<std::uint64_t>(n)));
    if (!approach) {
      result.failure = "approach stage " + std::to_string(n) +
                       ": no ball found within budget";
      return result;
    }
    last_time = approach->time;
    Stage stage;
    stage.approach = *approach;
    if (opt.with_returns) {
      sopt.min_time = last_time;
      sopt.max_radius = approach->ball.radius;
      auto ret =
          find_return_stage(sys, approach->ball, sopt,
                            root.split(2 * static_cast<std::uint64_t>(n) + 1));
      if (!ret) {
        result.partial.push_back(stage);
        result.failure = "return stage " + std::to_string(n) +
                         ": no ball found within budget";
        return result;
      }
      last_time = ret->time;
      stage.ret = *ret;
      current = ret->ball;
    } else {
      current = approach->ball;
    }
    result.partial.push_back(stage);
  }

  NestedBallCertificate cert;
  cert.target = x;
  cert.initial_ball = initial;
  cert.stages = result.partial;
  cert.limit_point = current.center;
  cert.depth = depth;
  result.certificate = std::move(cert);
  return result;
}

// ---------------------------------------------------------------------------
// Independent verification. Uses only the system and the certificate data.

struct CheckResult {
  std::string name;
  bool passed = false;
  double margin = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const CheckResult& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
};

namespace detail {

inline void check_enclosure(const System& sys, VerificationReport& report,
                            const std::string& name, const Ball& ball,
                            long time, const Ball& into) {
  CheckResult c;
  c.name = name;
  try {
    Ball image = enclose_image(sys, ball, time);
    c.margin = containment_margin(into, image);
    c.passed = c.margin > 0.0;
    if (!c.passed) c.detail = "enclosure not strictly inside target ball";
  } catch (const enclosure_blowup& e) {
    c.passed = false;
    c.detail = e.what();
  }
  report.checks.push_back(c);
}

}  // namespace detail

inline VerificationReport verify_certificate(const System& sys,
                                             const NestedBallCertificate& cert) {
  VerificationReport report;

  {
    CheckResult c;
    c.name = "shape";
    c.passed = !cert.stages.empty() &&
               cert.depth == static_cast<long>(cert.stages.size());
    if (!c.passed) c.detail = "depth does not match stage count";
    report.checks.push_back(c);
    if (!c.passed) return report;
  }

  bool with_returns = cert.with_returns();
  for (std::size_t i = 0; i < cert.stages.size(); ++i) {
    long n = static_cast<long>(i) + 1;
    const Stage& stage = cert.stages[i];
    std::string tag = std::to_string(n);
    double cap = std::pow(2.0, -static_cast<double>(n));

    {
      CheckResult c;
      c.name = "radius-bound-" + tag;
      double eps_n = stage.approach.ball.radius;
      c.margin = cap - eps_n;
      c.passed = eps_n > 0.0 && eps_n < cap;
      if (stage.ret) {
        double r_n = stage.ret->ball.radius;
        c.passed = c.passed && r_n > 0.0 && r_n <= eps_n;
        if (!(r_n <= eps_n)) c.detail = "return radius exceeds approach radius";
      }
      if (!(eps_n < cap)) c.detail = "approach radius not below 2^-n";
      report.checks.push_back(c);
    }

    {
      CheckResult c;
      c.name = "nesting-" + tag;
      const Ball& outer =
          i == 0 ? cert.initial_ball
                 : (cert.stages[i - 1].ret ? cert.stages[i - 1].ret->ball
                                           : cert.stages[i - 1].approach.ball);
      c.margin = containment_margin(outer, stage.approach.ball);
      c.passed = c.margin >= -kContainmentSlack;
      if (!c.passed) c.detail = "approach ball escapes the previous ball";
      if (stage.ret) {
        double m2 = containment_margin(stage.approach.ball, stage.ret->ball);
        if (!(m2 > 0.0)) {
          c.passed = false;
          c.detail = "return ball lacks positive clearance in approach ball";
        }
        c.margin = std::min(c.margin, m2);
      }
      report.checks.push_back(c);
    }

    detail::check_enclosure(
        sys, report, "approach-enclosure-" + tag, stage.approach.ball,
        stage.approach.time,
        Ball{cert.target, 1.0 / static_cast<double>(n)});
    if (stage.ret)
      detail::check_enclosure(sys, report, "return-enclosure-" + tag,
                              stage.ret->ball, stage.ret->time,
                              stage.approach.ball);
  }

  {
    CheckResult c;
    c.name = "times-increasing";
    c.passed = true;
    long prev_k = 0;
    long prev_m = 0;
    for (const Stage& s : cert.stages) {
      if (s.approach.time <= prev_k) c.passed = false;
      prev_k = s.approach.time;
      if (s.ret) {
        if (s.ret->time <= prev_m || s.ret->time <= s.approach.time)
          c.passed = false;
        prev_m = s.ret->time;
      }
    }
    if (!c.passed) c.detail = "stage times fail to increase strictly";
    report.checks.push_back(c);
  }

  {
    CheckResult c;
    c.name = "limit-in-balls";
    c.passed = true;
    c.margin = std::numeric_limits<double>::infinity();
    for (const Stage& s : cert.stages) {
      double m1 = s.approach.ball.radius -
                  distance(cert.limit_point, s.approach.ball.center);
      c.margin = std::min(c.margin, m1);
      if (m1 < -kContainmentSlack) c.passed = false;
      if (s.ret) {
        double m2 =
            s.ret->ball.radius - distance(cert.limit_point, s.ret->ball.center);
        c.margin = std::min(c.margin, m2);
        if (m2 < -kContainmentSlack) c.passed = false;
      }
    }
    if (!c.passed) c.detail = "limit point escapes a stage ball";
    report.checks.push_back(c);
  }

  for (std::size_t i = 0; i < cert.stages.size(); ++i) {
    long n = static_cast<long>(i) + 1;
    const Stage& stage = cert.stages[i];
    {
      CheckResult c;
      c.name = "empirical-approach-" + std::to_string(n);
      Point img = sys.apply_iter(cert.limit_point, stage.approach.time);
      double d = distance(img, cert.target);
      double bound = 1.0 / static_cast<double>(n) + kOrbitSlack;
      c.margin = bound - d;
      c.passed = d <= bound;
      if (!c.passed) c.detail = "d(T^{k_n} z, x) exceeds 1/n + slack";
      report.checks.push_back(c);
    }
    if (with_returns && stage.ret) {
      CheckResult c;
      c.name = "empirical-return-" + std::to_string(n);
      Point img = sys.apply_iter(cert.limit_point, stage.ret->time);
      double d = distance(img, cert.limit_point);
      double bound = std::pow(2.0, -static_cast<double>(n) + 1.0) + kOrbitSlack;
      c.margin = bound - d;
      c.passed = d <= bound;
      if (!c.passed) c.detail = "d(T^{m_n} z, z) exceeds 2^{-n+1} + slack";
      report.checks.push_back(c);
    }
  }

  return report;
}

}  // namespace topodyn
