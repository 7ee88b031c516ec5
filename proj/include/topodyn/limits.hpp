#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "topodyn/errors.hpp"
#include "topodyn/geometry.hpp"
#include "topodyn/sampler.hpp"
#include "topodyn/shifts.hpp"
#include "topodyn/systems.hpp"

namespace topodyn {

inline constexpr std::string_view kHitLabel = "hit";
inline constexpr std::string_view kNoHitLabel = "no-hit-up-to-horizon";

// ---------------------------------------------------------------------------
// Orbit segments.

inline std::vector<Point> orbit_segment(const System& sys, const Point& x,
                                        long n) {
  if (n < 0) throw invalid_input("orbit_segment: N must be >= 0");
  sys.validate_point(x);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  out.push_back(x);
  for (long i = 0; i < n; ++i) out.push_back(sys.apply_unchecked(out.back()));
  return out;
}

// ---------------------------------------------------------------------------
// Limit-set and recurrence witnesses.

struct WitnessTimes {
  std::vector<long> times;  // strictly increasing, all >= 1
  std::vector<double> achieved_distances;
};

// All times 1 <= n <= N with d(T^n x, y) < eps. Reported only when at least
// min_times such returns exist; absence always means "no witness within
// horizon", never a claim about L(x).
inline std::optional<WitnessTimes> limit_witness(const System& sys,
                                                 const Point& x, const Point& y,
                                                 double eps, long horizon,
                                                 long min_times = 3) {
  if (!(eps > 0.0)) throw invalid_input("limit_witness: eps must be > 0");
  if (horizon < 1) throw invalid_input("limit_witness: N must be >= 1");
  if (min_times < 1) throw invalid_input("limit_witness: min_times must be >= 1");
  sys.validate_point(x);
  sys.validate_point(y);
  WitnessTimes w;
  Point cur = x;
  for (long n = 1; n <= horizon; ++n) {
    cur = sys.apply_unchecked(cur);
    double d = distance(cur, y);
    if (d < eps) {
      w.times.push_back(n);
      w.achieved_distances.push_back(d);
    }
  }
  if (static_cast<long>(w.times.size()) < min_times) return std::nullopt;
  return w;
}

inline std::optional<WitnessTimes> recurrence_witness(const System& sys,
                                                      const Point& x, double eps,
                                                      long horizon,
                                                      long min_times = 3) {
  return limit_witness(sys, x, x, eps, horizon, min_times);
}

// ---------------------------------------------------------------------------
// Prolongational limit (J-set) witnesses.

struct JWitness {
  Point start_point;      // x' with d(x', x) <= delta
  long time = 0;          // k with d(T^k x', y) <= eps
  double start_distance = 0.0;
  double end_distance = 0.0;
};

// Sampled search over B(x, delta) x {1..N}; sample 0 is x itself. All
// samples advance in lockstep so the smallest witnessing k wins, ties
// broken by earliest sample index.
inline std::optional<JWitness> jset_witness(const System& sys, const Point& x,
                                            const Point& y, double eps,
                                            double delta, long horizon,
                                            std::size_t samples,
                                            SeededSampler sampler) {
  if (!(eps > 0.0) || !(delta > 0.0))
    throw invalid_input("jset_witness: eps and delta must be > 0");
  if (horizon < 1) throw invalid_input("jset_witness: N must be >= 1");
  if (samples < 1) throw invalid_input("jset_witness: samples must be >= 1");
  sys.validate_point(x);
  sys.validate_point(y);
  std::vector<Point> starts = sample_ball(sys, Ball{x, delta}, samples, sampler);
  std::vector<Point> cur = starts;
  for (long k = 1; k <= horizon; ++k) {
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] = sys.apply_unchecked(cur[i]);
      double d = distance(cur[i], y);
      if (d <= eps) {
        JWitness w;
        w.start_point = starts[i];
        w.time = k;
        w.start_distance = distance(starts[i], x);
        w.end_distance = d;
        return w;
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Transitivity scans.

enum class ScanMode { transitive, almost_transitive };

inline std::string_view to_string(ScanMode m) {
  return m == ScanMode::transitive ? "transitive" : "almost-transitive";
}

enum class HitDirection { forward, reverse };

inline std::string_view to_string(HitDirection d) {
  return d == HitDirection::forward ? "forward" : "reverse";
}

struct PairVerdict {
  std::size_t pair_index = 0;
  bool hit = false;
  long time = 0;                    // hitting time when hit
  Point witness;                    // source point u with T^time u in V
  HitDirection direction = HitDirection::forward;
  double hit_distance = 0.0;        // d(T^time u, target center) when hit
  double min_distance = std::numeric_limits<double>::infinity();

  std::string_view label() const { return hit ? kHitLabel : kNoHitLabel; }
};

struct ScanReport {
  ScanMode mode = ScanMode::transitive;
  long horizon = 0;
  std::optional<double> resolution;
  std::vector<BallPair> pairs;
  std::vector<PairVerdict> verdicts;

  bool all_hit() const {
    for (const PairVerdict& v : verdicts)
      if (!v.hit) return false;
    return !verdicts.empty();
  }
};

struct ScanOptions {
  long horizon = 100;
  std::size_t samples_per_ball = 128;
  int jobs = 1;
  std::uint64_t seed = 0;
};

namespace detail {

struct DirectionOutcome {
  bool hit = false;
  long time = 0;
  Point witness;
  double hit_distance = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();
};

// Sampling search for n with T^n(sample of U) inside V; times ascend and
// samples advance in lockstep, so the first hit has minimal n, then minimal
// sample index. min_distance covers everything explored.
inline DirectionOutcome scan_direction_sampling(const System& sys, const Ball& u,
                                                const Ball& v, long horizon,
                                                std::size_t samples,
                                                SeededSampler sampler) {
  DirectionOutcome out;
  std::vector<Point> starts = sample_ball(sys, u, samples, sampler);
  std::vector<Point> cur = starts;
  for (long n = 0; n <= horizon; ++n) {
    for (std::size_t i = 0; i < cur.size(); ++i) {
      double d = distance(cur[i], v.center);
      out.min_distance = std::min(out.min_distance, d);
      if (d < v.radius) {
        out.hit = true;
        out.time = n;
        out.witness = starts[i];
        out.hit_distance = d;
        return out;
      }
    }
    if (n < horizon)
      for (Point& p : cur) p = sys.apply_unchecked(p);
  }
  return out;
}

// Exact witness construction for shift-family systems; on a miss the center
// orbit still supplies min-distance evidence.
inline DirectionOutcome scan_direction_witness(const System& sys,
                                               const ShiftView& view,
                                               const Ball& u, const Ball& v,
                                               long horizon) {
  DirectionOutcome out;
  double d0 = distance(u.center, v.center);
  out.min_distance = d0;
  if (d0 < v.radius) {
    out.hit = true;
    out.time = 0;
    out.witness = u.center;
    out.hit_distance = d0;
    return out;
  }
  ShiftVector uv = point_to_shift(*view.spec, u.center);
  ShiftVector vv = point_to_shift(*view.spec, v.center);
  auto w = transitivity_witness(*view.spec, uv, vv, u.radius, v.radius,
                                view.stride, view.lambda, horizon);
  if (w && w->time <= horizon) {
    Point z = shift_to_point(*view.spec, w->z);
    Point img = sys.apply_iter(z, w->time);
    double d = distance(img, v.center);
    if (d < v.radius) {
      out.hit = true;
      out.time = w->time;
      out.witness = z;
      out.hit_distance = d;
      out.min_distance = std::min(out.min_distance, d);
      return out;
    }
  }
  Point cur = u.center;
  for (long n = 1; n <= horizon; ++n) {
    cur = sys.apply_unchecked(cur);
    out.min_distance = std::min(out.min_distance, distance(cur, v.center));
  }
  return out;
}

inline DirectionOutcome scan_direction(const System& sys, const Ball& u,
                                       const Ball& v, const ScanOptions& opt,
                                       SeededSampler sampler) {
  if (auto view = shift_view(sys)) {
    try {
      return scan_direction_witness(sys, *view, u, v, opt.horizon);
    } catch (const invalid_input&) {
      // oversized supports fall back to the sampling search
    }
  }
  return scan_direction_sampling(sys, u, v, opt.horizon, opt.samples_per_ball,
                                 sampler);
}

inline PairVerdict scan_pair(const System& sys, const BallPair& pair,
                             std::size_t index, ScanMode mode,
                             const ScanOptions& opt, const SeededSampler& root) {
  PairVerdict verdict;
  verdict.pair_index = index;
  DirectionOutcome fwd =
      scan_direction(sys, pair.first, pair.second, opt, root.split(2 * index));
  verdict.min_distance = fwd.min_distance;
  if (fwd.hit) {
    verdict.hit = true;
    verdict.time = fwd.time;
    verdict.witness = fwd.witness;
    verdict.direction = HitDirection::forward;
    verdict.hit_distance = fwd.hit_distance;
    return verdict;
  }
  if (mode == ScanMode::almost_transitive) {
    DirectionOutcome rev = scan_direction(sys, pair.second, pair.first, opt,
                                          root.split(2 * index + 1));
    verdict.min_distance = std::min(verdict.min_distance, rev.min_distance);
    if (rev.hit) {
      verdict.hit = true;
      verdict.time = rev.time;
      verdict.witness = rev.witness;
      verdict.direction = HitDirection::reverse;
      verdict.hit_distance = rev.hit_distance;
      return verdict;
    }
  }
  return verdict;
}

}  // namespace detail

// Pairs run in parallel with per-pair sampler streams and are stored by
// index, so the report is identical for every jobs value.
inline ScanReport run_scan(const System& sys, std::vector<BallPair> pairs,
                           ScanMode mode, const ScanOptions& opt,
                           std::optional<double> resolution = std::nullopt) {
  if (opt.horizon < 1) throw invalid_input("scan: horizon must be >= 1");
  if (pairs.empty()) throw invalid_input("scan: at least one pair required");
  for (const BallPair& p : pairs) {
    sys.validate_point(p.first.center);
    sys.validate_point(p.second.center);
    if (!(p.first.radius > 0.0) || !(p.second.radius > 0.0))
      throw invalid_input("scan: ball radii must be > 0");
  }
  ScanReport report;
  report.mode = mode;
  report.horizon = opt.horizon;
  report.resolution = resolution;
  report.pairs = std::move(pairs);
  report.verdicts.resize(report.pairs.size());

  SeededSampler root(opt.seed);
  int jobs = std::max(1, opt.jobs);
  if (jobs == 1 || report.pairs.size() <= 1) {
    for (std::size_t i = 0; i < report.pairs.size(); ++i)
      report.verdicts[i] =
          detail::scan_pair(sys, report.pairs[i], i, mode, opt, root);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= report.pairs.size()) return;
        report.verdicts[i] =
            detail::scan_pair(sys, report.pairs[i], i, mode, opt, root);
      }
    };
    std::vector<std::thread> threads;
    std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                          report.pairs.size());
    threads.reserve(n);
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  return report;
}

inline ScanReport transitivity_scan(const System& sys,
                                    std::vector<BallPair> pairs,
                                    const ScanOptions& opt,
                                    std::optional<double> resolution = std::nullopt) {
  return run_scan(sys, std::move(pairs), ScanMode::transitive, opt, resolution);
}

inline ScanReport almost_transitivity_scan(const System& sys,
                                           std::vector<BallPair> pairs,
                                           const ScanOptions& opt,
                                           std::optional<double> resolution = std::nullopt) {
  return run_scan(sys, std::move(pairs), ScanMode::almost_transitive, opt,
                  resolution);
}

// ---------------------------------------------------------------------------
// Grid construction. Circle/interval: lattice cells of spacing g, ball
// radius g/2, interval cells touching the boundary dropped. Shift systems
// have no canonical grid; a fixed battery of finitely supported centers
// stands in, with the same radius g/2.

inline std::vector<ShiftVector> shift_battery_vectors(const WeightedShiftSpec& spec,
                                                      std::size_t count) {
  std::size_t d = spec.block_dim;
  auto comp = [&](std::size_t i) { return (i % d) + 1; };
  std::vector<ShiftVector> cat;
  cat.push_back(ShiftVector::zero(spec));
  cat.push_back(ShiftVector::unit(spec, 1, comp(0)));
  cat.push_back(ShiftVector::unit(spec, 2, comp(1)));
  {
    ShiftVector v = ShiftVector::unit(spec, 1, comp(0));
    v += ShiftVector::unit(spec, 2, comp(1));
    v *= Complex{0.5, 0.0};
    cat.push_back(v);
  }
  {
    ShiftVector v = ShiftVector::unit(spec, 3, comp(2));
    ShiftVector w = ShiftVector::unit(spec, 4, comp(3));
    w *= Complex{-0.5, 0.0};
    v += w;
    cat.push_back(v);
  }
  while (cat.size() * cat.size() < count)
    cat.push_back(ShiftVector::unit(spec, cat.size() - 3, comp(cat.size())));
  return cat;
}

inline std::vector<std::pair<ShiftVector, ShiftVector>> shift_battery(
    const WeightedShiftSpec& spec, std::size_t count) {
  if (count < 1) throw invalid_input("shift_battery: count must be >= 1");
  std::vector<ShiftVector> cat = shift_battery_vectors(spec, count);
  std::vector<std::pair<ShiftVector, ShiftVector>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < cat.size() && out.size() < count; ++i)
    for (std::size_t j = 0; j < cat.size() && out.size() < count; ++j)
      out.emplace_back(cat[i], cat[j]);
  return out;
}

inline std::vector<BallPair> grid_pairs(const System& sys, double g,
                                        std::size_t shift_pair_count = 20) {
  if (!(g > 0.0) || !(g < 1.0))
    throw invalid_input("grid spacing must lie in (0,1)");
  std::vector<Ball> cells;
  switch (sys.space()) {
    case SpaceTag::circle: {
      long n = static_cast<long>(std::round(1.0 / g));
      for (long k = 0; k < n; ++k)
        cells.push_back(
            Ball{Point::circle((static_cast<double>(k) + 0.5) * g), g / 2.0});
      break;
    }
    case SpaceTag::interval: {
      long n = static_cast<long>(std::round(1.0 / g));
      for (long k = 0; k < n; ++k) {
        double c = (static_cast<double>(k) + 0.5) * g;
        if (std::min(c, 1.0 - c) < g) continue;  // cell touches the boundary
        cells.push_back(Ball{Point::interval(c), g / 2.0});
      }
      break;
    }
    case SpaceTag::l2: {
      auto view = shift_view(sys);
      if (!view)
        throw invalid_input("grid_pairs: l2 grids exist only for shift systems");
      std::vector<BallPair> out;
      for (auto& [u, v] : shift_battery(*view->spec, shift_pair_count))
        out.emplace_back(Ball{shift_to_point(*view->spec, u), g / 2.0},
                         Ball{shift_to_point(*view->spec, v), g / 2.0});
      return out;
    }
  }
  std::vector<BallPair> out;
  out.reserve(cells.size() * cells.size());
  for (const Ball& u : cells)
    for (const Ball& v : cells) out.emplace_back(u, v);
  return out;
}

// ---------------------------------------------------------------------------
// G-delta membership formula, evaluated on the forward orbit of z:
// for every s <= S and n <= N there must be m with n < m <= M and
// d(T^m z, x) < 1/s.

struct GDeltaEntry {
  long s = 0;
  long n = 0;
  long m = 0;           // witnessing time, 0 when none found
  double distance = 0.0;
  bool found = false;
};

struct GDeltaReport {
  bool holds = false;
  long s_max = 0;
  long n_max = 0;
  long m_max = 0;
  std::vector<GDeltaEntry> evidence;  // one entry per (s, n)
};

inline GDeltaReport gdelta_check(const System& sys, const Point& z,
                                 const Point& x, long s_max, long n_max,
                                 long m_max) {
  if (s_max < 1 || n_max < 1)
    throw invalid_input("gdelta_check: S and N must be >= 1");
  if (m_max <= n_max) throw invalid_input("gdelta_check: M must exceed N");
  sys.validate_point(z);
  sys.validate_point(x);
  std::vector<double> dist(static_cast<std::size_t>(m_max) + 1, 0.0);
  Point cur = z;
  for (long m = 1; m <= m_max; ++m) {
    cur = sys.apply_unchecked(cur);
    dist[static_cast<std::size_t>(m)] = distance(cur, x);
  }
  GDeltaReport report;
  report.s_max = s_max;
  report.n_max = n_max;
  report.m_max = m_max;
  report.holds = true;
  for (long s = 1; s <= s_max; ++s) {
    double eps = 1.0 / static_cast<double>(s);
    for (long n = 1; n <= n_max; ++n) {
      GDeltaEntry e;
      e.s = s;
      e.n = n;
      double best = std::numeric_limits<double>::infinity();
      for (long m = n + 1; m <= m_max; ++m) {
        double d = dist[static_cast<std::size_t>(m)];
        best = std::min(best, d);
        if (d < eps) {
          e.m = m;
          e.distance = d;
          e.found = true;
          break;
        }
      }
      if (!e.found) {
        e.distance = best;
        report.holds = false;
      }
      report.evidence.push_back(e);
    }
  }
  return report;
}

}  // namespace topodyn
