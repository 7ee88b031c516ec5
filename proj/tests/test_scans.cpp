#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "topodyn/limits.hpp"
#include "topodyn/serialize.hpp"
#include "topodyn/systems.hpp"

using namespace topodyn;

namespace {

ScanOptions options(long horizon, std::uint64_t seed = 0,
                    std::size_t samples = 128, int jobs = 1) {
  ScanOptions opt;
  opt.horizon = horizon;
  opt.samples_per_ball = samples;
  opt.jobs = jobs;
  opt.seed = seed;
  return opt;
}

}  // namespace

TEST_CASE("grid_pairs: circle lattice is complete, interval trims edges") {
  std::vector<BallPair> circle = grid_pairs(make_doubling(), 1.0 / 16.0);
  CHECK(circle.size() == 256);  // 16 cells, all ordered pairs
  for (const BallPair& p : circle) {
    CHECK(p.first.radius == 1.0 / 32.0);
    CHECK(p.second.radius == 1.0 / 32.0);
  }
  // cells cover the circle: centers at (k + 1/2)/16
  CHECK(circle[0].first.center.scalar() == Catch::Approx(1.0 / 32.0));

  std::vector<BallPair> interval = grid_pairs(make_tent(), 1.0 / 16.0);
  CHECK(interval.size() == 196);  // 14 interior cells squared
  for (const BallPair& p : interval) {
    CHECK(p.first.center.scalar() > 1.0 / 16.0);
    CHECK(p.first.center.scalar() < 15.0 / 16.0);
  }

  CHECK_THROWS_AS(grid_pairs(make_doubling(), 0.0), invalid_input);
  CHECK_THROWS_AS(grid_pairs(make_doubling(), 1.0), invalid_input);
}

TEST_CASE("grid_pairs: shift systems use the finite battery") {
  WeightedShiftSpec spec;
  spec.weights = ConstantWeights{2.0};
  spec.truncation = 8;
  System sys = make_shift(spec);
  std::vector<BallPair> pairs = grid_pairs(sys, 0.25, 20);
  CHECK(pairs.size() == 20);
  for (const BallPair& p : pairs) {
    CHECK(p.first.radius == 0.125);
    CHECK(p.first.center.space == SpaceTag::l2);
  }
  // the first battery vector is 0, the second is e_1
  CHECK(pairs[0].first.center.coords ==
        std::vector<double>(spec.dimension(), 0.0));

  // l2 without shift structure has no canonical grid
  CHECK_THROWS_AS(grid_pairs(make_contraction(0.5, Point::l2({0.0})), 0.25),
                  invalid_input);
}

TEST_CASE("doubling grid scan: every pair hits, times match exact arithmetic") {
  System sys = make_doubling();
  double g = 1.0 / 16.0;
  std::vector<BallPair> pairs = grid_pairs(sys, g);
  ScanReport r = transitivity_scan(sys, pairs, options(12, 0), g);
  CHECK(r.all_hit());
  CHECK(r.mode == ScanMode::transitive);
  CHECK(r.horizon == 12);
  REQUIRE(r.resolution.has_value());
  CHECK(*r.resolution == g);
  REQUIRE(r.verdicts.size() == 256);

  long max_scan_time = 0;
  long max_oracle_time = 0;
  for (std::size_t i = 0; i < r.verdicts.size(); ++i) {
    const PairVerdict& v = r.verdicts[i];
    CHECK(v.pair_index == i);
    CHECK(v.hit);
    CHECK(v.label() == kHitLabel);
    CHECK(v.direction == HitDirection::forward);

    // soundness: replay the witness through the map
    Point img = sys.apply_iter(v.witness, v.time);
    CHECK(distance(img, r.pairs[i].second.center) < r.pairs[i].second.radius);
    CHECK(distance(img, r.pairs[i].second.center) == v.hit_distance);
    CHECK(distance(v.witness, r.pairs[i].first.center) <
          r.pairs[i].first.radius + 1e-12);

    // minimality against the exact dyadic arc oracle: an open-ball hit can
    // never precede the true minimal time
    oracles::DyadicArc u{static_cast<std::int64_t>(i / 16), 1, 16};
    oracles::DyadicArc w{static_cast<std::int64_t>(i % 16), 1, 16};
    auto exact = oracles::doubling_hit_time(u, w, 12);
    REQUIRE(exact.has_value());
    CHECK(v.time >= *exact);
    max_scan_time = std::max(max_scan_time, v.time);
    max_oracle_time = std::max(max_oracle_time, *exact);
  }
  // expansiveness: after 4 doublings every cell covers the circle
  CHECK(max_oracle_time == 4);
  CHECK(max_scan_time <= 12);
}

TEST_CASE("scan of U against itself hits at time zero") {
  for (const System& sys :
       {make_doubling(), make_tent(), make_interchange(),
        make_contraction(0.5, Point::interval(0.0))}) {
    Ball u{Point{{0.3}, sys.space()}, 0.05};
    ScanReport r = transitivity_scan(sys, {{u, u}}, options(10));
    REQUIRE(r.verdicts.size() == 1);
    CHECK(r.verdicts[0].hit);
    CHECK(r.verdicts[0].time == 0);
    CHECK(r.verdicts[0].hit_distance == 0.0);
  }
}

TEST_CASE("contraction scan: distant balls never meet") {
  System sys = make_contraction(0.5, Point::interval(0.0));
  Ball u{Point::interval(0.2), 0.05};
  Ball v{Point::interval(0.9), 0.05};
  ScanReport r = transitivity_scan(sys, {{u, v}}, options(500));
  CHECK_FALSE(r.all_hit());
  const PairVerdict& verdict = r.verdicts[0];
  CHECK_FALSE(verdict.hit);
  CHECK(verdict.label() == kNoHitLabel);
  // the orbit of B(0.2, 0.05) only moves away from 0.9
  CHECK(verdict.min_distance >= 0.65);
  CHECK(verdict.min_distance <= 0.7);
}

TEST_CASE("almost-transitive scan reports the reverse direction") {
  System sys = make_contraction(0.5, Point::interval(0.0));
  // forward from B(0.25) never climbs to 0.5, but 0.5 falls to 0.25 in one step
  Ball u{Point::interval(0.25), 0.01};
  Ball v{Point::interval(0.5), 0.01};
  ScanReport fwd = transitivity_scan(sys, {{u, v}}, options(100));
  CHECK_FALSE(fwd.all_hit());

  ScanReport almost = almost_transitivity_scan(sys, {{u, v}}, options(100));
  CHECK(almost.all_hit());
  CHECK(almost.mode == ScanMode::almost_transitive);
  const PairVerdict& verdict = almost.verdicts[0];
  CHECK(verdict.direction == HitDirection::reverse);
  CHECK(verdict.time == 1);
  CHECK(verdict.hit_distance == 0.0);  // T(0.5) = 0.25 exactly
  CHECK(to_string(verdict.direction) == "reverse");
}

TEST_CASE("forward transitivity implies the almost verdict on the same pairs") {
  System sys = make_doubling();
  std::vector<BallPair> pairs = grid_pairs(sys, 0.25);
  ScanReport strict = transitivity_scan(sys, pairs, options(16, 3));
  ScanReport almost = almost_transitivity_scan(sys, pairs, options(16, 3));
  REQUIRE(strict.all_hit());
  REQUIRE(almost.all_hit());
  // forward hits are found first, so the almost scan repeats them verbatim
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(almost.verdicts[i].direction == HitDirection::forward);
    CHECK(almost.verdicts[i].time == strict.verdicts[i].time);
    CHECK(almost.verdicts[i].witness == strict.verdicts[i].witness);
  }
}

TEST_CASE("interchange square traps each half") {
  // T swaps the halves of the circle, so T^2 preserves them and the square
  // system cannot move mass from one half to the other
  System square = power_system(make_interchange(), 2);
  Ball u{Point::circle(0.25), 1.0 / 16.0};
  Ball v{Point::circle(0.75), 1.0 / 16.0};
  ScanReport r = almost_transitivity_scan(square, {{u, v}}, options(32, 1));
  CHECK_FALSE(r.all_hit());
  // everything explored stayed in its own half: gap at least 1/4 - 1/16
  CHECK(r.verdicts[0].min_distance >= 0.25 - 1.0 / 16.0);

  // while the interchange itself crosses in one step
  ScanReport cross =
      transitivity_scan(make_interchange(), {{u, v}}, options(32, 1));
  CHECK(cross.all_hit());
  CHECK(cross.verdicts[0].time == 1);
}

TEST_CASE("rotation scan agrees with the brute-force oracle") {
  double alpha = 0.371;
  System sys = make_rotation(alpha);
  Ball u{Point::circle(0.1), 0.04};
  Ball v{Point::circle(0.6), 0.04};
  ScanReport r = transitivity_scan(sys, {{u, v}}, options(64, 9));
  auto oracle = oracles::brute_force_hit(
      [&](double x) { return wrap_unit(x + alpha); }, 0.1, 0.04, 0.6, 0.04, 64,
      512, true);
  REQUIRE(oracle.has_value());
  REQUIRE(r.verdicts[0].hit);
  // rigid rotations move every point in lockstep: times agree exactly
  CHECK(r.verdicts[0].time == *oracle);
}

TEST_CASE("shift scans construct exact witnesses") {
  WeightedShiftSpec spec;
  spec.weights = ConstantWeights{2.0};
  spec.truncation = 10;
  System sys = make_shift(spec);
  Point e1 = shift_to_point(spec, ShiftVector::unit(spec, 1));
  Point e2 = shift_to_point(spec, ShiftVector::unit(spec, 2));
  ScanReport r = transitivity_scan(sys, {{Ball{e1, 0.1}, Ball{e2, 0.1}}},
                                   options(100));
  REQUIRE(r.verdicts[0].hit);
  CHECK(r.verdicts[0].time == 4);
  CHECK(r.verdicts[0].hit_distance == 0.0);  // the witness lands exactly
  Point img = sys.apply_iter(r.verdicts[0].witness, 4);
  CHECK(distance(img, e2) == 0.0);
  CHECK(distance(r.verdicts[0].witness, e1) < 0.1);
}

TEST_CASE("shift scans fall back to sampling when supports overflow") {
  WeightedShiftSpec spec;
  spec.weights = ConstantWeights{2.0};
  spec.truncation = 10;
  System sys = make_shift(spec);
  // support 6 > M/2 disables the witness path; the sampled center orbit
  // still lands exactly: T^5 (e_6 / 32) = e_1
  ShiftVector deep = ShiftVector::unit(spec, 6);
  deep *= Complex{1.0 / 32.0, 0.0};
  Point u = shift_to_point(spec, deep);
  Point e1 = shift_to_point(spec, ShiftVector::unit(spec, 1));
  ScanReport r = transitivity_scan(sys, {{Ball{u, 0.1}, Ball{e1, 0.1}}},
                                   options(20, 0, 16));
  REQUIRE(r.verdicts[0].hit);
  CHECK(r.verdicts[0].time == 5);
  CHECK(r.verdicts[0].hit_distance == 0.0);
  CHECK(r.verdicts[0].witness == u);
}

TEST_CASE("scan reports are reproducible and jobs-independent") {
  System sys = make_interchange();
  std::vector<BallPair> pairs = grid_pairs(sys, 0.125);
  REQUIRE(pairs.size() == 64);

  ScanReport a = almost_transitivity_scan(sys, pairs, options(64, 7, 64, 1));
  ScanReport b = almost_transitivity_scan(sys, pairs, options(64, 7, 64, 1));
  ScanReport parallel =
      almost_transitivity_scan(sys, pairs, options(64, 7, 64, 4));

  std::string sa = dump_deterministic(scan_report_to_json(a));
  std::string sb = dump_deterministic(scan_report_to_json(b));
  std::string sp = dump_deterministic(scan_report_to_json(parallel));
  CHECK(sa == sb);
  CHECK(sa == sp);

  // a different seed changes sampled witnesses but not the verdict pattern
  ScanReport c = almost_transitivity_scan(sys, pairs, options(64, 8, 64, 1));
  CHECK(c.all_hit() == a.all_hit());
}

TEST_CASE("scan input validation") {
  System sys = make_doubling();
  Ball u{Point::circle(0.1), 0.05};
  CHECK_THROWS_AS(transitivity_scan(sys, {}, options(10)), invalid_input);
  CHECK_THROWS_AS(transitivity_scan(sys, {{u, u}}, options(0)), invalid_input);
  Ball degenerate{Point::circle(0.1), 0.0};
  CHECK_THROWS_AS(transitivity_scan(sys, {{u, degenerate}}, options(10)),
                  invalid_input);
  CHECK_THROWS_AS(
      transitivity_scan(sys, {{u, Ball{Point::interval(0.1), 0.05}}},
                        options(10)),
      invalid_input);
}

TEST_CASE("scan vocabulary is frozen") {
  CHECK(kHitLabel == "hit");
  CHECK(kNoHitLabel == "no-hit-up-to-horizon");
  CHECK(to_string(ScanMode::transitive) == "transitive");
  CHECK(to_string(ScanMode::almost_transitive) == "almost-transitive");
  CHECK(to_string(HitDirection::forward) == "forward");
  CHECK(to_string(HitDirection::reverse) == "reverse");
}
