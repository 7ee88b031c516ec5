#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "topodyn/shifts.hpp"
#include "topodyn/systems.hpp"

using namespace topodyn;

namespace {

WeightedShiftSpec constant_spec(double w, std::size_t truncation,
                                std::size_t block_dim = 1) {
  WeightedShiftSpec spec;
  spec.weights = ConstantWeights{w};
  spec.block_dim = block_dim;
  spec.truncation = truncation;
  return spec;
}

WeightedShiftSpec ratio_spec(std::size_t truncation, std::size_t block_dim = 1) {
  WeightedShiftSpec spec;
  spec.weights = RatioWeights{};
  spec.block_dim = block_dim;
  spec.truncation = truncation;
  return spec;
}

}  // namespace

TEST_CASE("weight rules: constant, ratio, custom") {
  CHECK(constant_spec(2.0, 4).weight(1) == 2.0);
  CHECK(constant_spec(2.0, 4).weight(17) == 2.0);

  WeightedShiftSpec ratio = ratio_spec(4);
  CHECK(ratio.weight(1) == 2.0);
  CHECK(ratio.weight(2) == 1.5);
  CHECK(ratio.weight(3) == Catch::Approx(4.0 / 3.0));

  WeightedShiftSpec custom;
  custom.weights = CustomWeights{{3.0, 1.0, 2.0}, 0.5};
  custom.truncation = 6;
  CHECK(custom.weight(1) == 3.0);
  CHECK(custom.weight(3) == 2.0);
  CHECK(custom.weight(4) == 0.5);  // past the explicit list: tail
  CHECK(custom.weight(99) == 0.5);

  // operator norm of the truncated shift: max over applied weights w_2..w_M
  CHECK(constant_spec(2.0, 8).max_applied_weight() == 2.0);
  CHECK(ratio_spec(8).max_applied_weight() == 1.5);

  CHECK_THROWS_AS(constant_spec(0.0, 4).validate(), invalid_input);
  CHECK_THROWS_AS(constant_spec(2.0, 1).validate(), invalid_input);
  WeightedShiftSpec bad;
  bad.block_dim = 0;
  CHECK_THROWS_AS(bad.validate(), invalid_input);
}

TEST_CASE("ShiftVector basics: units, norm, support, arithmetic") {
  WeightedShiftSpec spec = constant_spec(2.0, 5, 2);
  ShiftVector z = ShiftVector::zero(spec);
  CHECK(z.norm() == 0.0);
  CHECK(z.support_max() == 0);

  ShiftVector e32 = ShiftVector::unit(spec, 3, 2);
  CHECK(e32.norm() == 1.0);
  CHECK(e32.support_max() == 3);
  CHECK(e32.get(3, 2) == Complex{1.0, 0.0});
  CHECK(e32.get(3, 1) == Complex{0.0, 0.0});

  ShiftVector sum = e32 + ShiftVector::unit(spec, 1, 1);
  CHECK(sum.norm() == Catch::Approx(std::sqrt(2.0)));
  sum *= Complex{0.0, 1.0};
  CHECK(sum.get(1, 1) == Complex{0.0, 1.0});
  CHECK(sum.norm() == Catch::Approx(std::sqrt(2.0)));

  // conjugate-linear first slot: <i a, a> = -i |a|^2
  Complex ip = inner_product(sum, e32 + ShiftVector::unit(spec, 1, 1));
  CHECK(ip.real() == Catch::Approx(0.0).margin(1e-15));
  CHECK(ip.imag() == Catch::Approx(-2.0));
}

TEST_CASE("shift_apply matches the dense matrix oracle") {
  // backward shift: T e_{n+1} = w_{n+1} e_n, T e_1 = 0
  WeightedShiftSpec spec = constant_spec(2.0, 6);
  ShiftVector img = shift_apply(spec, ShiftVector::unit(spec, 2));
  CHECK(img.get(1) == Complex{2.0, 0.0});
  CHECK(img.support_max() == 1);
  CHECK(shift_apply(spec, ShiftVector::unit(spec, 1)).norm() == 0.0);

  WeightedShiftSpec ratio = ratio_spec(6);
  ShiftVector r3 = shift_apply(ratio, ShiftVector::unit(ratio, 3));
  CHECK(r3.get(2) == Complex{4.0 / 3.0, 0.0});

  // dense-matrix cross-check on a generic vector, d = 2
  WeightedShiftSpec wide = ratio_spec(5, 2);
  ShiftVector v = ShiftVector::zero(wide);
  int k = 0;
  for (std::size_t b = 1; b <= 5; ++b)
    for (std::size_t c = 1; c <= 2; ++c) {
      ++k;
      v.set(b, c, Complex{0.1 * k, -0.05 * k});
    }
  auto a = oracles::shift_matrix(wide);
  for (long n = 1; n <= 4; ++n) {
    ShiftVector lib = shift_apply_n(wide, v, n);
    std::vector<Complex> ref = oracles::flatten(v);
    for (long i = 0; i < n; ++i) ref = oracles::mat_vec(a, ref);
    CHECK(oracles::vec_dist(oracles::flatten(lib), ref) < 1e-12);
  }
}

TEST_CASE("right_inverse_apply divides by forward weight products") {
  WeightedShiftSpec spec = constant_spec(2.0, 8);
  ShiftVector pre = right_inverse_apply(spec, ShiftVector::unit(spec, 1), 3);
  CHECK(pre.support_max() == 4);
  CHECK(pre.get(4) == Complex{0.125, 0.0});  // e_4 / (w_2 w_3 w_4) = e_4 / 8
  // exact round trip
  ShiftVector back = shift_apply_n(spec, pre, 3);
  CHECK((back - ShiftVector::unit(spec, 1)).norm() == 0.0);

  // constant-1 weights never shrink: S^5 e_1 = e_6 with coefficient 1
  WeightedShiftSpec flat = constant_spec(1.0, 8);
  ShiftVector p1 = right_inverse_apply(flat, ShiftVector::unit(flat, 1), 5);
  CHECK(p1.get(6) == Complex{1.0, 0.0});
  CHECK(p1.norm() == 1.0);

  // ratio weights: divisor telescopes to (n+2)/2, coefficient 2/(n+2)
  WeightedShiftSpec ratio = ratio_spec(12);
  for (long n : {1L, 2L, 3L, 4L}) {
    ShiftVector p = right_inverse_apply(ratio, ShiftVector::unit(ratio, 1), n);
    CHECK(p.get(static_cast<std::size_t>(n) + 1).real() ==
          Catch::Approx(2.0 / (static_cast<double>(n) + 2.0)).margin(1e-15));
  }
  CHECK(right_inverse_apply(ratio, ShiftVector::unit(ratio, 1), 1).get(2) ==
        Complex{0.66666666666666663, 0.0});
  CHECK(right_inverse_apply(ratio, ShiftVector::unit(ratio, 1), 2).get(3) ==
        Complex{0.5, 0.0});
  CHECK(right_inverse_apply(ratio, ShiftVector::unit(ratio, 1), 3).get(4) ==
        Complex{0.4, 0.0});
  CHECK(right_inverse_apply(ratio, ShiftVector::unit(ratio, 1), 4).get(5) ==
        Complex{0.33333333333333331, 0.0});

  // support overflow is an error, not silent truncation
  CHECK_THROWS_AS(right_inverse_apply(spec, ShiftVector::unit(spec, 6), 3),
                  invalid_input);
  CHECK_THROWS_AS(right_inverse_apply(spec, ShiftVector::unit(spec, 1), -1),
                  invalid_input);
}

TEST_CASE("salas verdict: partial products at a finite horizon") {
  // constant 2: log products n*log2, 2^20 = 1048576 > 10^6
  SalasVerdict v = salas_verdict(constant_spec(2.0, 32), 20, 1e6);
  CHECK(v.satisfied);
  CHECK(v.max_index == 20);
  CHECK(v.max_log_product == Catch::Approx(20.0 * std::log(2.0)));
  REQUIRE(v.log_partial_products.size() == 20);
  CHECK(v.log_partial_products[0] == Catch::Approx(std::log(2.0)));
  CHECK(v.label() == "criterion-satisfied-at-horizon");

  // same weights, one step earlier: 2^19 < 10^6
  CHECK_FALSE(salas_verdict(constant_spec(2.0, 32), 19, 1e6).satisfied);

  // constant 1: products never leave 1
  SalasVerdict flat = salas_verdict(constant_spec(1.0, 32), 1000, 2.0);
  CHECK_FALSE(flat.satisfied);
  CHECK(flat.max_log_product == 0.0);
  CHECK(flat.label() == "not-satisfied-at-horizon");

  // ratio weights telescope: P_n = n + 1 exactly
  SalasVerdict ratio = salas_verdict(ratio_spec(4), 30, 10.0);
  CHECK(ratio.satisfied);
  for (std::size_t n = 1; n <= 30; ++n)
    CHECK(ratio.log_partial_products[n - 1] ==
          Catch::Approx(std::log(static_cast<double>(n) + 1.0)).margin(1e-12));

  CHECK_THROWS_AS(salas_verdict(constant_spec(2.0, 4), 0, 2.0), invalid_input);
  CHECK_THROWS_AS(salas_verdict(constant_spec(2.0, 4), 5, 0.0), invalid_input);
}

TEST_CASE("transitivity witness: exact construction z = u + S^n v / lambda^n") {
  WeightedShiftSpec spec = constant_spec(2.0, 10);
  ShiftVector e1 = ShiftVector::unit(spec, 1);

  // u = v = e_1, eps_u = 0.1: first n with 2^-n < 0.1 is 4, z = e_1 + e_5/16
  auto w = transitivity_witness(spec, e1, e1, 0.1, 0.1);
  REQUIRE(w.has_value());
  CHECK(w->time == 4);
  CHECK(w->perturbation_norm == Catch::Approx(0.0625));
  CHECK(w->z.get(1) == Complex{1.0, 0.0});
  CHECK(w->z.get(5) == Complex{0.0625, 0.0});
  // the hit is exact: T^4 z = e_1 on the nose
  CHECK((shift_apply_n(spec, w->z, 4) - e1).norm() == 0.0);
  // and z stays eps_u-close to u
  CHECK((w->z - e1).norm() < 0.1);

  // u = 0, v = e_1, loose tolerance: n = 1, z = e_2/2
  auto w0 = transitivity_witness(spec, ShiftVector::zero(spec), e1, 0.51, 0.1);
  REQUIRE(w0.has_value());
  CHECK(w0->time == 1);
  CHECK(w0->z.get(2) == Complex{0.5, 0.0});

  // constant-1 weights: the tail never shrinks below eps_u, no witness
  WeightedShiftSpec flat = constant_spec(1.0, 10);
  CHECK_FALSE(transitivity_witness(flat, ShiftVector::unit(flat, 1),
                                   ShiftVector::unit(flat, 1), 0.5, 0.5)
                  .has_value());

  // support guard: vectors deeper than M/2 are rejected
  CHECK_THROWS_AS(transitivity_witness(spec, ShiftVector::unit(spec, 6), e1,
                                       0.1, 0.1),
                  invalid_input);
  CHECK_THROWS_AS(transitivity_witness(spec, e1, e1, 0.0, 0.1), invalid_input);
  CHECK_THROWS_AS(transitivity_witness(spec, e1, e1, 0.1, 0.1, 0), invalid_input);
}

TEST_CASE("transitivity witness rides stride and unimodular lambda") {
  WeightedShiftSpec spec = constant_spec(2.0, 12, 1);
  spec.field = ScalarField::complex_field;
  ShiftVector e1 = ShiftVector::unit(spec, 1);
  ShiftVector e2 = ShiftVector::unit(spec, 2);

  // lambda = i: witness for (iT), n = 4, i^-4 = 1 keeps z real here
  auto w = transitivity_witness(spec, e1, e2, 0.1, 0.1, 1, Complex{0.0, 1.0});
  REQUIRE(w.has_value());
  CHECK(w->time == 4);
  // revalidate through the System wrapper: apply (iT) four times
  System sys = scale_unimodular(make_shift(spec), Complex{0.0, 1.0});
  Point p = shift_to_point(spec, w->z);
  Point hit = sys.apply_iter(p, 4);
  CHECK(distance(hit, shift_to_point(spec, e2)) < 1e-12);

  // lambda = i with n = 3: the i^-3 = i phase lands on the witness tail
  auto w3 = transitivity_witness(spec, e1, e2, 0.2, 0.2, 1, Complex{0.0, 1.0});
  REQUIRE(w3.has_value());
  CHECK(w3->time == 3);
  Point hit3 = sys.apply_iter(shift_to_point(spec, w3->z), 3);
  CHECK(distance(hit3, shift_to_point(spec, e2)) < 1e-12);

  // stride 2 (T^2): time counts applications of the wrapped operator
  auto ws = transitivity_witness(spec, e1, e2, 0.1, 0.1, 2);
  REQUIRE(ws.has_value());
  CHECK(ws->time == 2);  // 2 applications of T^2 = 4 raw steps
  System squared = power_system(make_shift(spec), 2);
  Point hs = squared.apply_iter(shift_to_point(spec, ws->z), 2);
  CHECK(distance(hs, shift_to_point(spec, e2)) < 1e-12);
}

TEST_CASE("transitivity witness generic over block dimension") {
  for (std::size_t d : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
    WeightedShiftSpec spec = constant_spec(2.0, 12, d);
    ShiftVector u = ShiftVector::unit(spec, 1, 1);
    ShiftVector v = ShiftVector::unit(spec, 2, d);
    auto w = transitivity_witness(spec, u, v, 0.1, 0.1);
    REQUIRE(w.has_value());
    ShiftVector img = shift_apply_n(spec, w->z, w->time);
    CHECK((img - v).norm() == 0.0);
    CHECK((w->z - u).norm() < 0.1);
  }
}

TEST_CASE("unit_power is exact on the four axes") {
  using topodyn::detail::unit_power;
  Complex i{0.0, 1.0};
  CHECK(unit_power(i, 0) == Complex{1.0, 0.0});
  CHECK(unit_power(i, 1) == i);
  CHECK(unit_power(i, 2) == Complex{-1.0, 0.0});
  CHECK(unit_power(i, 3) == Complex{0.0, -1.0});
  CHECK(unit_power(i, 4) == Complex{1.0, 0.0});
  CHECK(unit_power(i, -1) == Complex{0.0, -1.0});
  CHECK(unit_power(i, -4) == Complex{1.0, 0.0});
  CHECK(unit_power(Complex{-1.0, 0.0}, -3) == Complex{-1.0, 0.0});
}

TEST_CASE("point/shift conversions round-trip in both fields") {
  WeightedShiftSpec real = constant_spec(2.0, 4, 2);
  ShiftVector v = ShiftVector::zero(real);
  v.set(1, 1, Complex{0.25, 0.0});
  v.set(4, 2, Complex{-1.5, 0.0});
  Point p = shift_to_point(real, v);
  CHECK(p.coords.size() == 8);
  CHECK((point_to_shift(real, p) - v).norm() == 0.0);

  WeightedShiftSpec cx = constant_spec(2.0, 3, 1);
  cx.field = ScalarField::complex_field;
  ShiftVector z = ShiftVector::zero(cx);
  z.set(2, 1, Complex{0.5, -0.25});
  Point q = shift_to_point(cx, z);
  CHECK(q.coords.size() == 6);
  CHECK(q.coords[2] == 0.5);
  CHECK(q.coords[3] == -0.25);
  CHECK((point_to_shift(cx, q) - z).norm() == 0.0);

  CHECK_THROWS_AS(point_to_shift(cx, Point::l2({1.0, 2.0})), invalid_input);
  CHECK_THROWS_AS(shift_to_point(real, ShiftVector::zero(cx)), invalid_input);
}
