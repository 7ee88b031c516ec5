#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "topodyn/errors.hpp"
#include "topodyn/geometry.hpp"

namespace topodyn {

using Complex = std::complex<double>;

enum class ScalarField { real, complex_field };

inline std::string_view to_string(ScalarField f) {
  return f == ScalarField::real ? "real" : "complex";
}

// ---------------------------------------------------------------------------
// Weight rules. weight(n) is defined for n >= 1 and must be > 0.

struct ConstantWeights {
  double value = 2.0;
};

// w_n = (n + 1) / n; partial products w_1...w_n telescope to n + 1.
struct RatioWeights {};

// Explicit head, constant tail.
struct CustomWeights {
  std::vector<double> values;
  double tail = 1.0;
};

using WeightRule = std::variant<ConstantWeights, RatioWeights, CustomWeights>;

// Backward weighted shift on the truncation of l2(H) to M blocks, H modeled
// as a d-dimensional component space. Induces a system of dimension M*d.
struct WeightedShiftSpec {
  WeightRule weights = ConstantWeights{2.0};
  std::size_t block_dim = 1;   // d
  std::size_t truncation = 2;  // M
  ScalarField field = ScalarField::real;

  double weight(std::size_t n) const {
    if (n < 1) throw invalid_input("weight index must be >= 1");
    if (const auto* c = std::get_if<ConstantWeights>(&weights)) return c->value;
    if (std::holds_alternative<RatioWeights>(weights))
      return (static_cast<double>(n) + 1.0) / static_cast<double>(n);
    if (const auto* cw = std::get_if<CustomWeights>(&weights))
      return n <= cw->values.size() ? cw->values[n - 1] : cw->tail;
    throw invalid_input("unknown weight rule");
  }

  std::size_t dimension() const { return block_dim * truncation; }
  std::size_t coord_count() const {
    return dimension() * (field == ScalarField::complex_field ? 2 : 1);
  }

  // One-step operator norm: the shift applies weights w_2..w_M.
  double max_applied_weight() const {
    double m = 0.0;
    for (std::size_t n = 2; n <= truncation; ++n) m = std::max(m, weight(n));
    return m;
  }

  void validate() const {
    if (block_dim < 1) throw invalid_input("shift block_dim must be >= 1");
    if (truncation < 2) throw invalid_input("shift truncation must be >= 2");
    for (std::size_t n = 1; n <= truncation + 1; ++n)
      if (!(weight(n) > 0.0) || !std::isfinite(weight(n)))
        throw invalid_input("shift weights must be strictly positive");
    if (const auto* cw = std::get_if<CustomWeights>(&weights)) {
      for (double w : cw->values)
        if (!(w > 0.0) || !std::isfinite(w))
          throw invalid_input("shift weights must be strictly positive");
      if (!(cw->tail > 0.0) || !std::isfinite(cw->tail))
        throw invalid_input("shift tail weight must be strictly positive");
    }
  }
};

// ---------------------------------------------------------------------------
// Vectors of the truncated space. Blocks are 1-based in the public helpers
// (matching the usual e_1, e_2, ... notation); storage is flat row-major.
// Real-field specs simply keep imaginary parts at zero.

class ShiftVector {
 public:
  ShiftVector() = default;
  ShiftVector(std::size_t truncation, std::size_t block_dim)
      : data_(truncation * block_dim, Complex{0.0, 0.0}),
        block_dim_(block_dim) {}

  static ShiftVector zero(const WeightedShiftSpec& spec) {
    return ShiftVector(spec.truncation, spec.block_dim);
  }

  // Unit vector in the given 1-based block / component.
  static ShiftVector unit(const WeightedShiftSpec& spec, std::size_t block,
                          std::size_t comp = 1) {
    ShiftVector v = zero(spec);
    v.set(block, comp, Complex{1.0, 0.0});
    return v;
  }

  std::size_t blocks() const {
    return block_dim_ ? data_.size() / block_dim_ : 0;
  }
  std::size_t block_dim() const { return block_dim_; }
  std::size_t size() const { return data_.size(); }

  Complex get(std::size_t block, std::size_t comp = 1) const {
    return data_.at((block - 1) * block_dim_ + (comp - 1));
  }
  void set(std::size_t block, std::size_t comp, Complex value) {
    data_.at((block - 1) * block_dim_ + (comp - 1)) = value;
  }
  void add(std::size_t block, std::size_t comp, Complex value) {
    data_.at((block - 1) * block_dim_ + (comp - 1)) += value;
  }

  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

  double norm() const {
    double s = 0.0;
    for (const Complex& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  // Largest 1-based block index with a nonzero entry; 0 for the zero vector.
  std::size_t support_max() const {
    for (std::size_t b = blocks(); b >= 1; --b)
      for (std::size_t c = 1; c <= block_dim_; ++c)
        if (get(b, c) != Complex{0.0, 0.0}) return b;
    return 0;
  }

  ShiftVector& operator+=(const ShiftVector& o) {
    if (o.data_.size() != data_.size() || o.block_dim_ != block_dim_)
      throw invalid_input("shift vector size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ShiftVector& operator-=(const ShiftVector& o) {
    if (o.data_.size() != data_.size() || o.block_dim_ != block_dim_)
      throw invalid_input("shift vector size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ShiftVector& operator*=(Complex s) {
    for (Complex& z : data_) z *= s;
    return *this;
  }

  friend ShiftVector operator+(ShiftVector a, const ShiftVector& b) {
    a += b;
    return a;
  }
  friend ShiftVector operator-(ShiftVector a, const ShiftVector& b) {
    a -= b;
    return a;
  }
  friend ShiftVector operator*(Complex s, ShiftVector v) {
    v *= s;
    return v;
  }

 private:
  std::vector<Complex> data_;
  std::size_t block_dim_ = 1;
};

// Conjugate-linear in the first argument.
inline Complex inner_product(const ShiftVector& a, const ShiftVector& b) {
  if (a.size() != b.size())
    throw invalid_input("inner_product: size mismatch");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::conj(a.data()[i]) * b.data()[i];
  return s;
}

// ---------------------------------------------------------------------------
// The shift itself and its weighted right inverse.

// Block n of the output is w_{n+1} * block n+1 of the input; the last block
// becomes zero.
inline ShiftVector shift_apply(const WeightedShiftSpec& spec,
                               const ShiftVector& v) {
  if (v.blocks() != spec.truncation || v.block_dim() != spec.block_dim)
    throw invalid_input("shift_apply: vector does not match spec");
  ShiftVector out = ShiftVector::zero(spec);
  for (std::size_t b = 1; b + 1 <= spec.truncation; ++b) {
    double w = spec.weight(b + 1);
    for (std::size_t c = 1; c <= spec.block_dim; ++c)
      out.set(b, c, w * v.get(b + 1, c));
  }
  return out;
}

inline ShiftVector shift_apply_n(const WeightedShiftSpec& spec, ShiftVector v,
                                 long n) {
  if (n < 0) throw invalid_input("shift_apply_n: n must be >= 0");
  for (long i = 0; i < n; ++i) v = shift_apply(spec, v);
  return v;
}

// Right inverse S_w^n: block j of v lands in block j+n divided by
// w_{j+1} * ... * w_{j+n} (1-based blocks), so shift_apply^n restores v
// whenever the support fits inside the truncation.
inline ShiftVector right_inverse_apply(const WeightedShiftSpec& spec,
                                       const ShiftVector& v, long n) {
  if (n < 0) throw invalid_input("right_inverse_apply: n must be >= 0");
  if (v.blocks() != spec.truncation || v.block_dim() != spec.block_dim)
    throw invalid_input("right_inverse_apply: vector does not match spec");
  std::size_t sup = v.support_max();
  if (sup + static_cast<std::size_t>(n) > spec.truncation)
    throw invalid_input(
        "right_inverse_apply: support overflow (support " +
        std::to_string(sup) + " + n " + std::to_string(n) +
        " exceeds truncation " + std::to_string(spec.truncation) + ")");
  ShiftVector out = ShiftVector::zero(spec);
  for (std::size_t j = 1; j <= sup; ++j) {
    double prod = 1.0;
    for (long t = 1; t <= n; ++t) prod *= spec.weight(j + static_cast<std::size_t>(t));
    if (!std::isfinite(prod) || prod <= 0.0)
      throw invalid_input("right_inverse_apply: weight product overflow");
    for (std::size_t c = 1; c <= spec.block_dim; ++c)
      out.set(j + static_cast<std::size_t>(n), c, v.get(j, c) / prod);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partial products of the weight sequence, kept in log space.

struct SalasVerdict {
  bool satisfied = false;
  long horizon = 0;
  double threshold = 0.0;
  double log_threshold = 0.0;
  std::vector<double> log_partial_products;  // log(w_1...w_n), n = 1..horizon
  long max_index = 0;                        // argmax n (1-based)
  double max_log_product = 0.0;

  std::string_view label() const {
    return satisfied ? "criterion-satisfied-at-horizon"
                     : "not-satisfied-at-horizon";
  }
};

// Unboundedness of w_1...w_n checked at a finite horizon; the verdict is a
// statement about the horizon only, never about the full sequence.
inline SalasVerdict salas_verdict(const WeightedShiftSpec& spec, long horizon,
                                  double threshold) {
  if (horizon < 1) throw invalid_input("salas_verdict: horizon must be >= 1");
  if (!(threshold > 0.0))
    throw invalid_input("salas_verdict: threshold must be > 0");
  SalasVerdict v;
  v.horizon = horizon;
  v.threshold = threshold;
  v.log_threshold = std::log(threshold);
  v.log_partial_products.reserve(static_cast<std::size_t>(horizon));
  double acc = 0.0;
  for (long n = 1; n <= horizon; ++n) {
    acc += std::log(spec.weight(static_cast<std::size_t>(n)));
    v.log_partial_products.push_back(acc);
    if (n == 1 || acc > v.max_log_product) {
      v.max_log_product = acc;
      v.max_index = n;
    }
  }
  v.satisfied = v.max_log_product >= v.log_threshold;
  return v;
}

// ---------------------------------------------------------------------------
// Exact transitivity witness z = u + lambda^{-n} S_w^{n*stride} v.
//
// After n applications of lambda * (shift)^stride the u part has died
// (n*stride >= support(u)) and the right-inverse part returns to v exactly,
// while ||z - u|| < eps_u keeps z inside the source ball. stride/lambda
// cover powers and unimodular multiples of the base shift.

struct ShiftWitness {
  ShiftVector z;
  long time = 0;               // applications of the (wrapped) operator
  double perturbation_norm = 0.0;  // ||z - u||
};

namespace detail {

// lambda^k for integer k by binary exponentiation; exact on the axes
// (+-1, +-i) where the acceptance cases live.
inline Complex unit_power(Complex lambda, long k) {
  bool inv = k < 0;
  unsigned long e = inv ? static_cast<unsigned long>(-(k + 1)) + 1ul
                        : static_cast<unsigned long>(k);
  Complex r{1.0, 0.0};
  Complex b = lambda;
  while (e) {
    if (e & 1ul) r *= b;
    b *= b;
    e >>= 1;
  }
  if (inv) r = std::conj(r) / std::norm(r);  // 1/r for unimodular-ish r
  return r;
}

}  // namespace detail

inline std::optional<ShiftWitness> transitivity_witness(
    const WeightedShiftSpec& spec, const ShiftVector& u, const ShiftVector& v,
    double eps_u, double eps_v, long stride = 1,
    Complex lambda = Complex{1.0, 0.0}, long max_time = -1) {
  (void)eps_v;  // the hit is exact: shift^n z == v, trivially within eps_v
  if (!(eps_u > 0.0) || !(eps_v > 0.0))
    throw invalid_input("transitivity_witness: tolerances must be > 0");
  if (stride < 1) throw invalid_input("transitivity_witness: stride must be >= 1");
  std::size_t su = u.support_max();
  std::size_t sv = v.support_max();
  if (2 * su > spec.truncation || 2 * sv > spec.truncation)
    throw invalid_input(
        "transitivity_witness: supports must fit in half the truncation");

  long n0 = static_cast<long>((su + static_cast<std::size_t>(stride) - 1) /
                              static_cast<std::size_t>(stride));
  for (long n = std::max<long>(1, n0);; ++n) {
    long steps = n * stride;
    if (sv + static_cast<std::size_t>(steps) > spec.truncation) break;
    if (max_time >= 0 && n > max_time) break;
    ShiftVector tail = right_inverse_apply(spec, v, steps);
    double tn = tail.norm();
    if (tn < eps_u) {
      tail *= detail::unit_power(lambda, -n);
      ShiftWitness w{u + tail, n, tn};
      return w;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Conversions to/from flat Point coordinates (complex entries stored as
// adjacent re/im pairs).

inline Point shift_to_point(const WeightedShiftSpec& spec,
                            const ShiftVector& v) {
  if (v.blocks() != spec.truncation || v.block_dim() != spec.block_dim)
    throw invalid_input("shift_to_point: vector does not match spec");
  Point p;
  p.space = SpaceTag::l2;
  if (spec.field == ScalarField::complex_field) {
    p.coords.reserve(2 * v.size());
    for (const Complex& z : v.data()) {
      p.coords.push_back(z.real());
      p.coords.push_back(z.imag());
    }
  } else {
    p.coords.reserve(v.size());
    for (const Complex& z : v.data()) p.coords.push_back(z.real());
  }
  return p;
}

inline ShiftVector point_to_shift(const WeightedShiftSpec& spec,
                                  const Point& p) {
  if (p.space != SpaceTag::l2 || p.coords.size() != spec.coord_count())
    throw invalid_input("point_to_shift: point does not match spec");
  ShiftVector v(spec.truncation, spec.block_dim);
  if (spec.field == ScalarField::complex_field) {
    for (std::size_t i = 0; i < v.size(); ++i)
      v.data()[i] = Complex{p.coords[2 * i], p.coords[2 * i + 1]};
  } else {
    for (std::size_t i = 0; i < v.size(); ++i)
      v.data()[i] = Complex{p.coords[i], 0.0};
  }
  return v;
}

}  // namespace topodyn
