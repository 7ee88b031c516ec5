#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "topodyn/errors.hpp"
#include "topodyn/geometry.hpp"
#include "topodyn/sampler.hpp"
#include "topodyn/shifts.hpp"

namespace topodyn {

struct System;

// x -> 2x mod 1 on the circle.
struct DoublingMap {};

// x -> x + alpha mod 1 on the circle.
struct RotationMap {
  double alpha = 0.0;
};

// x -> 2x on [0,1/2], 2 - 2x on [1/2,1]; the interval is invariant.
struct TentMap {};

// x -> fixed + factor * (x - fixed); factor in (0,1) keeps interval and l2
// points inside their space.
struct ContractionMap {
  double factor = 0.5;
  Point fixed;
};

// Circle map that swaps the halves A = [0,1/2] and B = [1/2,1]: translation
// by 1/2 on A, a three-branch expanding fold of B onto A. T is transitive
// while T^2 leaves each half invariant.
struct InterchangeMap {};

struct ShiftMap {
  WeightedShiftSpec spec;
};

// p-fold composition of the base system.
struct PowerMap {
  std::shared_ptr<const System> base;
  long exponent = 1;
};

// x -> lambda * base(x); only defined for shift-family systems where scalar
// multiplication makes sense.
struct UnimodularScaleMap {
  std::shared_ptr<const System> base;
  Complex lambda{1.0, 0.0};
};

using SystemImpl =
    std::variant<DoublingMap, RotationMap, TentMap, ContractionMap,
                 InterchangeMap, ShiftMap, PowerMap, UnimodularScaleMap>;

// Composite view of a wrapped shift: one application of the outer system is
// z -> lambda * S^stride z over the given spec.
struct ShiftView {
  const WeightedShiftSpec* spec = nullptr;
  long stride = 1;
  Complex lambda{1.0, 0.0};
};

namespace detail {

inline double interchange_apply(double x) {
  if (x < 0.5) return x + 0.5;
  if (x < 0.625) return 4.0 * x - 2.0;
  if (x < 0.75) return 3.0 - 4.0 * x;
  return 2.0 * x - 1.5;
}

}  // namespace detail

struct System {
  SystemImpl impl;

  SpaceTag space() const {
    struct V {
      SpaceTag operator()(const DoublingMap&) const { return SpaceTag::circle; }
      SpaceTag operator()(const RotationMap&) const { return SpaceTag::circle; }
      SpaceTag operator()(const TentMap&) const { return SpaceTag::interval; }
      SpaceTag operator()(const ContractionMap& m) const {
        return m.fixed.space;
      }
      SpaceTag operator()(const InterchangeMap&) const {
        return SpaceTag::circle;
      }
      SpaceTag operator()(const ShiftMap&) const { return SpaceTag::l2; }
      SpaceTag operator()(const PowerMap& m) const { return m.base->space(); }
      SpaceTag operator()(const UnimodularScaleMap& m) const {
        return m.base->space();
      }
    };
    return std::visit(V{}, impl);
  }

  std::size_t dimension() const {
    struct V {
      std::size_t operator()(const DoublingMap&) const { return 1; }
      std::size_t operator()(const RotationMap&) const { return 1; }
      std::size_t operator()(const TentMap&) const { return 1; }
      std::size_t operator()(const ContractionMap& m) const {
        return m.fixed.coords.size();
      }
      std::size_t operator()(const InterchangeMap&) const { return 1; }
      std::size_t operator()(const ShiftMap& m) const {
        return m.spec.coord_count();
      }
      std::size_t operator()(const PowerMap& m) const {
        return m.base->dimension();
      }
      std::size_t operator()(const UnimodularScaleMap& m) const {
        return m.base->dimension();
      }
    };
    return std::visit(V{}, impl);
  }

  // One-step Lipschitz constant on the invariant space.
  double lipschitz() const {
    struct V {
      double operator()(const DoublingMap&) const { return 2.0; }
      double operator()(const RotationMap&) const { return 1.0; }
      double operator()(const TentMap&) const { return 2.0; }
      double operator()(const ContractionMap& m) const { return m.factor; }
      double operator()(const InterchangeMap&) const { return 4.0; }
      double operator()(const ShiftMap& m) const {
        return m.spec.max_applied_weight();
      }
      double operator()(const PowerMap& m) const {
        return std::pow(m.base->lipschitz(), static_cast<double>(m.exponent));
      }
      double operator()(const UnimodularScaleMap& m) const {
        return std::abs(m.lambda) * m.base->lipschitz();
      }
    };
    return std::visit(V{}, impl);
  }

  std::string name() const {
    struct V {
      std::string operator()(const DoublingMap&) const { return "doubling"; }
      std::string operator()(const RotationMap& m) const {
        return "rotation(alpha=" + std::to_string(m.alpha) + ")";
      }
      std::string operator()(const TentMap&) const { return "tent"; }
      std::string operator()(const ContractionMap& m) const {
        return "contraction(factor=" + std::to_string(m.factor) + ")";
      }
      std::string operator()(const InterchangeMap&) const {
        return "interchange";
      }
      std::string operator()(const ShiftMap& m) const {
        return "shift(M=" + std::to_string(m.spec.truncation) + ")";
      }
      std::string operator()(const PowerMap& m) const {
        return "power(" + m.base->name() + "," + std::to_string(m.exponent) +
               ")";
      }
      std::string operator()(const UnimodularScaleMap& m) const {
        return "scale(" + m.base->name() + "," +
               std::to_string(m.lambda.real()) + "+" +
               std::to_string(m.lambda.imag()) + "i)";
      }
    };
    return std::visit(V{}, impl);
  }

  void validate_point(const Point& p) const {
    if (p.space != space())
      throw invalid_input("point space does not match system space");
    if (p.coords.size() != dimension())
      throw invalid_input("point dimension does not match system");
    for (double c : p.coords)
      if (!std::isfinite(c)) throw invalid_input("point has non-finite coordinate");
    if (p.space == SpaceTag::circle) {
      if (p.coords[0] < 0.0 || p.coords[0] >= 1.0)
        throw invalid_input("circle point must lie in [0,1)");
    } else if (p.space == SpaceTag::interval) {
      if (p.coords[0] < 0.0 || p.coords[0] > 1.0)
        throw invalid_input("interval point must lie in [0,1]");
    }
  }

  Point apply_unchecked(const Point& p) const;

  Point apply(const Point& p) const {
    validate_point(p);
    return apply_unchecked(p);
  }

  // n-fold application, stepwise so floating point matches repeated apply.
  Point apply_iter(const Point& p, long n) const {
    if (n < 0) throw invalid_input("apply_iter: n must be >= 0");
    validate_point(p);
    Point q = p;
    for (long i = 0; i < n; ++i) q = apply_unchecked(q);
    return q;
  }
};

inline System make_doubling() { return System{DoublingMap{}}; }

inline System make_rotation(double alpha) {
  if (!std::isfinite(alpha)) throw invalid_input("rotation alpha must be finite");
  return System{RotationMap{wrap_unit(alpha)}};
}

inline System make_tent() { return System{TentMap{}}; }

inline System make_contraction(double factor, Point fixed) {
  if (!(factor > 0.0) || !(factor < 1.0))
    throw invalid_input("contraction factor must lie in (0,1)");
  if (fixed.space == SpaceTag::circle)
    throw invalid_input("contraction is not defined on the circle");
  for (double c : fixed.coords)
    if (!std::isfinite(c)) throw invalid_input("contraction fixed point must be finite");
  if (fixed.space == SpaceTag::interval &&
      (fixed.coords.size() != 1 || fixed.coords[0] < 0.0 || fixed.coords[0] > 1.0))
    throw invalid_input("contraction fixed point must lie in [0,1]");
  return System{ContractionMap{factor, std::move(fixed)}};
}

inline System make_interchange() { return System{InterchangeMap{}}; }

inline System make_shift(WeightedShiftSpec spec) {
  spec.validate();
  return System{ShiftMap{std::move(spec)}};
}

// Walks Power/Scale wrappers down to a ShiftMap, composing stride and
// scalar: (lambda T^s)^p = lambda^p T^{sp}.
inline std::optional<ShiftView> shift_view(const System& sys) {
  if (const auto* s = std::get_if<ShiftMap>(&sys.impl))
    return ShiftView{&s->spec, 1, Complex{1.0, 0.0}};
  if (const auto* p = std::get_if<PowerMap>(&sys.impl)) {
    auto inner = shift_view(*p->base);
    if (!inner) return std::nullopt;
    inner->stride *= p->exponent;
    inner->lambda = detail::unit_power(inner->lambda, p->exponent);
    return inner;
  }
  if (const auto* u = std::get_if<UnimodularScaleMap>(&sys.impl)) {
    auto inner = shift_view(*u->base);
    if (!inner) return std::nullopt;
    inner->lambda *= u->lambda;
    return inner;
  }
  return std::nullopt;
}

inline bool is_shift_family(const System& sys) {
  return shift_view(sys).has_value();
}

inline System power_system(System base, long exponent) {
  if (exponent < 1) throw invalid_input("power exponent must be >= 1");
  if (exponent == 1) return base;
  return System{PowerMap{std::make_shared<System>(std::move(base)), exponent}};
}

inline System scale_unimodular(System base, Complex lambda) {
  if (std::abs(std::abs(lambda) - 1.0) > 1e-12)
    throw invalid_input("scale factor must be unimodular");
  auto view = shift_view(base);
  if (!view)
    throw invalid_input("unimodular scaling is only defined for shift systems");
  if (view->spec->field == ScalarField::real && lambda.imag() != 0.0)
    throw invalid_input("real shift admits only real unimodular factors (+1/-1)");
  return System{
      UnimodularScaleMap{std::make_shared<System>(std::move(base)), lambda}};
}

inline Point System::apply_unchecked(const Point& p) const {
  struct V {
    const Point& p;
    Point operator()(const DoublingMap&) const {
      return Point::circle(wrap_unit(2.0 * p.coords[0]));
    }
    Point operator()(const RotationMap& m) const {
      return Point::circle(wrap_unit(p.coords[0] + m.alpha));
    }
    Point operator()(const TentMap&) const {
      double x = p.coords[0];
      return Point::interval(x <= 0.5 ? 2.0 * x : 2.0 - 2.0 * x);
    }
    Point operator()(const ContractionMap& m) const {
      Point q = p;
      for (std::size_t i = 0; i < q.coords.size(); ++i)
        q.coords[i] = m.fixed.coords[i] + m.factor * (q.coords[i] - m.fixed.coords[i]);
      return q;
    }
    Point operator()(const InterchangeMap&) const {
      return Point::circle(wrap_unit(detail::interchange_apply(p.coords[0])));
    }
    Point operator()(const ShiftMap& m) const {
      return shift_to_point(m.spec, shift_apply(m.spec, point_to_shift(m.spec, p)));
    }
    Point operator()(const PowerMap& m) const {
      Point q = p;
      for (long i = 0; i < m.exponent; ++i) q = m.base->apply_unchecked(q);
      return q;
    }
    Point operator()(const UnimodularScaleMap& m) const {
      Point q = m.base->apply_unchecked(p);
      auto view = shift_view(*m.base);
      ShiftVector v = point_to_shift(*view->spec, q);
      v *= m.lambda;
      return shift_to_point(*view->spec, v);
    }
  };
  return std::visit(V{p}, impl);
}

// ---------------------------------------------------------------------------
// Rigorous image enclosure: T^n B(c,r) is contained in B(T^n c, r * L^n).

inline Ball enclose_image(const System& sys, const Ball& ball, long n) {
  if (n < 0) throw invalid_input("enclose_image: n must be >= 0");
  if (!(ball.radius >= 0.0) || !std::isfinite(ball.radius))
    throw invalid_input("enclose_image: radius must be finite and >= 0");
  double factor = std::pow(sys.lipschitz(), static_cast<double>(n));
  double radius = ball.radius * factor;
  if (!std::isfinite(radius) || radius > 1e300)
    throw enclosure_blowup("enclosure radius overflow after " +
                           std::to_string(n) + " steps");
  return Ball{sys.apply_iter(ball.center, n), radius};
}

// ---------------------------------------------------------------------------
// Deterministic ball sampling. The first sample is the exact center; the
// rest are uniform in the ball (gaussian direction, radius scaled by
// u^{1/dim}), projected into the system's space.

inline std::vector<Point> sample_ball(const System& sys, const Ball& ball,
                                      std::size_t count, SeededSampler sampler) {
  if (count < 1) throw invalid_input("sample_ball: count must be >= 1");
  sys.validate_point(ball.center);
  if (!(ball.radius > 0.0)) throw invalid_input("sample_ball: radius must be > 0");
  std::size_t dim = ball.center.coords.size();
  std::vector<Point> out;
  out.reserve(count);
  out.push_back(ball.center);
  while (out.size() < count) {
    Point q = ball.center;
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      std::vector<double> dir(dim);
      double norm2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        dir[i] = sampler.next_gaussian();
        norm2 += dir[i] * dir[i];
      }
      if (norm2 == 0.0) continue;
      double scale = ball.radius *
                     std::pow(sampler.next_unit(), 1.0 / static_cast<double>(dim)) /
                     std::sqrt(norm2);
      q = ball.center;
      for (std::size_t i = 0; i < dim; ++i) q.coords[i] += scale * dir[i];
      if (q.space == SpaceTag::circle) {
        q.coords[0] = wrap_unit(q.coords[0]);
        ok = true;
      } else if (q.space == SpaceTag::interval) {
        ok = q.coords[0] >= 0.0 && q.coords[0] <= 1.0;
      } else {
        ok = true;
      }
    }
    out.push_back(ok ? q : ball.center);
  }
  return out;
}

}  // namespace topodyn
