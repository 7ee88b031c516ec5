#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "topodyn/errors.hpp"

namespace topodyn {

// Ambient space of a point. The tag also fixes the metric:
//   circle   -> [0,1) with d(a,b) = min(|a-b|, 1-|a-b|)
//   interval -> [0,1] with d(a,b) = |a-b|
//   l2       -> truncated sequence space, Euclidean norm of the
//               coordinate difference (truncated tail treated as zero)
enum class SpaceTag { circle, interval, l2 };

inline std::string_view to_string(SpaceTag tag) {
  switch (tag) {
    case SpaceTag::circle: return "circle";
    case SpaceTag::interval: return "interval";
    case SpaceTag::l2: return "l2";
  }
  return "?";
}

inline SpaceTag parse_space_tag(std::string_view s) {
  if (s == "circle") return SpaceTag::circle;
  if (s == "interval") return SpaceTag::interval;
  if (s == "l2") return SpaceTag::l2;
  throw invalid_input("unknown space tag: " + std::string(s));
}

// Wraps into [0,1). Exact for inputs already in [0,2) (single subtraction).
inline double wrap_unit(double x) {
  double y = x - std::floor(x);
  return y >= 1.0 ? y - 1.0 : y;
}

inline double circle_dist(double a, double b) {
  double t = std::fabs(wrap_unit(a) - wrap_unit(b));
  return t <= 0.5 ? t : 1.0 - t;
}

struct Point {
  std::vector<double> coords;
  SpaceTag space = SpaceTag::circle;

  std::size_t dim() const { return coords.size(); }
  double scalar() const { return coords.at(0); }

  static Point circle(double x) { return {{x}, SpaceTag::circle}; }
  static Point interval(double x) { return {{x}, SpaceTag::interval}; }
  static Point l2(std::vector<double> c) { return {std::move(c), SpaceTag::l2}; }

  friend bool operator==(const Point& a, const Point& b) {
    return a.space == b.space && a.coords == b.coords;
  }
};

inline double distance(const Point& a, const Point& b) {
  if (a.space != b.space || a.coords.size() != b.coords.size())
    throw invalid_input("distance: points from different spaces");
  switch (a.space) {
    case SpaceTag::circle:
      return circle_dist(a.coords[0], b.coords[0]);
    case SpaceTag::interval:
      return std::fabs(a.coords[0] - b.coords[0]);
    case SpaceTag::l2: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.coords.size(); ++i) {
        double d = a.coords[i] - b.coords[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
  }
  throw invalid_input("distance: bad space tag");
}

struct Ball {
  Point center;
  double radius = 0.0;

  friend bool operator==(const Ball& a, const Ball& b) {
    return a.center == b.center && a.radius == b.radius;
  }
};

using BallPair = std::pair<Ball, Ball>;

// Sufficient containment certificate B(inner) subset B(outer), valid in any
// metric space: d(centers) + r_inner <= r_outer. Margin is the leftover.
inline double containment_margin(const Ball& outer, const Ball& inner) {
  return outer.radius - distance(outer.center, inner.center) - inner.radius;
}

inline bool ball_contains(const Ball& outer, const Ball& inner,
                          double slack = kContainmentSlack) {
  return containment_margin(outer, inner) >= -slack;
}

}  // namespace topodyn
