#pragma once

#include <stdexcept>

namespace topodyn {

// Violated precondition: bad coordinates, unknown catalogue id, shift
// support overflow, non-unimodular scale factor, ...
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Lipschitz-propagated radius left the representable range.
class enclosure_blowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Slack added to floating-point containment comparisons instead of
// comparing exactly.
inline constexpr double kContainmentSlack = 1e-12;

// Slack for empirical orbit checks (distances accumulated over many
// map applications).
inline constexpr double kOrbitSlack = 1e-9;

}  // namespace topodyn
