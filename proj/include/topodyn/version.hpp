#pragma once

#include <string_view>

namespace topodyn {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kToolName = "topodyn";

}  // namespace topodyn
