#pragma once

#include <string_view>

namespace authscan {

inline constexpr std::string_view kToolName = "authscan";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace authscan
