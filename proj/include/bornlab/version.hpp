#pragma once

#include <string_view>

namespace bornlab {

inline constexpr std::string_view kToolName = "bornlab";
inline constexpr std::string_view kVersionString = "0.1.0";

}  // namespace bornlab
