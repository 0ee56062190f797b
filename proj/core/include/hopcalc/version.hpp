#pragma once

namespace hopcalc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hopcalc
