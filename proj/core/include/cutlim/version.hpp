#pragma once

namespace cutlim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cutlim
