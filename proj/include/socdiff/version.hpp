#pragma once

namespace socdiff {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace socdiff
