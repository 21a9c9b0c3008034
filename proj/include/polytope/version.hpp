#pragma once

namespace polytope {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace polytope
