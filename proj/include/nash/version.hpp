#pragma once

namespace nash {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nash
