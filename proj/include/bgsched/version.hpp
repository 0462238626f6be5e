#pragma once

namespace bgsched {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bgsched
