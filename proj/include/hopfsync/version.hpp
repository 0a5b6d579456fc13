#pragma once

namespace hopfsync {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hopfsync
