#pragma once

namespace laykit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace laykit
