#pragma once

namespace nvpd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nvpd
