#pragma once

namespace sqan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sqan
