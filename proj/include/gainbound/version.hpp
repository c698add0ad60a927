#pragma once

namespace gainbound {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gainbound
