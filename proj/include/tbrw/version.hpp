#pragma once

namespace tbrw {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tbrw
