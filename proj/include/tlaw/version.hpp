#pragma once

namespace tlaw {

inline constexpr const char* version = "0.1.0";

} // namespace tlaw
