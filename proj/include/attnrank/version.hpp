#pragma once

namespace attnrank {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace attnrank
