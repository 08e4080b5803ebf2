#pragma once

namespace bps {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bps
