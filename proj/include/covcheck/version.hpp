#pragma once

namespace covcheck {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace covcheck
