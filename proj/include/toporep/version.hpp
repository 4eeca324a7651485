#pragma once

namespace toporep {
inline constexpr const char* kVersion = "0.1.0";
}
