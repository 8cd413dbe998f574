#pragma once

namespace cvo {
inline constexpr const char* kToolVersion = "0.1.0";
}
