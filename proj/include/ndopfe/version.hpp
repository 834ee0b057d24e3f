#pragma once

namespace ndopfe {

inline constexpr const char* kVersion = "ndopfe 0.1.0";

}  // namespace ndopfe
