#pragma once

namespace hte {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hte
