#pragma once

namespace spades {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spades
