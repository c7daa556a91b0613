#pragma once

namespace lyopt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lyopt
