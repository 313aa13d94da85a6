#pragma once

namespace wavepalm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wavepalm
