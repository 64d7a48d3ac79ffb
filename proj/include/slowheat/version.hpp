#pragma once

namespace slowheat {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace slowheat
