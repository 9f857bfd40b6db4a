#pragma once

namespace silicon {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace silicon
