#pragma once

namespace ctxcomp {

inline constexpr const char* kToolName = "ctxcomp";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace ctxcomp
