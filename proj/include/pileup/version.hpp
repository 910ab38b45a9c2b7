#pragma once

namespace pileup {
inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "pileup";
} // namespace pileup
