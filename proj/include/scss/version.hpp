#pragma once

namespace scss {

/// Embedded in every emitted artifact so outputs can be traced to the code
/// that produced them.
inline constexpr const char* kCodeVersion = "scss-0.1.0";

}  // namespace scss
