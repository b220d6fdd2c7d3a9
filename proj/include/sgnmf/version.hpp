#pragma once

namespace sgnmf {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

}  // namespace sgnmf
