#pragma once

namespace uwbeam {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace uwbeam
