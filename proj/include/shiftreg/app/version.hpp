#pragma once

namespace shiftreg::app {

inline constexpr const char* version = "1.0.0";

} // namespace shiftreg::app
