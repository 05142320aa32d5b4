#pragma once

#include "shiftreg/error.hpp"

#include <algorithm>
#include <string>
#include <string_view>

namespace shiftreg::control {

enum class RampShape { linear, smoothstep, minimum_jerk };

inline const char* to_string(RampShape s)
{
    switch (s) {
    case RampShape::linear: return "linear";
    case RampShape::smoothstep: return "smoothstep";
    case RampShape::minimum_jerk: return "minimum_jerk";
    }
    return "?";
}

inline RampShape ramp_shape_from(std::string_view name)
{
    if (name == "linear")
        return RampShape::linear;
    if (name == "smoothstep")
        return RampShape::smoothstep;
    if (name == "minimum_jerk")
        return RampShape::minimum_jerk;
    throw ConfigError("unknown ramp shape '" + std::string(name) + "'");
}

// Monotone map [0, 1] → [0, 1]. Inputs outside the interval are clamped.
inline double ramp(RampShape shape, double t)
{
    t = std::clamp(t, 0.0, 1.0);
    switch (shape) {
    case RampShape::linear:
        return t;
    case RampShape::smoothstep:
        return t * t * (3.0 - 2.0 * t);
    case RampShape::minimum_jerk:
        return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    }
    return t;
}

} // namespace shiftreg::control
