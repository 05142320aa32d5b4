#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace shiftreg::io {

// Shortest representation that parses back to the same double.
inline std::string exact(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Fixed number of significant digits, for tables meant to be read by people.
inline std::string sig(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

} // namespace shiftreg::io
