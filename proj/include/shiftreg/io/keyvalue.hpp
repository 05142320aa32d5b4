#pragma once

// Line-oriented key-value documents:
//
//   # comment
//   top_level_key = value
//   [section.subsection]
//   key = 275 mW
//
// Numeric values may carry a unit suffix from a small SI table; they are
// converted to base SI on read. Every entry remembers its line so schema
// errors can point at the offending field.

#include "shiftreg/error.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace shiftreg::io {

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::optional<double> unit_scale(std::string_view unit)
{
    static const std::map<std::string, double, std::less<>> table{
        {"", 1.0},       {"1", 1.0},
        {"W", 1.0},      {"mW", 1e-3},     {"uW", 1e-6},     {"µW", 1e-6},
        {"m", 1.0},      {"mm", 1e-3},     {"um", 1e-6},     {"µm", 1e-6},     {"nm", 1e-9},
        {"s", 1.0},      {"ms", 1e-3},     {"us", 1e-6},     {"µs", 1e-6},     {"ns", 1e-9},
        {"rad", 1.0},    {"mrad", 1e-3},   {"urad", 1e-6},   {"µrad", 1e-6},
        {"K", 1.0},      {"mK", 1e-3},     {"uK", 1e-6},     {"µK", 1e-6},
        {"K/s", 1.0},    {"mK/s", 1e-3},   {"uK/s", 1e-6},   {"µK/s", 1e-6},
        {"Hz", 1.0},     {"kHz", 1e3},     {"MHz", 1e6},     {"GHz", 1e9},
        {"kg", 1.0},     {"u", 1.66053906660e-27},
        {"rad/s", 1.0},  {"1/s", 1.0},
    };
    auto it = table.find(unit);
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

} // namespace detail

struct KvEntry {
    std::string value;
    int line = 0;
};

class KvDocument {
public:
    static KvDocument parse(std::string_view text)
    {
        KvDocument doc;
        std::string section;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto end = text.find('\n', pos);
            if (end == std::string_view::npos)
                end = text.size();
            ++line_no;
            auto line = text.substr(pos, end - pos);
            pos = end + 1;
            if (auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) {
                if (end == text.size())
                    break;
                continue;
            }
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("unterminated section header", line_no);
                section = std::string(detail::trim(line.substr(1, line.size() - 2)));
                if (section.empty())
                    throw ConfigError("empty section name", line_no);
                doc.sections_.push_back({section, line_no});
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("expected 'key = value'", line_no);
            auto key = std::string(detail::trim(line.substr(0, eq)));
            auto value = std::string(detail::trim(line.substr(eq + 1)));
            if (key.empty())
                throw ConfigError("missing key before '='", line_no);
            auto full = section.empty() ? key : section + "." + key;
            if (doc.entries_.count(full))
                throw ConfigError("duplicate key '" + full + "'", line_no, full);
            doc.entries_[full] = KvEntry{value, line_no};
            doc.order_.push_back(full);
            if (end == text.size())
                break;
        }
        return doc;
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const KvEntry& entry(const std::string& key) const
    {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw ConfigError("missing required key '" + key + "'", 0, key);
        return it->second;
    }

    int line_of(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

    // Parses "<number> [unit]" and returns the value in base SI.
    double number(const std::string& key) const
    {
        const auto& e = entry(key);
        return parse_number(e.value, e.line, key);
    }

    double number_or(const std::string& key, double fallback) const
    {
        return has(key) ? number(key) : fallback;
    }

    long integer(const std::string& key) const
    {
        const auto& e = entry(key);
        long out = 0;
        auto* first = e.value.data();
        auto* last = first + e.value.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc{} || ptr != last)
            throw ConfigError("'" + key + "' expects an integer, got '" + e.value + "'", e.line, key);
        return out;
    }

    long integer_or(const std::string& key, long fallback) const
    {
        return has(key) ? integer(key) : fallback;
    }

    const std::string& string(const std::string& key) const { return entry(key).value; }

    std::string string_or(const std::string& key, std::string fallback) const
    {
        return has(key) ? entry(key).value : std::move(fallback);
    }

    bool boolean(const std::string& key) const
    {
        const auto& e = entry(key);
        if (e.value == "true" || e.value == "yes" || e.value == "1")
            return true;
        if (e.value == "false" || e.value == "no" || e.value == "0")
            return false;
        throw ConfigError("'" + key + "' expects true/false, got '" + e.value + "'", e.line, key);
    }

    bool boolean_or(const std::string& key, bool fallback) const
    {
        return has(key) ? boolean(key) : fallback;
    }

    // Comma-separated numbers, each with an optional unit.
    std::vector<double> numbers(const std::string& key) const
    {
        const auto& e = entry(key);
        std::vector<double> out;
        std::string_view rest = e.value;
        while (!rest.empty()) {
            auto comma = rest.find(',');
            auto item = detail::trim(rest.substr(0, comma));
            if (item.empty())
                throw ConfigError("'" + key + "' has an empty list element", e.line, key);
            out.push_back(parse_number(item, e.line, key));
            if (comma == std::string_view::npos)
                break;
            rest = rest.substr(comma + 1);
        }
        if (out.empty())
            throw ConfigError("'" + key + "' expects a non-empty list", e.line, key);
        return out;
    }

    const std::vector<std::string>& keys() const { return order_; }

    struct SectionHeader {
        std::string name;
        int line;
    };
    const std::vector<SectionHeader>& sections() const { return sections_; }

    static double parse_number(std::string_view text, int line, const std::string& key)
    {
        text = detail::trim(text);
        std::size_t split = 0;
        while (split < text.size() && text[split] != ' ' && text[split] != '\t')
            ++split;
        auto num = text.substr(0, split);
        auto unit = detail::trim(text.substr(split));
        double value = 0.0;
        // std::from_chars for double is complete in libstdc++ 11.
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
        if (ec != std::errc{} || ptr != num.data() + num.size() || !std::isfinite(value))
            throw ConfigError("'" + key + "' expects a number, got '" + std::string(text) + "'", line, key);
        auto scale = detail::unit_scale(unit);
        if (!scale)
            throw ConfigError("'" + key + "' has unknown unit '" + std::string(unit) + "'", line, key);
        return value * *scale;
    }

private:
    std::map<std::string, KvEntry> entries_;
    std::vector<std::string> order_;
    std::vector<SectionHeader> sections_;
};

} // namespace shiftreg::io
