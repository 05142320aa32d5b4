#pragma once

// Human-readable summary of a result bundle. The bundle is checked against
// its manifest first; missing or altered files are listed explicitly. Only
// deterministic files are read, so the report of a rerun is byte-identical.

#include "shiftreg/app/bundle.hpp"
#include "shiftreg/app/config.hpp"
#include "shiftreg/error.hpp"
#include "shiftreg/io/keyvalue.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace shiftreg::app {

struct Report {
    std::string text;
    int checks = 0;
    int failures = 0;
};

namespace detail {

inline std::vector<std::vector<std::string>> read_tsv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            auto tab = line.find('\t', pos);
            cells.push_back(line.substr(pos, tab - pos));
            if (tab == std::string::npos)
                break;
            pos = tab + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline void print_aligned(std::ostream& os, const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (width.size() <= i)
                width.push_back(0);
            width[i] = std::max(width[i], r[i].size());
        }
    for (const auto& r : rows) {
        os << "  ";
        for (std::size_t i = 0; i < r.size(); ++i) {
            os << r[i];
            if (i + 1 < r.size())
                os << std::string(width[i] - r[i].size() + 2, ' ');
        }
        os << "\n";
    }
}

inline const char* main_table(const std::string& kind)
{
    if (kind == "transport_scan")
        return "transport_scan.tsv";
    if (kind == "handover")
        return "handover.tsv";
    if (kind == "register")
        return "frames.tsv";
    if (kind == "echo" || kind == "protocols")
        return "fits.tsv";
    return nullptr;
}

} // namespace detail

inline Report make_report(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    static const char* required[] = {manifest_name, provenance_name, "config.resolved.ini", "summary.tsv",
                                     "checks.tsv"};
    if (!fs::is_directory(dir)) {
        std::string msg = "'" + dir.string() + "' is not a result directory; expected files:";
        for (auto* f : required)
            msg += std::string("\n  ") + f;
        throw IoError(msg);
    }
    {
        std::string missing;
        for (auto* f : required)
            if (!fs::exists(dir / f))
                missing += std::string("\n  ") + f;
        if (!missing.empty())
            throw IoError("incomplete bundle '" + dir.string() + "', missing:" + missing);
    }
    const auto entries = parse_manifest(read_text_file(dir / manifest_name));
    {
        std::string bad;
        for (const auto& e : entries) {
            if (!fs::exists(dir / e.file)) {
                bad += "\n  " + e.file + " (missing)";
                continue;
            }
            const auto data = read_text_file(dir / e.file);
            if (data.size() != e.bytes || hex64(fnv1a(data)) != e.hash)
                bad += "\n  " + e.file + " (does not match manifest)";
        }
        if (!bad.empty())
            throw IoError("bundle '" + dir.string() + "' is damaged:" + bad);
    }

    const auto cfg = io::KvDocument::parse(read_text_file(dir / "config.resolved.ini"));
    const auto prov = io::KvDocument::parse(read_text_file(dir / provenance_name));
    const auto kind = cfg.string_or("experiment.kind", "?");

    Report rep;
    std::ostringstream os;
    os << "experiment " << cfg.string_or("experiment.name", "?") << " (" << kind << ")\n";
    os << "tool " << prov.string_or("tool", "?") << ", seed " << cfg.string_or("dynamics.seed", "?") << ", atoms "
       << cfg.string_or("dynamics.atoms", "?") << "\n\n";

    os << "results\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : detail::read_tsv(read_text_file(dir / "summary.tsv"))) {
        if (r.size() != 4 || r[0] == "metric")
            continue;
        std::string value = r[1];
        if (r[2] != "0" && r[2] != "nan")
            value += " ± " + r[2];
        rows.push_back({r[0], value, r[3] == "-" ? "" : r[3]});
    }
    detail::print_aligned(os, rows);

    if (const char* table = detail::main_table(kind); table && fs::exists(dir / table)) {
        os << "\n" << table << "\n";
        detail::print_aligned(os, detail::read_tsv(read_text_file(dir / table)));
    }

    os << "\nchecks\n";
    rows.clear();
    for (const auto& r : detail::read_tsv(read_text_file(dir / "checks.tsv"))) {
        if (r.size() != 4 || r[0] == "check")
            continue;
        ++rep.checks;
        if (r[1] != "PASS")
            ++rep.failures;
        rows.push_back({r[1], r[0], r[2], "(" + r[3] + ")"});
    }
    detail::print_aligned(os, rows);
    os << "\n" << rep.checks - rep.failures << " of " << rep.checks << " checks pass\n";
    rep.text = os.str();
    return rep;
}

} // namespace shiftreg::app
