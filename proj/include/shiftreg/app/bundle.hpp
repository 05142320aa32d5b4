#pragma once

// Result bundles. A run's files are assembled in memory and written to a
// staging directory next to the target, which is renamed into place only
// once everything is on disk: a failed run leaves no partial bundle.
//
// manifest.tsv lists every deterministic file with its size and FNV-1a hash.
// provenance.txt (timestamp, runtime, worker count) is the only file allowed
// to differ between identical runs and is not hashed.

#include "shiftreg/error.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace shiftreg::app {

inline constexpr const char* manifest_name = "manifest.tsv";
inline constexpr const char* provenance_name = "provenance.txt";

inline std::uint64_t fnv1a(const std::string& data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Bundle {
    std::map<std::string, std::string> files; // relative name → contents, sorted for a stable manifest

    void add(const std::string& name, std::string contents) { files[name] = std::move(contents); }

    std::string manifest() const
    {
        std::ostringstream os;
        os << "# shiftreg-bundle 1\nfile\tbytes\tfnv1a64\n";
        for (const auto& [name, data] : files)
            os << name << '\t' << data.size() << '\t' << hex64(fnv1a(data)) << '\n';
        return os.str();
    }
};

struct ManifestEntry {
    std::string file;
    std::size_t bytes = 0;
    std::string hash;
};

inline std::vector<ManifestEntry> parse_manifest(const std::string& text)
{
    std::vector<ManifestEntry> out;
    std::istringstream is(text);
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty() || line[0] == '#' || line.rfind("file\t", 0) == 0)
            continue;
        std::istringstream ls(line);
        ManifestEntry e;
        if (!(std::getline(ls, e.file, '\t') && ls >> e.bytes >> e.hash))
            throw ConfigError("manifest: malformed entry", n);
        out.push_back(e);
    }
    return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& data)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot write '" + p.string() + "'");
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    os.close();
    if (!os)
        throw IoError("short write to '" + p.string() + "'");
}

} // namespace detail

// Replaces an existing bundle at `dir`. Any other non-empty directory there is
// left alone and reported, so a typo in --out cannot wipe unrelated files.
inline void commit_bundle(const Bundle& b, const std::string& provenance, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    const auto target = fs::absolute(dir);
    if (fs::exists(target, ec)) {
        if (!fs::is_directory(target) ||
            (!fs::is_empty(target) && !fs::exists(target / manifest_name)))
            throw IoError("refusing to overwrite '" + target.string() + "': not a result bundle");
    }
    const auto stage = target.parent_path() / ("." + target.filename().string() + ".partial");
    fs::remove_all(stage, ec);
    try {
        fs::create_directories(stage);
        for (const auto& [name, data] : b.files)
            detail::write_file(stage / name, data);
        detail::write_file(stage / manifest_name, b.manifest());
        detail::write_file(stage / provenance_name, provenance);
        if (fs::exists(target))
            fs::remove_all(target);
        fs::rename(stage, target);
    } catch (const fs::filesystem_error& e) {
        fs::remove_all(stage, ec);
        throw IoError(std::string("writing bundle failed: ") + e.what());
    } catch (...) {
        fs::remove_all(stage, ec);
        throw;
    }
}

} // namespace shiftreg::app
