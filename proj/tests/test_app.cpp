#include "shiftreg/app/bundle.hpp"
#include "shiftreg/app/config.hpp"
#include "shiftreg/app/image.hpp"
#include "shiftreg/app/recipes.hpp"
#include "shiftreg/app/report.hpp"
#include "shiftreg/app/runner.hpp"
#include "shiftreg/app/schema.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace shiftreg;
using namespace shiftreg::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("shiftreg_app_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int line_of_error(const std::string& text)
{
    try {
        load_config_text(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

int cli(const std::string& args)
{
    const std::string cmd = std::string(SHIFTREG_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

dynamics::OccupancyGrid grid(int rows, int cols, double pitch)
{
    dynamics::OccupancyGrid g;
    g.rows = rows;
    g.cols = cols;
    g.pitch = pitch;
    g.origin_x = -(cols / 2) * pitch;
    g.origin_y = -(rows / 2) * pitch;
    g.counts.assign(static_cast<std::size_t>(rows) * cols, 0);
    return g;
}

int& cell(dynamics::OccupancyGrid& g, int r, int c) { return g.counts[static_cast<std::size_t>(r) * g.cols + c]; }

const char* small_transport = R"(schema = 1
[experiment]
kind = transport_scan
name = tiny
durations = 1 ms
[dynamics]
atoms = 24
seed = 5
settle = 0.5 ms
)";

} // namespace

TEST(Schema, ErrorsCarryTheLineNumber)
{
    EXPECT_EQ(line_of_error("schema = 1\n[experiment]\nkind = ramsey\n[optics]\ncolour = 3\n"), 5);
    EXPECT_EQ(line_of_error("schema = 1\n[experiment]\nkind = ramsey\n[nonsense]\n"), 4);
    EXPECT_EQ(line_of_error("schema = 2\n[experiment]\nkind = ramsey\n"), 1);
    EXPECT_EQ(line_of_error("schema = 1\n[experiment]\nkind = ramsey\n[control]\ntransport_duration = 2 um\n"), 5);
    EXPECT_EQ(line_of_error("schema = 1\n[experiment]\nkind = ramsey\n[dynamics]\natoms = many\n"), 5);
    EXPECT_EQ(line_of_error("schema = 1\n[experiment]\nkind = teleport\n"), 3);
    EXPECT_EQ(line_of_error("schema = 1\n[experiment]\nkind = transport_scan\n[control]\nramp_shape = cosine\n"), 5);
    EXPECT_THROW(load_config_text("[experiment]\nkind = ramsey\n"), ConfigError);
    EXPECT_THROW(load_config_text("schema = 1\n[species]\nfile = x.species\nname = Cs\n[experiment]\nkind = ramsey\n"),
                 ConfigError);
}

TEST(Schema, SemanticViolationsBecomeConfigErrors)
{
    EXPECT_THROW(load_config_text("schema = 1\n[experiment]\nkind = ramsey\n[dynamics]\ntemperature = -1 uK\n"),
                 ConfigError);
    EXPECT_THROW(load_config_text("schema = 1\n[experiment]\nkind = transport_scan\n"), ConfigError);
}

TEST(Config, EveryRecipeResolvesAndRoundTrips)
{
    for (const auto& r : recipes()) {
        const auto a = load_config_text(std::string(r.text));
        const auto text = write_resolved(a);
        const auto b = load_config_text(text);
        EXPECT_EQ(write_resolved(b), text) << r.name;
        EXPECT_EQ(to_string(a.kind), to_string(b.kind));
        EXPECT_EQ(a.ensemble.seed, b.ensemble.seed);
    }
    ASSERT_NE(find_recipe("fig5"), nullptr);
    EXPECT_EQ(find_recipe("nope"), nullptr);
}

TEST(Config, UnitsAreConverted)
{
    const auto c = load_config_text(
        "schema = 1\n[experiment]\nkind = transport_scan\ndurations = 500 us, 2 ms\n[optics]\npower = 0.3 W\n");
    ASSERT_EQ(c.experiment.durations.size(), 2u);
    EXPECT_DOUBLE_EQ(c.experiment.durations[0], 5e-4);
    EXPECT_DOUBLE_EQ(c.scene.a1.beam.total_power, 0.3);
    EXPECT_DOUBLE_EQ(c.scene.projection.measured_separation, 55e-6);
}

TEST(Image, BlurFreeRenderingPutsEachCountOnItsSite)
{
    auto g = grid(50, 50, 55e-6);
    cell(g, 25, 25) = 7;
    cell(g, 24, 27) = 3;
    cell(g, 0, 0) = 100; // outside the 11-site window
    const auto img = render_occupancy(g, {5, 0.0, 11});
    EXPECT_EQ(img.width, 55);
    EXPECT_DOUBLE_EQ(img.total(), 10.0);
    EXPECT_DOUBLE_EQ(img.peak(), 7.0);
    // The central site's pixel centre is at the site centre.
    const int px = 5 * 5 + 2;
    EXPECT_DOUBLE_EQ(img.at(px, px), 7.0);
    EXPECT_NEAR(img.origin_x + px * img.pixel_pitch, 0.0, 1e-18);
}

TEST(Image, EmptyFrameAndBlurConservation)
{
    auto g = grid(50, 50, 55e-6);
    const auto empty = render_occupancy(g, {5, 8e-6, 11});
    EXPECT_EQ(empty.total(), 0.0);
    EXPECT_EQ(empty.centroid().first, 0.0);
    cell(g, 25, 25) = 40;
    EXPECT_NEAR(render_occupancy(g, {9, 8e-6, 11}).total(), 40.0, 1e-9);
    cell(g, 25, 20) = 40; // window edge
    // Half a site (27.5 um) lies beyond the edge site's centre: at 30 um blur
    // about 18% of that site's counts fall outside the frame.
    const auto img = render_occupancy(g, {9, 30e-6, 11});
    EXPECT_LE(img.total(), 80.0 + 1e-9);
    EXPECT_LT(img.total(), 80.0 - 4.0);
    for (double p : img.pixels)
        EXPECT_GE(p, 0.0);
}

TEST(Image, CentroidStepsByOnePitchPerSite)
{
    for (double blur : {0.0, 8e-6}) {
        std::vector<double> xs;
        for (int col : {24, 25, 26}) {
            auto g = grid(50, 50, 55e-6);
            for (int r = 23; r <= 27; ++r)
                cell(g, r, col) = 10;
            xs.push_back(render_occupancy(g, {9, blur, 11}).centroid().first);
        }
        EXPECT_NEAR(xs[1] - xs[0], 55e-6, 1e-12) << blur;
        EXPECT_NEAR(xs[2] - xs[1], 55e-6, 1e-12) << blur;
        EXPECT_NEAR(xs[1], 0.0, 1e-12);
    }
}

TEST(Image, OccupancyGridRoundTripAndMalformedInput)
{
    auto g = grid(4, 3, 55e-6);
    cell(g, 1, 2) = 5;
    cell(g, 3, 0) = 1;
    std::stringstream ss;
    write_occupancy(ss, g);
    const auto r = read_occupancy(ss);
    EXPECT_EQ(r.counts, g.counts);
    EXPECT_EQ(r.origin_x, g.origin_x);
    EXPECT_EQ(r.pitch, g.pitch);
    std::istringstream bad("# shiftreg-occupancy 1\n# rows 2 cols 2 origin_x 0 origin_y 0 pitch 1\n1 2\n3\n");
    try {
        read_occupancy(bad);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 4);
    }
    std::istringstream pgm_in("P2\n");
    EXPECT_THROW(read_occupancy(pgm_in), ConfigError);
}

TEST(Image, PgmIsScaledAndClamped)
{
    auto g = grid(3, 3, 1.0);
    cell(g, 1, 1) = 4;
    const auto img = render_occupancy(g, {1, 0.0, 0});
    std::ostringstream os;
    write_pgm(os, img, 2.0);
    EXPECT_EQ(os.str(), "P2\n3 3\n255\n0 0 0\n0 255 0\n0 0 0\n");
}

TEST(Bundle, ReportVerifiesTheManifest)
{
    const auto dir = scratch("bundle") / "run";
    auto c = load_config_text(std::string(find_recipe("trap_parameters")->text));
    const auto result = run(c, dir, "test");
    EXPECT_TRUE(result.all_pass());
    auto rep = make_report(dir);
    EXPECT_EQ(rep.failures, 0);
    EXPECT_EQ(rep.checks, 5);
    EXPECT_NE(rep.text.find("5 of 5 checks pass"), std::string::npos);

    // Flip one byte: the damaged file is named.
    {
        auto text = slurp(dir / "summary.tsv");
        text[text.size() / 2] ^= 1;
        std::ofstream(dir / "summary.tsv", std::ios::binary) << text;
    }
    try {
        make_report(dir);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("summary.tsv"), std::string::npos);
    }
    fs::remove(dir / "checks.tsv");
    try {
        make_report(dir);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("checks.tsv"), std::string::npos);
    }
    EXPECT_THROW(make_report(dir / "absent"), IoError);
}

TEST(Bundle, RefusesToOverwriteForeignDirectories)
{
    const auto dir = scratch("foreign");
    std::ofstream(dir / "precious.txt") << "keep me";
    Bundle b;
    b.add("a.tsv", "x\n");
    EXPECT_THROW(commit_bundle(b, "tool = t\n", dir), IoError);
    EXPECT_TRUE(fs::exists(dir / "precious.txt"));
    const auto ok = scratch("fresh") / "out";
    commit_bundle(b, "tool = t\n", ok);
    EXPECT_TRUE(fs::exists(ok / manifest_name));
    commit_bundle(b, "tool = t\n", ok); // replacing a bundle is fine
    const auto entries = parse_manifest(slurp(ok / manifest_name));
    ASSERT_EQ(entries.size(), 1u);
    EXPECT_EQ(entries[0].hash, hex64(fnv1a("x\n")));
}

TEST(Cli, CorruptConfigExitsTwoWithoutOutput)
{
    const auto dir = scratch("cli_bad");
    std::ofstream(dir / "bad.ini") << "schema = 1\n[experiment]\nkind = ramsey\n[optics]\nwaist = purple\n";
    EXPECT_EQ(cli("run -c " + (dir / "bad.ini").string() + " -o " + (dir / "out").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "out"));
    EXPECT_EQ(cli("validate -c " + (dir / "bad.ini").string()), 2);
    EXPECT_EQ(cli("run -c " + (dir / "missing.ini").string() + " -o " + (dir / "out").string()), 2);
    EXPECT_EQ(cli("frobnicate"), 2);
}

TEST(Cli, RegisterBeyondCapacityExitsOne)
{
    const auto dir = scratch("cli_cap");
    std::ofstream(dir / "cap.ini") << "schema = 1\n[experiment]\nkind = register\ncycles = 6\n";
    EXPECT_EQ(cli("validate -c " + (dir / "cap.ini").string()), 1);
    EXPECT_EQ(cli("run -c " + (dir / "cap.ini").string() + " -o " + (dir / "out").string()), 1);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, RunsAreByteIdenticalAcrossThreadCounts)
{
    const auto dir = scratch("cli_det");
    std::ofstream(dir / "tiny.ini") << small_transport;
    ASSERT_EQ(cli("run -c " + (dir / "tiny.ini").string() + " -j 1 -o " + (dir / "a").string()), 0);
    ASSERT_EQ(cli("run -c " + (dir / "tiny.ini").string() + " -j 3 -o " + (dir / "b").string()), 0);
    const auto ma = slurp(dir / "a" / manifest_name);
    EXPECT_EQ(ma, slurp(dir / "b" / manifest_name));
    for (const auto& e : parse_manifest(ma))
        EXPECT_EQ(slurp(dir / "a" / e.file), slurp(dir / "b" / e.file)) << e.file;
    EXPECT_EQ(cli("report " + (dir / "a").string()), 0);
    EXPECT_EQ(cli("list-recipes"), 0);
    EXPECT_EQ(cli("list-recipes --show fig6"), 0);
    EXPECT_EQ(cli("validate -c fig6"), 0);
}
