// shiftreg: run, validate and report atomic shift-register experiments.
//
// Exit codes: 0 success, 1 physics or validation failure (including failed
// checks in `report`), 2 I/O or configuration error.

#include "shiftreg/app/config.hpp"
#include "shiftreg/app/recipes.hpp"
#include "shiftreg/app/report.hpp"
#include "shiftreg/app/runner.hpp"
#include "shiftreg/dynamics/scene.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace shiftreg;

struct Loaded {
    app::ExperimentConfig config;
    std::string source;
};

// A path that exists wins over a recipe of the same name.
Loaded load(const std::string& what)
{
    if (std::filesystem::exists(what))
        return {app::load_config_file(what), what};
    if (const auto* r = app::find_recipe(what)) {
        try {
            return {app::load_config_text(std::string(r->text)), "recipe:" + std::string(r->name)};
        } catch (const ConfigError& e) {
            throw ConfigError("recipe " + std::string(r->name) + ": " + e.what());
        }
    }
    throw IoError("'" + what + "' is neither a config file nor a bundled recipe (see list-recipes)");
}

// Checks that need the optics evaluated, e.g. whether the register fits.
void validate_physics(const app::ExperimentConfig& c)
{
    if (c.kind != app::ExperimentKind::register_shift)
        return;
    const dynamics::Scene scene(c.scene);
    if (c.experiment.cycles > scene.capacity())
        throw CapacityError("experiment.cycles = " + std::to_string(c.experiment.cycles) +
                            " exceeds the register capacity of " + std::to_string(scene.capacity()) +
                            " cycles for this beam");
}

int guarded(const std::function<int()>& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const PhysicsError& e) {
        std::cerr << "physics error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"Atomic shift-register simulator"};
    cli.set_version_flag("--version", std::string(app::version));
    cli.require_subcommand(1);

    std::string config;
    std::optional<long> seed;
    std::optional<unsigned> threads;
    std::string out;

    auto* run = cli.add_subcommand("run", "run an experiment and write a result bundle");
    run->add_option("-c,--config", config, "config file or bundled recipe name")->required();
    run->add_option("--seed", seed, "override dynamics.seed")->check(CLI::NonNegativeNumber);
    run->add_option("-o,--out", out, "bundle directory (default: output.directory)");
    run->add_option("-j,--threads", threads, "worker threads for the propagation")->check(CLI::PositiveNumber);

    bool print = false;
    auto* validate = cli.add_subcommand("validate", "check a config without running it");
    validate->add_option("-c,--config", config, "config file or bundled recipe name")->required();
    validate->add_flag("--print", print, "print the resolved config");

    std::string dir;
    auto* report = cli.add_subcommand("report", "summarize a result bundle");
    report->add_option("dir", dir, "bundle directory");
    report->add_option("-o,--out", dir, "bundle directory (same as the positional argument)");

    std::string show;
    auto* list = cli.add_subcommand("list-recipes", "list the bundled experiment recipes");
    list->add_option("--show", show, "print the config text of one recipe");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run)
        return guarded([&] {
            auto [c, source] = load(config);
            if (seed)
                c.ensemble.seed = static_cast<std::uint64_t>(*seed);
            if (threads)
                c.integrator.threads = *threads;
            // -o picks the destination only; the bundled config stays as
            // written so that bundles do not depend on where they land.
            const std::string dest = out.empty() ? c.output_directory : out;
            validate_physics(c);
            const auto r = app::run(c, dest, source);
            int failed = 0;
            for (const auto& ch : r.checks)
                failed += ch.pass ? 0 : 1;
            std::cout << "wrote " << dest << " (" << r.bundle.files.size() + 2 << " files, "
                      << r.checks.size() - failed << " of " << r.checks.size() << " checks pass)\n";
            return 0;
        });
    if (*validate)
        return guarded([&] {
            const auto [c, source] = load(config);
            validate_physics(c);
            if (print)
                std::cout << app::write_resolved(c);
            else
                std::cout << "ok: " << source << " (" << app::to_string(c.kind) << ")\n";
            return 0;
        });
    if (*report)
        return guarded([&] {
            if (dir.empty())
                throw IoError("report needs a bundle directory");
            const auto r = app::make_report(dir);
            std::cout << r.text;
            return r.failures == 0 ? 0 : 1;
        });
    if (*list)
        return guarded([&] {
            if (!show.empty()) {
                const auto* r = app::find_recipe(show);
                if (!r)
                    throw IoError("no recipe named '" + show + "'");
                std::cout << r->text;
                return 0;
            }
            for (const auto& r : app::recipes())
                std::cout << r.name << std::string(r.name.size() < 18 ? 18 - r.name.size() : 1, ' ') << r.summary
                          << "\n";
            return 0;
        });
    return 2;
}
