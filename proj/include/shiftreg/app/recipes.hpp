#pragma once

// Bundled experiment definitions. Each is an ordinary config file; `shiftreg
// list-recipes --show <name>` prints one as a starting point for edits.

#include "shiftreg/error.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace shiftreg::app {

struct Recipe {
    std::string_view name;
    std::string_view summary;
    std::string_view text;
};

inline const std::vector<Recipe>& recipes()
{
    static const std::vector<Recipe> all = {
        {"trap_parameters", "central trap power, depth, frequencies and scanner resolution", R"(schema = 1

[experiment]
kind = trap_parameters
name = trap_parameters

[optics]
power = 275 mW
beam_radius = 450 um
wavelength = 805 nm
transmission = 0.85
waist = 3.8 um
)"},
        {"fig3cd", "heating and retention versus transport duration, calibrated mirror", R"(schema = 1

[experiment]
kind = transport_scan
name = fig3cd
durations = 0.5 ms, 1 ms, 2 ms, 3 ms, 5 ms
repetitions = 1

[control]
ramp_shape = minimum_jerk
mirror_ideal = false

[dynamics]
atoms = 4000
seed = 11
temperature = 15 uK
settle = 5 ms
)"},
        {"handover", "A1/A2 handover retention in both geometries plus the depth-factor sweep", R"(schema = 1

[experiment]
kind = handover
name = handover
directions = a1_to_a2, a2_to_a1
geometries = asymmetric, symmetric
depth_factors = 0.92, 0.85, 0.8, 0.77

[control]
handover_duration = 5 ms
crossfade_shape = linear

[dynamics]
atoms = 2000
seed = 21
temperature = 15 uK
settle = 2 ms
)"},
        {"register", "three symmetric shift cycles with occupancy images after each cycle", R"(schema = 1

[experiment]
kind = register
name = register
cycles = 3
load_rows = 5

[optics]
symmetric = true

[control]
transport_duration = 2 ms
handover_duration = 5 ms
return_duration = 5 ms
mirror_ideal = true

[dynamics]
atoms = 2000
seed = 31
temperature = 15 uK

[image]
pixels_per_site = 9
blur = 8 um
window = 11
)"},
        {"ramsey", "Ramsey dephasing of a 15 uK ensemble in the 815 nm coherence trap", R"(schema = 1

[experiment]
kind = ramsey
name = ramsey

[optics]
power = 150 mW
beam_radius = 520 um
wavelength = 815 nm

[dynamics]
atoms = 2000
seed = 41
temperature = 15 uK

[coherence]
pi_duration = 210 us
ramsey_gap_max = 20 ms
ramsey_gap_step = 0.25 ms
)"},
        {"fig5", "echo contrast at rest and after transport, calibrated heating, T2' ratio", R"(schema = 1

[experiment]
kind = echo
name = fig5
protocols = transport

[optics]
power = 150 mW
beam_radius = 520 um
wavelength = 815 nm
symmetric = true

[control]
transport_duration = 2 ms
mirror_ideal = true

[dynamics]
atoms = 1000
seed = 51
temperature = 15 uK

[coherence]
pi_duration = 210 us
calibrate_t2 = 74 ms
t_pi = 15 ms, 22.5 ms, 30 ms, 37.5 ms, 45 ms, 52.5 ms, 60 ms, 67.5 ms, 75 ms
)"},
        {"fig6", "T2' ratios for transport, handover round trip and full shift cycle", R"(schema = 1

[experiment]
kind = protocols
name = fig6
protocols = transport, handover_roundtrip, full_cycle

[optics]
power = 150 mW
beam_radius = 520 um
wavelength = 815 nm
symmetric = true

[control]
transport_duration = 2 ms
handover_duration = 5 ms
mirror_ideal = true

[dynamics]
atoms = 1000
seed = 61
temperature = 15 uK

[coherence]
pi_duration = 210 us
calibrate_t2 = 74 ms
t_pi = 15 ms, 22.5 ms, 30 ms, 37.5 ms, 45 ms, 52.5 ms, 60 ms, 67.5 ms, 75 ms
)"},
    };
    return all;
}

inline const Recipe* find_recipe(std::string_view name)
{
    for (const auto& r : recipes())
        if (r.name == name)
            return &r;
    return nullptr;
}

} // namespace shiftreg::app
