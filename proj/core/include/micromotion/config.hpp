#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "micromotion/units.hpp"

namespace micromotion {

/// Numerical knobs shared by the solvers and the CLI. Lengths are in
/// oscillator units, energies in hbar omega_0.
struct NumericsConfig {
    double x_max = 30.0;
    int points_per_wavelength = 160;
    double energy_min = -5000.0;
    double energy_max = 300.0;
    int max_states = 400;
    double r_min_target = 0.135;
    int n_basis = 0;  ///< N_e used for H0(d); 0 keeps every state in the window
    int n_floquet = 10;
    double dt_fraction = 1.0e-3;
    double d_min = 0.0;
    double d_max = 10.0;
    double d_step = 0.002;
    int coupling_n_max = 110;
    double dmm_threshold = 0.05;
    double resonance_tol = 1.0e-3;
    std::uint64_t seed = 20110601;
};

struct RunConfig {
    TrapConfig trap;
    NumericsConfig numerics;
    MassConvention convention = MassConvention::ion;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys throw
/// ConfigError. `preset = ba-rb` seeds the physics block before the other
/// keys are applied, independent of line order.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Canonical, ordered key/value listing of every field (used for output
/// metadata and cache keys).
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg);

}  // namespace micromotion
