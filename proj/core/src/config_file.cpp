#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>

#include "micromotion/config.hpp"
#include "micromotion/error.hpp"

namespace micromotion {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (!v.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last || !std::isfinite(out))
        throw ConfigError("config key '" + key + "': not a finite number: '" + v + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ConfigError("config key '" + key + "' given twice");
        kv[key] = value;
    }

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto take_d = [&](const std::string& key) -> std::optional<double> {
        auto v = take(key);
        if (!v) return std::nullopt;
        return to_double(key, *v);
    };

    RunConfig cfg;
    TrapConfig& t = cfg.trap;
    if (auto p = take("preset")) {
        if (*p != "ba-rb") throw ConfigError("unknown preset '" + *p + "'");
        t = ba_rb_preset();
    }
    if (auto v = take("mass_convention")) {
        if (*v == "ion") cfg.convention = MassConvention::ion;
        else if (*v == "reduced") cfg.convention = MassConvention::reduced;
        else throw ConfigError("mass_convention must be 'ion' or 'reduced'");
    }

    using namespace constants;
    if (auto v = take_d("drive_frequency_hz")) t.omega = 2.0 * pi * *v;
    if (auto v = take_d("ion_mass_u")) t.m_ion = *v * atomic_mass_unit;
    if (auto v = take_d("atom_mass_u")) t.m_atom = *v * atomic_mass_unit;
    if (auto v = take_d("a")) t.a = *v;
    auto q = take_d("q");
    auto f0 = take_d("secular_frequency_hz");
    if (q && f0) throw ConfigError("give either q or secular_frequency_hz, not both");
    if (q) t.q = *q;
    if (f0) t.q = q_for_secular_frequency(t.a, t.omega, 2.0 * pi * *f0);

    auto c4 = take_d("polarizability_term");
    auto alpha = take_d("polarizability_au");
    auto r_len = take_d("interaction_length_bohr");
    if (int(bool(c4)) + int(bool(alpha)) + int(bool(r_len)) > 1)
        throw ConfigError("give only one of polarizability_term, polarizability_au, interaction_length_bohr");
    if (c4) t.polarizability_term = *c4;
    if (alpha) t.polarizability_term = *alpha * hartree * std::pow(bohr_radius, 4);
    if (r_len) {
        if (!(t.m_ion > 0.0)) throw ConfigError("interaction_length_bohr needs ion_mass_u");
        const double R = *r_len * bohr_radius;
        t.polarizability_term = R * R * hbar * hbar / t.m_ion;
    }
    if (auto v = take_d("E_dc")) t.E_dc = *v;
    if (auto v = take_d("E_ac")) t.E_ac = *v;

    auto phase = take_d("short_range_phase");
    auto b_bohr = take_d("scattering_length_bohr");
    auto b_ratio = take_d("scattering_length_ratio");
    if (int(bool(phase)) + int(bool(b_bohr)) + int(bool(b_ratio)) > 1)
        throw ConfigError("give only one of short_range_phase, scattering_length_bohr, scattering_length_ratio");
    if (phase) t.short_range_phase = *phase;
    if (b_bohr) set_scattering_length(t, *b_bohr * bohr_radius, cfg.convention);
    if (b_ratio) t.short_range_phase = phase_from_scattering_length(*b_ratio, 1.0);

    NumericsConfig& n = cfg.numerics;
    if (auto v = take_d("x_max")) n.x_max = *v;
    if (auto v = take("points_per_wavelength")) n.points_per_wavelength = int(to_int("points_per_wavelength", *v));
    if (auto v = take_d("energy_min")) n.energy_min = *v;
    if (auto v = take_d("energy_max")) n.energy_max = *v;
    if (auto v = take("max_states")) n.max_states = int(to_int("max_states", *v));
    if (auto v = take_d("r_min_target")) n.r_min_target = *v;
    if (auto v = take("n_basis")) n.n_basis = int(to_int("n_basis", *v));
    if (auto v = take("n_floquet")) n.n_floquet = int(to_int("n_floquet", *v));
    if (auto v = take_d("dt_fraction")) n.dt_fraction = *v;
    if (auto v = take_d("d_min")) n.d_min = *v;
    if (auto v = take_d("d_max")) n.d_max = *v;
    if (auto v = take_d("d_step")) n.d_step = *v;
    if (auto v = take("coupling_n_max")) n.coupling_n_max = int(to_int("coupling_n_max", *v));
    if (auto v = take_d("dmm_threshold")) n.dmm_threshold = *v;
    if (auto v = take_d("resonance_tol")) n.resonance_tol = *v;
    if (auto v = take("seed")) n.seed = std::uint64_t(to_int("seed", *v));

    if (!kv.empty()) throw ConfigError("unknown config key '" + kv.begin()->first + "'");

    if (n.x_max <= 0.0 || n.points_per_wavelength < 10 || n.energy_max <= n.energy_min || n.max_states <= 0 ||
        n.n_floquet < 0 || n.dt_fraction <= 0.0 || n.dt_fraction > 1.0 || n.d_step <= 0.0 || n.d_max < n.d_min ||
        n.n_basis < 0)
        throw ConfigError("invalid numerics block");
    validate(t);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg) {
    const TrapConfig& t = cfg.trap;
    const NumericsConfig& n = cfg.numerics;
    return {
        {"a", fmt(t.a)},
        {"q", fmt(t.q)},
        {"omega_rad_s", fmt(t.omega)},
        {"m_ion_kg", fmt(t.m_ion)},
        {"m_atom_kg", fmt(t.m_atom)},
        {"polarizability_term", fmt(t.polarizability_term)},
        {"E_dc", fmt(t.E_dc)},
        {"E_ac", fmt(t.E_ac)},
        {"short_range_phase", fmt(t.short_range_phase)},
        {"mass_convention", cfg.convention == MassConvention::ion ? "ion" : "reduced"},
        {"x_max", fmt(n.x_max)},
        {"points_per_wavelength", std::to_string(n.points_per_wavelength)},
        {"energy_min", fmt(n.energy_min)},
        {"energy_max", fmt(n.energy_max)},
        {"max_states", std::to_string(n.max_states)},
        {"r_min_target", fmt(n.r_min_target)},
        {"n_basis", std::to_string(n.n_basis)},
        {"n_floquet", std::to_string(n.n_floquet)},
        {"dt_fraction", fmt(n.dt_fraction)},
        {"d_min", fmt(n.d_min)},
        {"d_max", fmt(n.d_max)},
        {"d_step", fmt(n.d_step)},
        {"coupling_n_max", std::to_string(n.coupling_n_max)},
        {"dmm_threshold", fmt(n.dmm_threshold)},
        {"resonance_tol", fmt(n.resonance_tol)},
        {"seed", std::to_string(n.seed)},
    };
}

}  // namespace micromotion
