#include "micromotion/units.hpp"

#include <cmath>

#include "micromotion/error.hpp"

namespace micromotion {

using namespace constants;

std::vector<std::string> validate(const TrapConfig& cfg) {
    if (!(cfg.omega > 0.0)) throw ConfigError("omega must be positive");
    if (!(cfg.m_ion > 0.0) || !(cfg.m_atom > 0.0)) throw ConfigError("masses must be positive");
    if (cfg.polarizability_term < 0.0) throw ConfigError("polarizability term must be non-negative");
    if (!(cfg.short_range_phase > -pi && cfg.short_range_phase <= pi))
        throw ConfigError("short-range phase must lie in (-pi, pi]");

    const double w0 = secular_frequency(cfg);
    if (!(w0 > 0.0)) throw ConfigError("no secular confinement (a + q^2/2 = 0)");
    if (!(w0 < cfg.omega)) throw ConfigError("secular frequency must be below the drive frequency");

    std::vector<std::string> warnings;
    if (!(std::abs(cfg.q) < 1.0)) warnings.emplace_back("|q| >= 1: outside the usual stability regime");
    if (!(std::abs(cfg.a) < cfg.q * cfg.q)) warnings.emplace_back("|a| >= q^2: outside the typical |a| << q^2 regime");
    return warnings;
}

double secular_frequency(const TrapConfig& cfg) {
    const double radicand = cfg.a + 0.5 * cfg.q * cfg.q;
    if (radicand < 0.0) throw ConfigError("unstable trap: a + q^2/2 < 0");
    return 0.5 * cfg.omega * std::sqrt(radicand);
}

double gamma_factor(const TrapConfig& cfg) {
    if (cfg.q == 0.0) throw ConfigError("gamma factor undefined for q = 0");
    const double s = 1.0 + 2.0 * cfg.a / (cfg.q * cfg.q);
    if (!(s > 0.0)) throw ConfigError("gamma factor undefined for 1 + 2a/q^2 <= 0");
    return 1.0 / std::sqrt(2.0 * s);
}

double q_for_secular_frequency(double a, double omega, double omega0) {
    const double r = 2.0 * omega0 / omega;
    const double q2 = 2.0 * (r * r - a);
    if (q2 < 0.0) throw ConfigError("requested secular frequency needs q^2 < 0");
    return std::sqrt(q2);
}

double reduced_mass(const TrapConfig& cfg) { return cfg.m_ion * cfg.m_atom / (cfg.m_ion + cfg.m_atom); }

DerivedLengths derived_lengths(const TrapConfig& cfg) {
    const double w0 = secular_frequency(cfg);
    if (!(w0 > 0.0)) throw ConfigError("derived lengths need omega_0 > 0");
    const double mu = reduced_mass(cfg);
    DerivedLengths out;
    out.l_i = std::sqrt(hbar / (cfg.m_ion * w0));
    out.l_rel = std::sqrt(hbar / (mu * w0));
    out.R_i = std::sqrt(cfg.m_ion * cfg.polarizability_term) / hbar;
    out.R_rel = std::sqrt(mu * cfg.polarizability_term) / hbar;
    out.delta_d = elementary_charge * cfg.E_dc / (cfg.m_ion * w0 * w0);
    out.l_ac = elementary_charge * cfg.E_ac / (cfg.m_ion * cfg.omega * w0);
    return out;
}

double characteristic_distance(double R_over_l) { return 2.0 * std::cbrt(R_over_l); }

double characteristic_distance(const TrapConfig& cfg, MassConvention convention) {
    return characteristic_distance(dimensionless(cfg, convention).R);
}

double phase_from_scattering_length(double b, double R) {
    if (!(R > 0.0)) throw ConfigError("scattering length needs a positive interaction length");
    // cot(phi) = -b/R with sin(phi) > 0
    return std::atan2(1.0, -b / R);
}

double scattering_length_from_phase(double phase, double R) {
    return -R * std::cos(phase) / std::sin(phase);
}

void set_scattering_length(TrapConfig& cfg, double b, MassConvention convention) {
    const auto L = derived_lengths(cfg);
    const double R = convention == MassConvention::ion ? L.R_i : L.R_rel;
    cfg.short_range_phase = phase_from_scattering_length(b, R);
}

DimensionlessModel dimensionless(const TrapConfig& cfg, MassConvention convention) {
    const double w0 = secular_frequency(cfg);
    const auto L = derived_lengths(cfg);
    DimensionlessModel m;
    m.convention = convention;
    m.omega = cfg.omega / w0;
    m.gamma = gamma_factor(cfg);
    m.a = cfg.a;
    m.q = cfg.q;
    m.phase = cfg.short_range_phase;
    const double l = convention == MassConvention::ion ? L.l_i : L.l_rel;
    const double R = convention == MassConvention::ion ? L.R_i : L.R_rel;
    m.R = R / l;
    m.bohr = bohr_radius / l;
    m.delta_d = L.delta_d / l;
    m.l_ac = L.l_ac / l;
    return m;
}

TrapConfig ba_rb_preset() {
    TrapConfig cfg;
    cfg.a = 0.0;
    cfg.omega = 2.0 * pi * 1.27e6;
    cfg.q = q_for_secular_frequency(cfg.a, cfg.omega, 2.0 * pi * 100.0e3);
    cfg.m_ion = 134.9056886 * atomic_mass_unit - electron_mass;
    cfg.m_atom = 86.909180527 * atomic_mass_unit;
    const double R_i = 8927.0 * bohr_radius;
    cfg.polarizability_term = R_i * R_i * hbar * hbar / cfg.m_ion;
    cfg.short_range_phase = phase_from_scattering_length(0.9 * R_i, R_i);
    return cfg;
}

}  // namespace micromotion
