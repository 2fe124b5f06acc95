#pragma once

#include <numbers>
#include <string>
#include <vector>

namespace micromotion {

namespace constants {
inline constexpr double pi = std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;               // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double bohr_radius = 5.29177210903e-11;      // m
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double electron_mass = 9.1093837015e-31;     // kg
inline constexpr double hartree = 4.3597447222071e-18;        // J
}  // namespace constants

/// Which mass sets the oscillator and interaction lengths. The fixed-atom
/// model uses the ion mass; the relative coordinate of the mobile-atom model
/// uses the reduced mass.
enum class MassConvention { ion, reduced };

/// Physical description of one atom-ion setup in SI units.
///
/// The short-range boundary is stored only as the phase phi_s; use
/// `set_scattering_length` to enter it as an s-wave scattering length.
struct TrapConfig {
    double a = 0.0;                    ///< Mathieu a parameter
    double q = 0.0;                    ///< Mathieu q parameter
    double omega = 0.0;                ///< rf drive angular frequency [rad/s]
    double m_ion = 0.0;                ///< [kg]
    double m_atom = 0.0;               ///< [kg]
    double polarizability_term = 0.0;  ///< C4 in V(r) = -C4 / (2 r^4) [J m^4]; 0 disables the atom
    double E_dc = 0.0;                 ///< static stray field [V/m]
    double E_ac = 0.0;                 ///< in-phase ac field amplitude [V/m]
    double short_range_phase = 0.0;    ///< phi_s [rad], in (-pi, pi]

    bool interaction_on() const noexcept { return polarizability_term > 0.0; }
};

/// Checks hard invariants (throws ConfigError) and returns soft warnings,
/// e.g. leaving the |q| << 1, |a| << q^2 regime.
std::vector<std::string> validate(const TrapConfig& cfg);

/// omega_0 = (omega/2) sqrt(a + q^2/2). Zero confinement returns 0; a
/// negative radicand throws ConfigError (unstable trap).
double secular_frequency(const TrapConfig& cfg);

/// gamma = 1 / sqrt(2 (1 + 2a/q^2)).
double gamma_factor(const TrapConfig& cfg);

/// Inverse of `secular_frequency` for given a and drive: the q that yields omega0.
double q_for_secular_frequency(double a, double omega, double omega0);

struct DerivedLengths {
    double l_i = 0.0;      ///< sqrt(hbar / (m_i omega_0))
    double R_i = 0.0;      ///< sqrt(m_i C4) / hbar
    double l_rel = 0.0;    ///< oscillator length with the reduced mass
    double R_rel = 0.0;    ///< interaction length with the reduced mass (R*)
    double l_ac = 0.0;     ///< e E_ac / (m_i omega omega_0)
    double delta_d = 0.0;  ///< e E_dc / (m_i omega_0^2)
};

/// All lengths in metres.
DerivedLengths derived_lengths(const TrapConfig& cfg);

/// d_c = 2 R^{1/3} l^{2/3}; both argument and result in oscillator lengths.
double characteristic_distance(double R_over_l);
double characteristic_distance(const TrapConfig& cfg, MassConvention convention = MassConvention::ion);

double reduced_mass(const TrapConfig& cfg);

/// cot(phi_s) = -b / R, branch chosen with sin(phi_s) > 0.
double phase_from_scattering_length(double b, double R);
double scattering_length_from_phase(double phase, double R);

/// Sets `short_range_phase` from a scattering length b [m], using the
/// interaction length of the given convention.
void set_scattering_length(TrapConfig& cfg, double b, MassConvention convention = MassConvention::ion);

/// Model in oscillator units: lengths / l, energies / (hbar omega_0),
/// time tau = omega_0 t.
struct DimensionlessModel {
    double omega = 0.0;        ///< drive frequency omega / omega_0
    double R = 0.0;            ///< interaction length R / l (0: no atom)
    double gamma = 0.0;
    double delta_d = 0.0;      ///< dc shift / l
    double l_ac = 0.0;         ///< ac length / l
    double phase = 0.0;        ///< phi_s
    double a = 0.0;
    double q = 0.0;
    double bohr = 0.0;         ///< a0 / l
    MassConvention convention = MassConvention::ion;
};

DimensionlessModel dimensionless(const TrapConfig& cfg, MassConvention convention = MassConvention::ion);

/// 135Ba+ / 87Rb with omega_0 = 2 pi x 100 kHz, omega = 2 pi x 1.27 MHz, a = 0,
/// R_i = 8927 a0 and b = 0.9 R_i.
TrapConfig ba_rb_preset();

}  // namespace micromotion
