#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "micromotion/numerov.hpp"
#include "micromotion/units.hpp"

namespace micromotion {

/// Position of |n> e^{i k omega t} in the truncated Floquet basis: n runs
/// through all states before k changes, k = -n_f..n_f.
struct FloquetLayout {
    int n_states = 0;
    int n_f = 0;

    int modes() const noexcept { return 2 * n_f + 1; }
    int size() const noexcept { return n_states * modes(); }
    int index(int n, int k) const noexcept { return n + n_states * (k + n_f); }
    std::pair<int, int> split(int i) const noexcept { return {i % n_states, i / n_states - n_f}; }
};

/// Real symmetric Floquet matrix for H(t) = H0 + sum_j (B_j e^{i j omega t} + h.c.)
/// with real blocks: diagonal blocks H0 + k omega, block (k, k+1) = first,
/// block (k, k+2) = second, lower blocks transposed. Either coupling may be
/// empty. Throws UsageError when H0 is not symmetric to 1e-12.
Eigen::MatrixXd build_floquet_matrix(const Eigen::MatrixXd& H0, const Eigen::MatrixXd& first,
                                     const Eigen::MatrixXd& second, double omega, int n_f);

/// H(t) = H0 + V cos(omega t): first = V / 2.
Eigen::MatrixXd cosine_floquet_matrix(const Eigen::MatrixXd& H0, const Eigen::MatrixXd& V, double omega, int n_f);

/// Matrices of the atom-ion drive H(t) = H0 + V1 cos(2 omega t) + V2 sin(omega t)
/// in the d = 0 basis (oscillator units). V2 is imaginary; iV2 holds the real
/// matrix i V2, built from V1 and the d = 0 energies:
/// (iV2)_nm = (E_m(0) - E_n(0)) (V1)_nm / gamma.
struct AtomIonDrive {
    double d = 0.0;
    Eigen::MatrixXd H0, V1, iV2;
};

AtomIonDrive atom_ion_drive(const UnperturbedBasis& basis, const DimensionlessModel& model, double d);

/// Floquet matrix of the atom-ion drive: block (k, k+1) = iV2 / 2, block
/// (k, k+2) = V1 / 2. `include_v2 = false` keeps only the cos(2 omega t) term.
Eigen::MatrixXd atom_ion_floquet_matrix(const AtomIonDrive& drive, double omega, int n_f, bool include_v2 = true);

/// e mapped into [center - omega/2, center + omega/2).
double reduce_to_zone(double e, double omega, double center = 0.0);

/// Index of the value in `values` closest to e modulo omega.
std::size_t nearest_in_zone(const std::vector<double>& values, double e, double omega);

/// |a - b| modulo omega, in [0, omega/2].
double zone_distance(double a, double b, double omega);

struct FloquetState {
    double quasienergy = 0.0;  ///< reduced to the zone
    double raw = 0.0;          ///< eigenvalue of the truncated matrix
    int dominant_n = 0;
    int dominant_k = 0;
    double k0_weight = 0.0;    ///< weight in the k = 0 block
    double edge_weight = 0.0;  ///< weight in the outermost blocks k = +-n_f
};

/// Eigenpairs of a truncated Floquet matrix with zone reduction.
///
/// `classes` lists one eigenpair per physical state: members of a class
/// differ by a shift of whole blocks, and the member with the largest k = 0
/// weight represents it. Representatives are sorted by quasienergy.
struct FloquetSpectrum {
    FloquetLayout layout;
    double omega = 0.0;
    double zone_center = 0.0;
    std::vector<FloquetState> states;  ///< ascending raw eigenvalue
    Eigen::MatrixXd vectors;           ///< columns follow `states` (empty if not requested)
    std::vector<int> classes;

    /// Quasienergies of the class representatives, ascending.
    std::vector<double> class_quasienergies() const;
    /// Largest edge weight over the class representatives.
    double truncation_residual() const;
};

/// `want_vectors = false` skips the eigenvectors; `classes` then stays empty
/// and only quasienergies are filled in.
FloquetSpectrum diagonalize_floquet(const Eigen::MatrixXd& F, const FloquetLayout& layout, double omega,
                                    double zone_center = 0.0, bool want_vectors = true);

/// Position in `classes` of the class each eigenpair belongs to (its block
/// shifted overlap with the representative exceeds 1/2), or -1.
std::vector<int> assign_classes(const FloquetSpectrum& spec);

/// Second-order Rayleigh-Schroedinger results for H0 + V cos(omega t).
struct RsPerturbation {
    Eigen::VectorXd e1;  ///< zero
    Eigen::VectorXd e2;  ///< sum_m |V_mn|^2 dE_nm / (2 (dE_nm^2 - omega^2))
    /// u1 = e^{ik omega t} sum_m |m> (cos_amp(m, n) cos(omega t) + i sin_amp(m, n) sin(omega t))
    Eigen::MatrixXd cos_amp, sin_amp;
    double worst_ratio = 0.0;  ///< max |V_mn|^2 / |dE_nm^2 - omega^2|
    int worst_n = -1, worst_m = -1;
    std::vector<std::string> warnings;
};

/// `energies` are the eigenvalues of H0 and V is given in its eigenbasis.
/// A validity ratio above `warn_ratio` adds a near-resonance warning.
RsPerturbation rs_perturbation(const Eigen::VectorXd& energies, const Eigen::MatrixXd& V, double omega,
                               double warn_ratio = 0.1);

/// 2x2 block [[e1, c], [c, e2]] of an almost-degenerate pair.
struct TwoLevelResult {
    double lower = 0.0, upper = 0.0;
    Eigen::Matrix2d vectors;  ///< columns: lower, upper
};
TwoLevelResult two_level_submatrix(double e1, double e2, double coupling);

/// Two-level model H0 = (omega_0/2) sigma_z, V = eta sigma_x driven by
/// V cos(omega t), in units of the drive frequency omega.
struct TwoLevelModel {
    double omega0 = 1.0;
    double eta = 0.02;
    double omega = 1.0;

    Eigen::Matrix2d H0() const;
    Eigen::Matrix2d V() const;
};

/// Class quasienergies (two values, ascending) of the two-level model.
std::vector<double> two_level_quasienergies(const TwoLevelModel& m, int n_f, double zone_center = 0.0);

/// The off-resonance result +-(omega_0/2)(1 + eta^2 / (omega_0^2 - omega^2)).
double two_level_off_resonance(const TwoLevelModel& m, int level);

}  // namespace micromotion
