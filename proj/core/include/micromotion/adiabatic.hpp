#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "micromotion/floquet.hpp"

namespace micromotion {

/// Two quasienergy curves eps_+-(x) = mean +- sqrt((s (x - x*))^2 + (gap/2)^2)
/// near their closest approach.
struct AvoidedCrossing {
    double location = 0.0;          ///< x*
    double gap = 0.0;               ///< minimum separation
    double slope = 0.0;             ///< s, half the asymptotic slope difference
    double slope_difference = 0.0;  ///< 2 s, energy per unit of the swept parameter
    double angle = 0.0;             ///< alpha with tan(alpha / 2) = s [rad]
    int curve_a = -1, curve_b = -1;
    double fit_residual = 0.0;      ///< rms separation misfit / gap
    bool reliable = true;           ///< fit_residual <= 0.2
};

/// P = exp[-(pi/4) gap^2 / (rate tan(alpha / 2))], the two-level form with rate
/// the time derivative of the swept parameter. Throws UsageError for
/// alpha <= 0 or rate <= 0.
double landau_zener_angle(double gap, double alpha, double rate);

/// P = exp[-2 pi (gap/2)^2 / (|slope difference| |rate|)], the same law written
/// without the plot angle. Throws NumericalError for a zero slope difference.
double landau_zener(const AvoidedCrossing& crossing, double rate);

/// Local minima of the pairwise separation between curves (rows of `curves`
/// sampled at `x`) below `gap_threshold`, each fitted by a hyperbola through
/// its `half_window` neighbours on each side. With omega > 0 separations are
/// measured modulo omega.
std::vector<AvoidedCrossing> extract_avoided_crossings(const std::vector<double>& x,
                                                       const std::vector<std::vector<double>>& curves,
                                                       double gap_threshold, double omega = 0.0,
                                                       int half_window = 4);

/// One grid point of a ramp: time and parameter value.
struct RampPoint {
    double t = 0.0;
    double lambda = 0.0;
};

struct TransitionAmplitudes {
    /// c_{n,k} per eigenpair of the final Floquet spectrum (zero for the initial state).
    std::vector<std::complex<double>> c_floquet;
    std::vector<int> floquet_class;  ///< class index of each final eigenpair, -1 if unassigned
    /// c_n = sum_k c_{n,k} per class of the final spectrum, following its `classes`.
    std::vector<std::complex<double>> c_state;
    FloquetSpectrum final_spectrum;
    int initial_index = -1;          ///< eigenpair of the final spectrum the initial state ends in
    int gauge_flips = 0;             ///< eigenvector sign flips undone by continuity
    int reorderings = 0;             ///< steps where overlap tracking permuted eigenpairs
    double richardson_error = 0.0;   ///< max |g_h - g_2h| / max |g_h| of the couplings to the initial state
    std::vector<std::string> log;
};

/// Real symmetric Floquet matrix as a function of the swept parameter.
using FloquetMatrixFn = std::function<Eigen::MatrixXd(double)>;

/// First-order amplitudes out of the Floquet state whose (initial_state, k = 0)
/// component dominates at ramp.front():
///   c_{n,k} = -int dlambda <<u_{n,k}|d/dlambda|u_{0,0}>> exp(i int (eps_{n,k} - eps_{0,0}) dt).
/// Couplings come from central differences of continuity-tracked eigenvectors,
/// the phase is integrated exactly for piecewise linear quasienergies.
TransitionAmplitudes transition_amplitudes(const FloquetMatrixFn& floquet_matrix, const FloquetLayout& layout,
                                           double omega, const std::vector<RampPoint>& ramp, int initial_state);

/// Linear ramp from lambda0 to lambda1 at |rate| per unit time on `points` grid points.
std::vector<RampPoint> linear_ramp(double lambda0, double lambda1, double rate, int points);

struct GatePhaseSet {
    std::array<double, 4> theta{};        ///< ground-branch phases for spin states 00, 01, 10, 11
    std::array<double, 4> theta_excited{};
    double p_e = 0.0;

    std::array<double, 4> alpha() const;  ///< theta_excited - theta
};

struct GateFidelity {
    double fidelity = 1.0;      ///< sqrt(1 - p_e max V^T M V)
    double bound = 1.0;         ///< sqrt(1 - 3 p_e / 2)
    double max_vmv = 0.0;
    std::array<double, 4> maximizer{};
    bool used_inverse = false;  ///< (A^T M^-1 A)^-1 was feasible; otherwise simplex search
    std::vector<std::string> warnings;
};

/// M_kj = 1 - cos(alpha_k - alpha_j).
Eigen::Matrix4d gate_matrix(const std::array<double, 4>& alpha);

/// max V^T M V over the probability simplex by projected gradient ascent from
/// `restarts` random starts (plus the vertices and the centre) drawn from `seed`.
double simplex_max_vmv(const Eigen::Matrix4d& M, std::array<double, 4>* argmax = nullptr, int restarts = 100,
                       std::uint64_t seed = 12345);

/// Throws UsageError unless 0 <= p_e < 1; warns above p_e = 0.2.
GateFidelity gate_fidelity(const GatePhaseSet& phases, int restarts = 100, std::uint64_t seed = 12345);

}  // namespace micromotion
