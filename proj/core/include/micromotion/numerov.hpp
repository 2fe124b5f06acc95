#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "micromotion/config.hpp"
#include "micromotion/grid.hpp"
#include "micromotion/units.hpp"

namespace micromotion {

/// Node of the short-range form x sin(R/x + phi) selected as the hard wall.
struct RminChoice {
    double r_min = 0.0;
    int k = 0;  ///< r_min = R / (k pi - phi)
};

/// Picks the node x_k = R / (k pi - phase) closest to `target` among the nodes
/// inside (lower, upper). Throws ConfigError when that interval holds none.
RminChoice find_r_min(double phase, double R, double target, double lower, double upper);

/// V(x) = (x - center)^2 / 2 - R^2 / (2 x^4) + linear * x, oscillator units.
struct Potential {
    double R = 0.0;
    double center = 0.0;
    double linear = 0.0;

    double operator()(double x) const noexcept {
        const double y = x - center;
        double v = 0.5 * y * y + linear * x;
        if (R != 0.0) {
            const double x2 = x * x;
            v -= 0.5 * R * R / (x2 * x2);
        }
        return v;
    }
};

struct SolverOptions {
    double energy_min = -5000.0;
    double energy_max = 300.0;
    int max_states = 400;
    double relative_tolerance = 1e-13;
    bool keep_states = true;
};

struct BasisInfo {
    double r_min = 0.0;
    int r_min_k = 0;
    double x_lo = 0.0;
    double x_max = 0.0;
    int points_per_wavelength = 0;
    std::size_t grid_points = 0;
    double energy_min = 0.0;
    double energy_max = 0.0;
    bool full_line = false;
    double min_points_per_wavelength = 0.0;
};

/// Eigenpairs of H0(d=0) and the operator matrices the spectra need.
///
/// X, X2 are <n|x|m>, <n|x^2|m>; D is <n|d/dx|m> and A is <n|{x, d/dx}|m>,
/// both antisymmetric. States are grid samples psi_n(x_i) (columns); they may
/// be dropped (e.g. for a cached basis).
struct UnperturbedBasis {
    RadialGrid grid;
    Potential potential;
    BasisInfo info;
    std::vector<double> energies;
    std::vector<int> sturm_index;  ///< global quantum number of each state
    std::vector<int> nodes;
    Eigen::MatrixXd states;
    Eigen::MatrixXd X, X2, D, A;
    double orthonormality_residual = 0.0;  ///< max |<n|m> - delta| before symmetric orthonormalisation
    double tail_ratio = 0.0;               ///< worst max|psi| over the outer 2% of the grid, relative to max|psi|
    std::vector<std::string> warnings;

    int size() const noexcept { return int(energies.size()); }
};

/// Number of discrete (Numerov) eigenvalues strictly below E.
int count_below(const RadialGrid& grid, const Potential& v, double E);

/// All eigenpairs with energies in [energy_min, energy_max] on the given grid,
/// with Dirichlet walls at both ends.
UnperturbedBasis solve_on_grid(const RadialGrid& grid, const Potential& v, const SolverOptions& opts);

/// Builds the grid from the model (graded half-line when R > 0, uniform full
/// line otherwise) and solves at d = 0.
UnperturbedBasis solve_unperturbed(const DimensionlessModel& model, const NumericsConfig& num);

/// <n| x^power |m> by Simpson quadrature, symmetrised.
Eigen::MatrixXd matrix_elements(const RadialGrid& grid, const Eigen::MatrixXd& states, int power);

/// Keeps the first `n` states and their operator matrices.
UnperturbedBasis truncate(const UnperturbedBasis& basis, int n);

/// Closed-form harmonic-oscillator basis (no atom): E_n = n + 1/2 and ladder
/// matrices. Used for single-ion runs and as a reference.
UnperturbedBasis harmonic_basis(int n);

}  // namespace micromotion
