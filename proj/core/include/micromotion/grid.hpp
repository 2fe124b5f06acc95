#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace micromotion {

/// Grid in x obtained from a uniform grid in s through a smooth map x = g(s).
///
/// Graded grids invert s = K x - R / x, which follows the local wavenumber
/// R / x^2 of the -R^2/(2x^4) well near the origin and the constant K far out.
/// Uniform grids use x = s / K.
struct RadialGrid {
    std::vector<double> s;
    std::vector<double> x;
    std::vector<double> jac;         ///< g'(s) = dx/ds
    std::vector<double> schwarzian;  ///< g'''/g' - 1.5 (g''/g')^2
    double h = 0.0;                  ///< spacing in s
    double K = 0.0;
    double R = 0.0;
    bool graded = false;

    std::size_t size() const noexcept { return x.size(); }
    double front() const { return x.front(); }
    double back() const { return x.back(); }

    /// Composite Simpson weights in s times g'(s): sum_i w_i f(x_i) ~ integral f dx.
    std::vector<double> weights() const;
};

/// Graded grid on [r_min, x_max]; `k_max` is the largest wavenumber to
/// resolve in the outer region and `points_per_wavelength` fixes h = 2 pi / N.
RadialGrid make_graded_grid(double r_min, double x_max, double R, double k_max, int points_per_wavelength);

/// Uniform grid on [x_lo, x_hi] with N points per wavelength at wavenumber k_max.
RadialGrid make_uniform_grid(double x_lo, double x_hi, double k_max, int points_per_wavelength);

/// Smallest number of grid points per local de Broglie wavelength over the
/// classically allowed region of `potential` at energy E.
template <class Potential>
double min_points_per_wavelength(const RadialGrid& grid, Potential&& potential, double E) {
    double worst = 1e300;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double kin = 2.0 * (E - potential(grid.x[i]));
        if (kin <= 0.0) continue;
        const double dx = grid.h * grid.jac[i];
        const double n = 2.0 * std::numbers::pi / (std::sqrt(kin) * dx);
        if (n < worst) worst = n;
    }
    return worst;
}

}  // namespace micromotion
