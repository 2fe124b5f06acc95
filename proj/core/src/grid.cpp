#include "micromotion/grid.hpp"

#include "micromotion/error.hpp"

namespace micromotion {

namespace {

std::size_t even_intervals(double span, double h0) {
    auto n = static_cast<std::size_t>(std::ceil(span / h0));
    if (n < 2) n = 2;
    if (n % 2) ++n;
    return n;
}

}  // namespace

std::vector<double> RadialGrid::weights() const {
    const std::size_t n = size();
    if (n < 3 || n % 2 == 0) throw UsageError("Simpson weights need an odd number of points");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        w[i] = c * h / 3.0 * jac[i];
    }
    return w;
}

RadialGrid make_graded_grid(double r_min, double x_max, double R, double k_max, int points_per_wavelength) {
    if (!(r_min > 0.0) || !(x_max > r_min)) throw UsageError("graded grid needs 0 < r_min < x_max");
    if (!(R > 0.0) || !(k_max > 0.0) || points_per_wavelength < 4) throw UsageError("invalid graded grid parameters");
    RadialGrid g;
    g.graded = true;
    g.K = k_max;
    g.R = R;
    const double s0 = k_max * r_min - R / r_min;
    const double s1 = k_max * x_max - R / x_max;
    const std::size_t n = even_intervals(s1 - s0, 2.0 * std::numbers::pi / points_per_wavelength);
    g.h = (s1 - s0) / double(n);
    g.s.resize(n + 1);
    g.x.resize(n + 1);
    g.jac.resize(n + 1);
    g.schwarzian.resize(n + 1);
    const double KR4 = 4.0 * k_max * R;
    for (std::size_t i = 0; i <= n; ++i) {
        const double s = s0 + g.h * double(i);
        const double D = std::sqrt(s * s + KR4);
        const double x = s >= 0.0 ? (s + D) / (2.0 * k_max) : 2.0 * R / (D - s);
        g.s[i] = s;
        g.x[i] = x;
        g.jac[i] = x / D;
        g.schwarzian[i] = -1.5 * KR4 / (D * D * D * D);
    }
    g.x.front() = r_min;
    g.x.back() = x_max;
    return g;
}

RadialGrid make_uniform_grid(double x_lo, double x_hi, double k_max, int points_per_wavelength) {
    if (!(x_hi > x_lo) || !(k_max > 0.0) || points_per_wavelength < 4) throw UsageError("invalid uniform grid parameters");
    RadialGrid g;
    g.K = k_max;
    const std::size_t n = even_intervals(k_max * (x_hi - x_lo), 2.0 * std::numbers::pi / points_per_wavelength);
    g.h = k_max * (x_hi - x_lo) / double(n);
    g.s.resize(n + 1);
    g.x.resize(n + 1);
    g.jac.assign(n + 1, 1.0 / k_max);
    g.schwarzian.assign(n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
        g.s[i] = k_max * x_lo + g.h * double(i);
        g.x[i] = x_lo + (x_hi - x_lo) * double(i) / double(n);
    }
    return g;
}

}  // namespace micromotion
