#include "micromotion/numerov.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "micromotion/error.hpp"
#include "micromotion/parallel.hpp"

namespace micromotion {

namespace {

constexpr double pi = std::numbers::pi;

/// Coefficients of the Numerov recursion u'' + Q(s) u = 0 on the s grid:
/// Q = g'^2 2 (E - V) + S/2.
struct NumerovTable {
    std::vector<double> a;   // 2 g'^2
    std::vector<double> v;   // V(x)
    std::vector<double> sh;  // S/2
    double h2 = 0.0;

    NumerovTable(const RadialGrid& grid, const Potential& pot) {
        const std::size_t n = grid.size();
        a.resize(n);
        v.resize(n);
        sh.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 2.0 * grid.jac[i] * grid.jac[i];
            v[i] = pot(grid.x[i]);
            sh[i] = 0.5 * grid.schwarzian[i];
        }
        h2 = grid.h * grid.h;
    }

    double T(std::size_t i, double E) const { return -h2 * (a[i] * (E - v[i]) + sh[i]) / 12.0; }

    double U(std::size_t i, double E) const {
        const double t = T(i, E);
        if (t >= 0.9) throw NumericalError("Numerov step too coarse: h^2 |Q| / 12 >= 0.9");
        return (2.0 + 10.0 * t) / (1.0 - t);
    }

    /// Negative pivots of tridiag(-1, U_i, -1) over the interior points.
    int count(double E) const {
        const std::size_t n = a.size();
        int neg = 0;
        double d = 1.0;
        bool first = true;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double u = U(i, E);
            d = first ? u : u - 1.0 / d;
            first = false;
            if (d == 0.0) d = 1e-300;
            if (d < 0.0) ++neg;
        }
        return neg;
    }
};

struct Bracket {
    double lo, hi;
    int index;
};

void isolate(const NumerovTable& tab, double lo, int clo, double hi, int chi, double tol, std::vector<Bracket>& out) {
    if (chi <= clo) return;
    if (chi - clo == 1) {
        out.push_back({lo, hi, clo});
        return;
    }
    if (hi - lo <= tol * std::max({1.0, std::abs(lo), std::abs(hi)})) {
        for (int j = clo; j < chi; ++j) out.push_back({lo, hi, j});
        return;
    }
    const double mid = 0.5 * (lo + hi);
    const int cm = tab.count(mid);
    isolate(tab, lo, clo, mid, cm, tol, out);
    isolate(tab, mid, cm, hi, chi, tol, out);
}

double bisect(const NumerovTable& tab, Bracket b, double tol) {
    double lo = b.lo, hi = b.hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= tol * std::max(1.0, std::abs(mid))) break;
        if (tab.count(mid) > b.index) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Null vector of the Numerov pencil at E by inverse iteration on the
/// interior unknowns F_i = (1 - T_i) u_i.
std::vector<double> numerov_vector(const NumerovTable& tab, double E, unsigned seed) {
    const std::size_t n = tab.a.size();
    const lapack_int m = lapack_int(n - 2);
    std::vector<double> diag0(m);
    for (lapack_int i = 0; i < m; ++i) diag0[i] = tab.U(std::size_t(i) + 1, E);

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> b(m);
    for (auto& x : b) x = dist(rng);

    for (int iter = 0; iter < 3; ++iter) {
        std::vector<double> dl(m - 1, -1.0), du(m - 1, -1.0), d = diag0;
        lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, m, 1, dl.data(), d.data(), du.data(), b.data(), m);
        if (info > 0) {
            // exactly singular pivot: nudge the shift
            for (auto& x : diag0) x *= 1.0 + 1e-15;
            continue;
        }
        if (info < 0) throw NumericalError("dgtsv rejected its arguments");
        double norm = 0.0;
        for (double x : b) norm = std::max(norm, std::abs(x));
        if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("inverse iteration broke down");
        for (auto& x : b) x /= norm;
    }
    std::vector<double> F(n, 0.0);
    for (lapack_int i = 0; i < m; ++i) F[std::size_t(i) + 1] = b[i];
    return F;
}

/// Finite-difference weights (Fornberg) for the first derivative at z on nodes x.
std::vector<double> fd_weights(double z, const std::vector<double>& x) {
    const int n = int(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][1];
    return w;
}

/// d/ds of every column, sixth order, one-sided near the ends.
Eigen::MatrixXd s_derivative(const Eigen::MatrixXd& f, double h) {
    const Eigen::Index n = f.rows();
    Eigen::MatrixXd out(n, f.cols());
    static const double central[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
    std::vector<double> nodes(7);
    for (int j = 0; j < 7; ++j) nodes[j] = j;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index start;
        std::vector<double> w;
        if (i < 3 || i > n - 4) {
            start = i < 3 ? 0 : n - 7;
            w = fd_weights(double(i - start), nodes);
        } else {
            start = i - 3;
            w.assign(central, central + 7);
        }
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(f.cols());
        for (int j = 0; j < 7; ++j) row += w[j] * f.row(start + j);
        out.row(i) = row / h;
    }
    return out;
}

Eigen::MatrixXd antisym(const Eigen::MatrixXd& m) { return 0.5 * (m - m.transpose()); }

}  // namespace

RminChoice find_r_min(double phase, double R, double target, double lower, double upper) {
    if (!(R > 0.0)) throw ConfigError("find_r_min needs R > 0");
    if (!(phase > -pi && phase <= pi)) throw ConfigError("short-range phase must lie in (-pi, pi]");
    if (!(lower > 0.0) || !(upper > lower)) throw ConfigError("find_r_min needs 0 < lower < upper");
    // nodes inside (lower, upper) have k pi - phase in (R/upper, R/lower)
    const int k_lo = int(std::floor((R / upper + phase) / pi)) + 1;
    const int k_hi = int(std::ceil((R / lower + phase) / pi)) - 1;
    auto node = [&](int k) { return R / (k * pi - phase); };
    int best = -1;
    double best_dist = 0.0;
    for (int k = std::max(k_lo, 1); k <= k_hi; ++k) {
        const double x = node(k);
        if (!(x > lower && x < upper)) continue;
        const double dist = std::abs(x - target);
        if (best < 0 || dist < best_dist) {
            best = k;
            best_dist = dist;
        }
        if (x < target) break;
    }
    if (best < 0) throw ConfigError("no node of the short-range form between the allowed bounds");
    return {node(best), best};
}

int count_below(const RadialGrid& grid, const Potential& v, double E) { return NumerovTable(grid, v).count(E); }

Eigen::MatrixXd matrix_elements(const RadialGrid& grid, const Eigen::MatrixXd& states, int power) {
    if (std::size_t(states.rows()) != grid.size()) throw UsageError("states and grid have different sizes");
    if (power < 0) throw UsageError("negative power");
    const auto w = grid.weights();
    Eigen::VectorXd wx(states.rows());
    for (Eigen::Index i = 0; i < wx.size(); ++i) wx[i] = w[i] * std::pow(grid.x[i], power);
    Eigen::MatrixXd m = states.transpose() * (states.array().colwise() * wx.array()).matrix();
    return 0.5 * (m + m.transpose());
}

UnperturbedBasis solve_on_grid(const RadialGrid& grid, const Potential& pot, const SolverOptions& opts) {
    if (grid.size() < 9) throw UsageError("grid too small");
    if (!(opts.energy_max > opts.energy_min)) throw UsageError("empty energy window");
    const NumerovTable tab(grid, pot);

    UnperturbedBasis basis;
    basis.grid = grid;
    basis.potential = pot;

    const int c_lo = tab.count(opts.energy_min);
    const int c_hi = tab.count(opts.energy_max);
    std::vector<Bracket> brackets;
    isolate(tab, opts.energy_min, c_lo, opts.energy_max, c_hi, opts.relative_tolerance, brackets);
    if (int(brackets.size()) != c_hi - c_lo)
        throw NumericalError("eigenvalue bracketing lost states: expected " + std::to_string(c_hi - c_lo) + ", got " +
                             std::to_string(brackets.size()));
    if (int(brackets.size()) > opts.max_states) {
        basis.warnings.push_back("energy window holds " + std::to_string(brackets.size()) + " states; keeping the lowest " +
                                 std::to_string(opts.max_states));
        brackets.resize(std::size_t(opts.max_states));
    }
    const std::size_t ns = brackets.size();
    basis.energies.resize(ns);
    basis.sturm_index.resize(ns);
    detail::parallel_for(ns, [&](std::size_t j) {
        basis.energies[j] = bisect(tab, brackets[j], opts.relative_tolerance);
        basis.sturm_index[j] = brackets[j].index;
    });
    for (std::size_t j = 1; j < ns; ++j)
        if (!(basis.energies[j] > basis.energies[j - 1]))
            throw NumericalError("eigenvalues not strictly ascending near E = " + std::to_string(basis.energies[j]));

    const std::size_t n = grid.size();
    Eigen::MatrixXd psi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ns));
    basis.nodes.resize(ns);
    detail::parallel_for(ns, [&](std::size_t j) {
        const double E = basis.energies[j];
        auto F = numerov_vector(tab, E, 1234u + unsigned(j));
        double fmax = 0.0;
        for (double f : F) fmax = std::max(fmax, std::abs(f));
        int sign_changes = 0, last = 0;
        for (double f : F) {
            if (std::abs(f) < 1e-12 * fmax) continue;
            const int s = f > 0 ? 1 : -1;
            if (last != 0 && s != last) ++sign_changes;
            last = s;
        }
        basis.nodes[j] = sign_changes;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = F[i] / (1.0 - tab.T(i, E));
            psi(Eigen::Index(i), Eigen::Index(j)) = std::sqrt(grid.jac[i]) * u;
        }
    });

    const auto w = grid.weights();
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), Eigen::Index(n));
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
        const double norm2 = (psi.col(j).array().square() * wv.array()).sum();
        psi.col(j) /= std::sqrt(norm2);
        Eigen::Index imax;
        psi.col(j).cwiseAbs().maxCoeff(&imax);
        if (psi(imax, j) < 0.0) psi.col(j) *= -1.0;
    }

    // symmetric orthonormalisation; the raw residual is the quadrature's verdict
    Eigen::MatrixXd S = psi.transpose() * (psi.array().colwise() * wv.array()).matrix();
    basis.orthonormality_residual = (S - Eigen::MatrixXd::Identity(S.rows(), S.cols())).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.eigenvalues().minCoeff() <= 0.0) throw NumericalError("overlap matrix not positive definite");
    const Eigen::MatrixXd S_inv_half =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    psi = psi * S_inv_half;

    const std::size_t tail_start = n - std::max<std::size_t>(2, n / 50);
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
        const double peak = psi.col(j).cwiseAbs().maxCoeff();
        const double tail = psi.col(j).segment(Eigen::Index(tail_start), Eigen::Index(n - tail_start)).cwiseAbs().maxCoeff();
        basis.tail_ratio = std::max(basis.tail_ratio, tail / peak);
    }
    if (basis.tail_ratio > 1e-8)
        basis.warnings.push_back("states reach the outer wall (tail ratio " + std::to_string(basis.tail_ratio) + ")");

    basis.X = matrix_elements(grid, psi, 1);
    basis.X2 = matrix_elements(grid, psi, 2);

    const Eigen::MatrixXd dpsi_ds = s_derivative(psi, grid.h);
    const auto npts = static_cast<Eigen::Index>(n);
    Eigen::VectorXd ws(npts), wsx(npts);
    for (std::size_t i = 0; i < n; ++i) {
        ws[Eigen::Index(i)] = w[i] / grid.jac[i];
        wsx[Eigen::Index(i)] = ws[Eigen::Index(i)] * grid.x[i];
    }
    const Eigen::MatrixXd D = psi.transpose() * (dpsi_ds.array().colwise() * ws.array()).matrix();
    const Eigen::MatrixXd XD = psi.transpose() * (dpsi_ds.array().colwise() * wsx.array()).matrix();
    basis.D = antisym(D);
    basis.A = antisym(2.0 * XD);

    basis.info.x_lo = grid.front();
    basis.info.x_max = grid.back();
    basis.info.grid_points = n;
    basis.info.energy_min = opts.energy_min;
    basis.info.energy_max = opts.energy_max;
    basis.info.min_points_per_wavelength = min_points_per_wavelength(grid, pot, opts.energy_max);
    if (opts.keep_states) basis.states = std::move(psi);
    return basis;
}

UnperturbedBasis solve_unperturbed(const DimensionlessModel& model, const NumericsConfig& num) {
    if (num.x_max < 15.0) throw ConfigError("x_max must be at least 15 oscillator lengths");
    const double k_max = std::sqrt(2.0 * std::max(num.energy_max, 1.0));
    SolverOptions opts;
    opts.energy_min = num.energy_min;
    opts.energy_max = num.energy_max;
    opts.max_states = num.max_states;
    Potential pot;
    pot.R = model.R;
    UnperturbedBasis basis;
    if (model.R > 0.0) {
        const double lower = model.bohr > 0.0 ? 10.0 * model.bohr : 1e-6 * model.R;
        const auto rm = find_r_min(model.phase, model.R, num.r_min_target, lower, 0.5 * model.R);
        auto grid = make_graded_grid(rm.r_min, num.x_max, model.R, k_max, num.points_per_wavelength);
        basis = solve_on_grid(grid, pot, opts);
        basis.info.r_min = rm.r_min;
        basis.info.r_min_k = rm.k;
    } else {
        auto grid = make_uniform_grid(-num.x_max, num.x_max, k_max, num.points_per_wavelength);
        basis = solve_on_grid(grid, pot, opts);
        basis.info.full_line = true;
    }
    basis.info.points_per_wavelength = num.points_per_wavelength;
    if (basis.info.min_points_per_wavelength < 10.0)
        throw ConfigError("grid resolves fewer than 10 points per wavelength at the top of the window");
    if (num.n_basis > 0 && num.n_basis < basis.size()) basis = truncate(basis, num.n_basis);
    return basis;
}

UnperturbedBasis truncate(const UnperturbedBasis& basis, int n) {
    if (n <= 0 || n > basis.size()) throw UsageError("truncate: invalid state count");
    UnperturbedBasis out;
    out.grid = basis.grid;
    out.potential = basis.potential;
    out.info = basis.info;
    out.energies.assign(basis.energies.begin(), basis.energies.begin() + n);
    if (!basis.sturm_index.empty()) out.sturm_index.assign(basis.sturm_index.begin(), basis.sturm_index.begin() + n);
    if (!basis.nodes.empty()) out.nodes.assign(basis.nodes.begin(), basis.nodes.begin() + n);
    if (basis.states.cols() >= n) out.states = basis.states.leftCols(n);
    out.X = basis.X.topLeftCorner(n, n);
    out.X2 = basis.X2.topLeftCorner(n, n);
    out.D = basis.D.topLeftCorner(n, n);
    out.A = basis.A.topLeftCorner(n, n);
    out.orthonormality_residual = basis.orthonormality_residual;
    out.tail_ratio = basis.tail_ratio;
    out.warnings = basis.warnings;
    return out;
}

UnperturbedBasis harmonic_basis(int n) {
    if (n <= 0) throw UsageError("harmonic_basis: n must be positive");
    UnperturbedBasis b;
    b.info.full_line = true;
    b.energies.resize(std::size_t(n));
    b.sturm_index.resize(std::size_t(n));
    b.nodes.resize(std::size_t(n));
    b.X = Eigen::MatrixXd::Zero(n, n);
    b.X2 = Eigen::MatrixXd::Zero(n, n);
    b.D = Eigen::MatrixXd::Zero(n, n);
    b.A = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        b.energies[std::size_t(k)] = k + 0.5;
        b.sturm_index[std::size_t(k)] = k;
        b.nodes[std::size_t(k)] = k;
        b.X2(k, k) = k + 0.5;
        if (k + 1 < n) {
            const double s = std::sqrt((k + 1) / 2.0);
            b.X(k, k + 1) = b.X(k + 1, k) = s;
            b.D(k, k + 1) = s;
            b.D(k + 1, k) = -s;
        }
        if (k + 2 < n) {
            const double s = std::sqrt(double(k + 1) * double(k + 2));
            b.X2(k, k + 2) = b.X2(k + 2, k) = 0.5 * s;
            b.A(k, k + 2) = s;
            b.A(k + 2, k) = -s;
        }
    }
    return b;
}

}  // namespace micromotion
