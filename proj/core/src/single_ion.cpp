#include "micromotion/single_ion.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "micromotion/error.hpp"
#include "micromotion/units.hpp"

namespace micromotion {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

double drive_w(double a, double q, double omega, double t) {
    return 0.25 * omega * omega * (a + 2.0 * q * std::cos(omega * t));
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> recursion(double beta, double q, int n_max, bool vectors) {
    const int m = 2 * n_max + 1;
    Eigen::VectorXd diag(m), sub = Eigen::VectorXd::Constant(m - 1, -q);
    for (int i = 0; i < m; ++i) {
        const double s = beta + 2.0 * (i - n_max);
        diag[i] = s * s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    return es;
}

double lowest(double beta, double q, int n_max) { return recursion(beta, q, n_max, false).eigenvalues()[0]; }

// sum over one period of g(t_j) at `samples` equispaced points, divided by samples
template <class G>
double period_mean(double omega, int samples, G&& g) {
    const double T = 2.0 * constants::pi / omega;
    double s = 0.0;
    for (int j = 0; j < samples; ++j) s += g(T * j / samples);
    return s / samples;
}

}  // namespace

double MathieuSolution::coefficient(int n) const noexcept {
    if (n < -n_max || n > n_max) return 0.0;
    return C[std::size_t(n + n_max)];
}

double MathieuSolution::secular_frequency() const { return 0.5 * omega * std::sqrt(a + 0.5 * q * q); }

cplx MathieuSolution::phi(double t) const {
    cplx s = 0.0;
    for (int n = -n_max; n <= n_max; ++n) s += coefficient(n) * std::polar(1.0, n * omega * t);
    return s;
}

cplx MathieuSolution::phi_dot(double t) const {
    cplx s = 0.0;
    for (int n = -n_max; n <= n_max; ++n) s += I * (n * omega) * coefficient(n) * std::polar(1.0, n * omega * t);
    return s;
}

cplx MathieuSolution::f(double t) const { return std::polar(1.0, mu * t) * phi(t); }

cplx MathieuSolution::f_dot(double t) const {
    cplx s = 0.0;
    for (int n = -n_max; n <= n_max; ++n) s += (mu + n * omega) * coefficient(n) * std::polar(1.0, n * omega * t);
    return I * std::polar(1.0, mu * t) * s;
}

cplx MathieuSolution::f_ddot(double t) const {
    cplx s = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
        const double k = mu + n * omega;
        s += k * k * coefficient(n) * std::polar(1.0, n * omega * t);
    }
    return -std::polar(1.0, mu * t) * s;
}

double MathieuSolution::ode_residual(int samples) const {
    const double T = 2.0 * constants::pi / omega;
    double res = 0.0, scale = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double t = T * j / samples;
        const cplx wf = drive_w(a, q, omega, t) * f(t);
        res = std::max(res, std::abs(f_ddot(t) + wf));
        scale = std::max(scale, std::abs(wf));
    }
    return res / std::max(scale, 1e-300);
}

double MathieuSolution::wronskian_drift(int samples) const {
    const double T = 2.0 * constants::pi / omega;
    double d = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double t = T * j / samples;
        d = std::max(d, std::abs((f_dot(t) * std::conj(f(t))).imag() - nu));
    }
    return d;
}

double mathieu_growth_rate(double a, double q, double omega) {
    if (!(omega > 0.0)) throw UsageError("mathieu_growth_rate: omega must be positive");
    // RK4 on the two fundamental solutions over one period
    const double T = 2.0 * constants::pi / omega;
    const int steps = 4000;
    const double h = T / steps;
    std::array<double, 4> y{1.0, 0.0, 0.0, 1.0};  // (x1, v1, x2, v2)
    auto rhs = [&](double t, const std::array<double, 4>& s) {
        const double w = drive_w(a, q, omega, t);
        return std::array<double, 4>{s[1], -w * s[0], s[3], -w * s[2]};
    };
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        auto k1 = rhs(t, y);
        std::array<double, 4> tmp;
        for (int j = 0; j < 4; ++j) tmp[std::size_t(j)] = y[std::size_t(j)] + 0.5 * h * k1[std::size_t(j)];
        auto k2 = rhs(t + 0.5 * h, tmp);
        for (int j = 0; j < 4; ++j) tmp[std::size_t(j)] = y[std::size_t(j)] + 0.5 * h * k2[std::size_t(j)];
        auto k3 = rhs(t + 0.5 * h, tmp);
        for (int j = 0; j < 4; ++j) tmp[std::size_t(j)] = y[std::size_t(j)] + h * k3[std::size_t(j)];
        auto k4 = rhs(t + h, tmp);
        for (std::size_t j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    const double half_trace = 0.5 * std::abs(y[0] + y[3]);
    return half_trace > 1.0 ? std::acosh(half_trace) / T : 0.0;
}

MathieuSolution mathieu_floquet(double a, double q, double omega, int n_max) {
    if (!(omega > 0.0)) throw UsageError("mathieu_floquet: omega must be positive");
    if (n_max < 10) throw UsageError("mathieu_floquet: n_max must be >= 10");
    double lo = 0.0, hi = 1.0;
    const double h_lo = lowest(lo, q, n_max) - a, h_hi = lowest(hi, q, n_max) - a;
    if (h_lo >= 0.0 || h_hi <= 0.0)
        throw NumericalError("mathieu_floquet: (a, q) = (" + std::to_string(a) + ", " + std::to_string(q) +
                             ") lies outside the first stability zone; growth rate " +
                             std::to_string(mathieu_growth_rate(a, q, omega)) + " per unit time");
    while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon()) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (lowest(mid, q, n_max) - a < 0.0 ? lo : hi) = mid;
    }
    const double beta = 0.5 * (lo + hi);

    MathieuSolution s;
    s.a = a;
    s.q = q;
    s.omega = omega;
    s.n_max = n_max;
    s.mu = 0.5 * beta * omega;
    const auto es = recursion(beta, q, n_max, true);
    const Eigen::VectorXd v = es.eigenvectors().col(0);
    const double sum = v.sum();
    if (std::abs(sum) < 1e-12) throw NumericalError("mathieu_floquet: Fourier coefficients sum to zero");
    s.C.resize(std::size_t(v.size()));
    double moment = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
        const double c = v[n + n_max] / sum;
        s.C[std::size_t(n + n_max)] = c;
        moment += n * c;
    }
    s.nu = s.mu + omega * moment;
    return s;
}

namespace {

// Phi^(k)(t)
cplx big_phi(const PeriodicDrive& d, double t, int order) {
    cplx s = 0.0;
    for (int n = -d.sol.n_max; n <= d.sol.n_max; ++n) {
        const cplx w = I * (n * d.sol.omega);
        s += d.D[std::size_t(n + d.sol.n_max)] * std::pow(w, order) * std::polar(1.0, n * d.sol.omega * t);
    }
    return s;
}

cplx small_phi(const MathieuSolution& s, double t, int order) {
    cplx r = 0.0;
    for (int n = -s.n_max; n <= s.n_max; ++n)
        r += s.coefficient(n) * std::pow(I * (n * s.omega), order) * std::polar(1.0, n * s.omega * t);
    return r;
}

}  // namespace

double PeriodicDrive::x(double t) const { return (big_phi(*this, t, 0) * std::conj(small_phi(sol, t, 0))).real(); }

double PeriodicDrive::x_dot(double t) const {
    return (big_phi(*this, t, 1) * std::conj(small_phi(sol, t, 0)) + big_phi(*this, t, 0) * std::conj(small_phi(sol, t, 1)))
        .real();
}

double PeriodicDrive::x_ddot(double t) const {
    return (big_phi(*this, t, 2) * std::conj(small_phi(sol, t, 0)) +
            2.0 * big_phi(*this, t, 1) * std::conj(small_phi(sol, t, 1)) +
            big_phi(*this, t, 0) * std::conj(small_phi(sol, t, 2)))
        .real();
}

double PeriodicDrive::ode_residual(int samples) const {
    const double scale = std::max(std::abs(F0), std::abs(F1));
    if (scale == 0.0) return 0.0;
    const double T = 2.0 * constants::pi / sol.omega;
    double res = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double t = T * j / samples;
        const double r = x_ddot(t) + drive_w(sol.a, sol.q, sol.omega, t) * x(t) - F0 - F1 * std::sin(sol.omega * t);
        res = std::max(res, std::abs(r));
    }
    return res / scale;
}

double PeriodicDrive::periodicity_error(int samples) const {
    const double T = 2.0 * constants::pi / sol.omega;
    double e = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double t = T * j / samples;
        e = std::max(e, std::abs(x(t + T) - x(t)));
    }
    return e;
}

PeriodicDrive periodic_solution(const MathieuSolution& sol, double F0, double F1) {
    PeriodicDrive d;
    d.sol = sol;
    d.F0 = F0;
    d.F1 = F1;
    d.D.resize(std::size_t(2 * sol.n_max + 1));
    for (int n = -sol.n_max; n <= sol.n_max; ++n) {
        const double den = sol.mu + n * sol.omega;
        if (std::abs(den) < 1e-12 * sol.omega)
            throw NumericalError("periodic_solution: mu + n omega vanishes for n = " + std::to_string(n));
        d.D[std::size_t(n + sol.n_max)] =
            (2.0 * sol.coefficient(n) * F0 + I * F1 * (sol.coefficient(n + 1) - sol.coefficient(n - 1))) /
            (2.0 * sol.nu * den);
    }
    return d;
}

PeriodicDrive excess_drive(const MathieuSolution& sol, double delta_d, double l_ac) {
    const double w0 = sol.secular_frequency();
    return periodic_solution(sol, delta_d * w0 * w0, l_ac * sol.omega * w0);
}

cplx floquet_wavefunction(const PeriodicDrive& drive, int n, double x, double t) {
    if (n < 0) throw UsageError("floquet_wavefunction: n must be >= 0");
    const auto& s = drive.sol;
    const cplx ph = s.phi(t);
    const cplx f = s.f(t);
    const cplx fd = s.f_dot(t);
    const double xp = drive.x(t);
    const double y = x - xp;
    const double xi = std::sqrt(s.nu / std::norm(f)) * y;
    double h0 = 1.0, h1 = 2.0 * xi;  // physicists' Hermite polynomials
    double hn = n == 0 ? h0 : h1;
    for (int k = 1; k < n; ++k) {
        hn = 2.0 * xi * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = hn;
    }
    double norm = std::pow(s.nu / constants::pi, 0.25);
    for (int k = 1; k <= n; ++k) norm /= std::sqrt(2.0 * k);
    // f^{-1/2} (f*/f)^{n/2} = e^{-i(n+1/2) mu t} phi^{-1/2} e^{-i n arg phi}
    const double arg_phi = std::arg(ph);
    const cplx ladder = std::polar(1.0 / std::sqrt(std::abs(ph)), -0.5 * arg_phi - n * arg_phi) *
                        std::polar(1.0, -(n + 0.5) * s.mu * t);
    const cplx gauss = std::exp(0.5 * I * (fd / f) * y * y);
    return norm * std::polar(1.0, drive.x_dot(t) * x) * ladder * hn * gauss;
}

std::vector<double> single_ion_quasienergies(const MathieuSolution& sol, int n_levels) {
    std::vector<double> e;
    for (int n = 0; n < n_levels; ++n) e.push_back((n + 0.5) * sol.mu);
    return e;
}

double excess_kinetic_energy(const PeriodicDrive& drive) {
    // x_p' is a trigonometric polynomial of degree 2 n_max + 1; its square is sampled exactly
    const int samples = 8 * drive.sol.n_max + 16;
    return 0.5 * period_mean(drive.sol.omega, samples, [&](double t) {
               const double v = drive.x_dot(t);
               return v * v;
           });
}

double mean_kinetic_energy(const PeriodicDrive& drive, int n) {
    if (n < 0) throw UsageError("mean_kinetic_energy: n must be >= 0");
    const auto& s = drive.sol;
    double sum = 0.0;
    for (int k = -s.n_max; k <= s.n_max; ++k) {
        const double w = s.mu + k * s.omega;
        sum += s.coefficient(k) * s.coefficient(k) * w * w;
    }
    return 0.5 * (n + 0.5) * sum / s.nu + excess_kinetic_energy(drive);
}

}  // namespace micromotion
