#pragma once

#include <complex>
#include <vector>

namespace micromotion {

/// Special Floquet solution f(t) = e^{i mu t} phi(t), phi(t) = sum_n C_n e^{i n omega t},
/// of x'' + (omega^2 / 4)(a + 2 q cos omega t) x = 0 with f(0) = 1, f'(0) = i nu.
/// Any consistent time unit works; mu and nu carry the units of omega.
struct MathieuSolution {
    double a = 0.0, q = 0.0, omega = 0.0;
    double mu = 0.0;  ///< in (0, omega / 2)
    double nu = 0.0;
    int n_max = 0;
    std::vector<double> C;  ///< C[n + n_max], sum C_n = 1

    double coefficient(int n) const noexcept;
    /// Lowest-order secular frequency (omega / 2) sqrt(a + q^2 / 2).
    double secular_frequency() const;
    std::complex<double> phi(double t) const;
    std::complex<double> phi_dot(double t) const;
    std::complex<double> f(double t) const;
    std::complex<double> f_dot(double t) const;
    std::complex<double> f_ddot(double t) const;
    /// max |f'' + W f| / max |W f| over `samples` points of one period.
    double ode_residual(int samples = 64) const;
    /// max |Im(f' f*) - nu| over `samples` points of one period.
    double wronskian_drift(int samples = 64) const;
};

/// Characteristic exponent from the tridiagonal Fourier recursion truncated
/// at |n| <= n_max: a is the lowest eigenvalue of diag((beta + 2n)^2) - q (sub + super)
/// with beta = 2 mu / omega in (0, 1), solved by bisection on beta.
/// Throws NumericalError with the growth rate when (a, q) is unstable and
/// UsageError for n_max < 10 or omega <= 0.
MathieuSolution mathieu_floquet(double a, double q, double omega, int n_max = 30);

/// Per-period growth rate of the Mathieu equation from its monodromy matrix
/// (zero in the stable region).
double mathieu_growth_rate(double a, double q, double omega);

/// Unique periodic solution x_p of x'' + W(t) x = F0 + F1 sin(omega t):
/// x_p = Re{Phi(t) phi(t)*}, Phi = sum_n D_n e^{i n omega t},
/// D_n = [2 C_n F0 + i F1 (C_{n+1} - C_{n-1})] / [2 nu (mu + n omega)].
struct PeriodicDrive {
    MathieuSolution sol;
    double F0 = 0.0, F1 = 0.0;
    std::vector<std::complex<double>> D;  ///< D[n + n_max]

    double x(double t) const;
    double x_dot(double t) const;
    double x_ddot(double t) const;
    /// max |x'' + W x - F| over `samples` points, relative to max(|F0|, |F1|).
    double ode_residual(int samples = 64) const;
    /// max |x_p(t + T) - x_p(t)| over `samples` points.
    double periodicity_error(int samples = 16) const;
};

/// Throws NumericalError when mu + n omega vanishes for some |n| <= n_max.
PeriodicDrive periodic_solution(const MathieuSolution& sol, double F0, double F1);

/// Drive from oscillator-unit lengths: F0 = delta_d w0^2 and F1 = l_ac omega w0
/// with w0 the secular frequency of `sol`.
PeriodicDrive excess_drive(const MathieuSolution& sol, double delta_d, double l_ac);

/// <x, t | n> of the exact Floquet state for hbar = m = 1, t in [0, T).
std::complex<double> floquet_wavefunction(const PeriodicDrive& drive, int n, double x, double t);

/// Quasienergies (n + 1/2) mu for n = 0..n_levels-1 (hbar = 1).
std::vector<double> single_ion_quasienergies(const MathieuSolution& sol, int n_levels);

/// Time-averaged <n|P^2|n> / 2 (hbar = m = 1):
/// (n + 1/2) sum_k C_k^2 (mu + k omega)^2 / (2 nu) + avg(x_p'^2) / 2.
double mean_kinetic_energy(const PeriodicDrive& drive, int n);

/// The excess part avg(x_p'^2) / 2 alone.
double excess_kinetic_energy(const PeriodicDrive& drive);

}  // namespace micromotion
