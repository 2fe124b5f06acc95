#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "micromotion/error.hpp"
#include "micromotion/floquet.hpp"
#include "micromotion/propagator.hpp"
#include "micromotion/single_ion.hpp"

using namespace micromotion;
using cplx = std::complex<double>;

namespace {

DimensionlessModel single_ion_model() {
    DimensionlessModel m;
    m.omega = 12.7;
    m.gamma = 1.0 / std::sqrt(2.0);
    m.q = 2.0 * std::sqrt(2.0) / m.omega;
    return m;
}

double max_level_error(const PropagatorResult& r, const std::vector<double>& ref, double omega) {
    double worst = 0.0;
    for (double e : ref)
        worst = std::max(worst, zone_distance(r.quasienergies[nearest_in_zone(r.quasienergies, e, omega)], e, omega));
    return worst;
}

}  // namespace

TEST(Propagator, IdentityHasZeroQuasienergies) {
    const auto q = quasienergies_from_eigenphases(Eigen::MatrixXcd::Identity(4, 4), 3.0);
    ASSERT_EQ(q.size(), 4u);
    for (double e : q) EXPECT_EQ(e, 0.0);
}

TEST(Propagator, DiagonalPhasesMapToQuasienergies) {
    const double omega = 2.0, T = 2.0 * constants::pi / omega;
    const std::vector<double> theta = {-3.0, -0.4, 0.0, 1.1, 3.1};
    Eigen::VectorXcd diag(5);
    for (int i = 0; i < 5; ++i) diag[i] = std::polar(1.0, -theta[std::size_t(i)]);
    const auto q = quasienergies_from_eigenphases(diag.asDiagonal().toDenseMatrix(), omega);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(q[std::size_t(i)], theta[std::size_t(i)] / T, 1e-13);
}

TEST(Propagator, RecoversSpectrumOfKnownHamiltonian) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd A(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) = cplx(g(rng), g(rng));
    const Eigen::MatrixXcd H = 2.0 * (A + A.adjoint());
    const double omega = 1.3, T = 2.0 * constants::pi / omega;
    const Eigen::MatrixXcd U = (cplx(0, -T) * H).exp();
    const auto q = quasienergies_from_eigenphases(U, omega);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    for (int i = 0; i < 6; ++i) {
        const double e = reduce_to_zone(es.eigenvalues()[i], omega);
        EXPECT_LT(zone_distance(q[nearest_in_zone(q, e, omega)], e, omega), 1e-10);
    }
}

TEST(Propagator, TimeIndependentHamiltonian) {
    PeriodicHamiltonian H;
    H.omega = 2.5;
    H.H0 = Eigen::MatrixXcd::Zero(3, 3);
    H.H0.diagonal() << -1.7, 0.2, 3.9;
    const PropagatorResult r = propagate_one_period(H);
    for (int i = 0; i < 3; ++i) {
        const double e = reduce_to_zone(H.H0(i, i).real(), H.omega);
        EXPECT_LT(zone_distance(r.quasienergies[nearest_in_zone(r.quasienergies, e, H.omega)], e, H.omega), 1e-10);
    }
    EXPECT_EQ(r.steps, 1000);
}

TEST(Propagator, ExactStepIntegral) {
    const UnperturbedBasis b = harmonic_basis(6);
    const PeriodicHamiltonian H = micromotion_hamiltonian(b, single_ion_model(), 0.3);
    const double t0 = 0.013, t1 = 0.041;
    Eigen::MatrixXcd simpson = Eigen::MatrixXcd::Zero(6, 6);
    const int n = 2000;
    const double h = (t1 - t0) / n;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        simpson += w * H.at(t0 + i * h);
    }
    simpson *= h / 3.0;
    EXPECT_LT((H.integral(t0, t1) - simpson).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Propagator, UnitaryAfterThousandSteps) {
    const PropagatorResult r = propagate_one_period(micromotion_hamiltonian(harmonic_basis(30), single_ion_model(), 0.0));
    EXPECT_EQ(r.steps, 1000);
    EXPECT_LT(r.unitarity_residual, 1e-8);
    EXPECT_LT(r.eigenvalue_residual, 1e-8);
}

TEST(Propagator, SecondOrderConvergence) {
    const PeriodicHamiltonian H = micromotion_hamiltonian(harmonic_basis(20), single_ion_model(), 0.0);
    PropagatorOptions o;
    o.dt_fraction = 1.0 / 3200;
    const auto ref = propagate_one_period(H, o).quasienergies;
    std::vector<double> err;
    for (int steps : {25, 50, 100}) {
        o.dt_fraction = 1.0 / steps;
        const auto q = propagate_one_period(H, o).quasienergies;
        double e = 0.0;
        for (std::size_t i = 0; i < 6; ++i) e = std::max(e, std::abs(q[i] - ref[i]));
        err.push_back(e);
    }
    for (int k = 0; k < 2; ++k) {
        const double p = std::log2(err[std::size_t(k)] / err[std::size_t(k) + 1]);
        EXPECT_GE(p, 1.7) << k;
        EXPECT_LE(p, 2.3) << k;
    }
}

TEST(Propagator, SingleIonGivesMathieuLevels) {
    const DimensionlessModel m = single_ion_model();
    const PropagatorResult r = propagate_one_period(micromotion_hamiltonian(harmonic_basis(60), m, 0.0));
    const MathieuSolution sol = mathieu_floquet(0.0, m.q, m.omega);
    for (int n = 0; n <= 5; ++n) {
        const double e = reduce_to_zone((n + 0.5) * sol.mu, m.omega);
        EXPECT_LT(max_level_error(r, {e}, m.omega), 1e-6) << n;
    }
}

TEST(Propagator, ExcessDriveShiftsAllLevelsAlike) {
    DimensionlessModel m = single_ion_model();
    const UnperturbedBasis b = harmonic_basis(60);
    const PropagatorResult plain = propagate_one_period(micromotion_hamiltonian(b, m, 0.0));
    m.delta_d = 0.7;
    m.l_ac = 0.5;
    const PropagatorResult driven = propagate_one_period(micromotion_hamiltonian(b, m, 0.0));
    const MathieuSolution sol = mathieu_floquet(0.0, m.q, m.omega);
    auto level = [&](const PropagatorResult& r, int n) {
        const double e = reduce_to_zone((n + 0.5) * sol.mu, m.omega);
        return r.quasienergies[nearest_in_zone(r.quasienergies, e, m.omega)];
    };
    // the offset of driven level 0 from plain level 0 fixes the shift
    const double e0 = plain.quasienergies[nearest_in_zone(plain.quasienergies, level(plain, 0), m.omega)];
    const double shift = driven.quasienergies[nearest_in_zone(driven.quasienergies, e0, m.omega)] - e0;
    EXPECT_LT(std::abs(shift), 1e-2);
    for (int n = 1; n <= 5; ++n) {
        const double p = level(plain, n);
        const double d = driven.quasienergies[nearest_in_zone(driven.quasienergies, p + shift, m.omega)];
        EXPECT_LT(zone_distance(d - shift, p, m.omega), 1e-6) << n;
    }
}

TEST(Propagator, TightUnitarityToleranceThrows) {
    PropagatorOptions o;
    o.unitarity_tolerance = 1e-300;
    EXPECT_THROW(propagate_one_period(micromotion_hamiltonian(harmonic_basis(10), single_ion_model(), 0.0), o),
                 NumericalError);
}
