#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "micromotion/error.hpp"
#include "micromotion/floquet.hpp"
#include "micromotion/static_spectra.hpp"

using namespace micromotion;

namespace {

// -gamma {X - d, d/dx} from the ladder matrices, i.e. i V2.
Eigen::MatrixXd direct_iv2(const UnperturbedBasis& b, double gamma, double d) {
    return -gamma * (b.A - 2.0 * d * b.D);
}

}  // namespace

TEST(StaticSpectra, CommutatorIdentityOnHarmonicBasis) {
    const UnperturbedBasis b = harmonic_basis(60);
    const double gamma = 1.0 / std::sqrt(2.0);
    for (double d : {0.0, 1.5, 6.0}) {
        const Eigen::MatrixXd V1 =
            -gamma * gamma * (b.X2 - 2.0 * d * b.X + d * d * Eigen::MatrixXd::Identity(60, 60));
        Eigen::MatrixXd via(60, 60);
        for (int n = 0; n < 60; ++n)
            for (int m = 0; m < 60; ++m)
                via(n, m) = (b.energies[std::size_t(m)] - b.energies[std::size_t(n)]) * V1(n, m) / gamma;
        EXPECT_LT((via - direct_iv2(b, gamma, d)).cwiseAbs().maxCoeff(), 1e-10) << d;
    }
}

TEST(StaticSpectra, DriveMatricesUseTheIdentity) {
    const UnperturbedBasis b = harmonic_basis(40);
    DimensionlessModel m;
    m.gamma = 1.0 / std::sqrt(2.0);
    const AtomIonDrive drive = atom_ion_drive(b, m, 2.5);
    EXPECT_LT((drive.iV2 - direct_iv2(b, m.gamma, 2.5)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((drive.H0 - drive.H0.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((drive.V1 - drive.V1.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((drive.iV2 + drive.iV2.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StaticSpectra, ShiftedOscillatorKeepsLevels) {
    const UnperturbedBasis b = harmonic_basis(60);
    const Eigen::MatrixXd H = build_H0(b, 0.7);
    EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    for (int n = 0; n < 10; ++n) EXPECT_NEAR(es.eigenvalues()[n], n + 0.5, 1e-10);
}

TEST(StaticSpectra, FreeIonScanIsFlat) {
    const UnperturbedBasis b = harmonic_basis(50);
    const StaticSpectrum s = scan_spectrum(b, distance_grid(0.0, 2.0, 0.02));
    ASSERT_EQ(s.size(), 101u);
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(s.index_of(i, 0), 0);
        for (int n = 0; n < 8; ++n) EXPECT_NEAR(s.energies[i][s.index_of(i, n)], n + 0.5, 1e-9);
    }
    EXPECT_TRUE(s.discontinuities.empty());
}

TEST(StaticSpectra, DistanceGridIsInclusive) {
    const auto g = distance_grid(1.0, 2.0, 0.1);
    ASSERT_EQ(g.size(), 11u);
    EXPECT_DOUBLE_EQ(g.front(), 1.0);
    EXPECT_NEAR(g.back(), 2.0, 1e-12);
}

TEST(StaticSpectra, PresetCouplingRoutesAgree) {
    const UnperturbedBasis& b = fixture::preset_basis();
    const StaticSpectrum s = scan_spectrum(b, distance_grid(5.0, 10.0, 0.05));
    CouplingOptions co;
    co.n_max = 40;
    const CouplingTable t = coupling_strengths(b, fixture::preset_model(), s, co);
    EXPECT_LT(t.route_mismatch, 1e-6);
    for (Eigen::Index i = 0; i < t.v1.rows(); ++i)
        for (Eigen::Index j = 0; j < t.v1.cols(); ++j) {
            if (!std::isfinite(t.v1(i, j))) continue;
            EXPECT_GE(t.v1(i, j), 0.0);
            EXPECT_GE(t.v2(i, j), 0.0);
        }
}

TEST(StaticSpectra, DmmOnSyntheticProfile) {
    CouplingTable t;
    t.distances = distance_grid(0.0, 10.0, 0.01);
    t.levels = {3, 4, 5};
    const auto m = Eigen::Index(t.distances.size());
    t.v2.resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = t.distances[std::size_t(i)];
        t.v2.row(i).setConstant(0.05 * std::exp(-(d - 4.0)));
    }
    // a narrow spike at d = 8 is rejected by the hold
    for (Eigen::Index i = 0; i < m; ++i)
        if (std::abs(t.distances[std::size_t(i)] - 8.0) < 0.03) t.v2.row(i).setConstant(1.0);
    const auto dmm = detect_dmm(t);
    ASSERT_TRUE(dmm.has_value());
    EXPECT_NEAR(*dmm, 4.0, 1e-3);
    DmmOptions high;
    high.threshold = 1e9;
    EXPECT_FALSE(detect_dmm(t, high).has_value());
}

TEST(StaticSpectra, CentreOfMassCouplingsMatchLadderElements) {
    const UnperturbedBasis b = harmonic_basis(5);
    const double gamma = 1.0 / std::sqrt(2.0);
    const CmCouplings c = cm_rel_couplings(gamma, 2, 0);
    EXPECT_NEAR(c.x2, gamma * gamma * b.X2(0, 2), 1e-15);
    EXPECT_NEAR(c.anticommutator, gamma * std::abs(b.A(0, 2)), 1e-15);
    EXPECT_EQ(cm_rel_couplings(gamma, 2, 1).x2, 0.0);
    EXPECT_DOUBLE_EQ(sideband_detuning(12.2, 0.5, 12.7), 0.0);
}
