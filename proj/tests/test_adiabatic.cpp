#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "micromotion/adiabatic.hpp"
#include "micromotion/error.hpp"
#include "oracles.hpp"

using namespace micromotion;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEta = 0.02;

// sweep rate giving P = exp(-(pi/2) eta^2 / rate) for a unit slope difference
double rate_for(double P) { return 0.5 * kPi * kEta * kEta / -std::log(P); }

FloquetMatrixFn two_level_floquet(int n_f) {
    return [n_f](double w0) {
        TwoLevelModel m;
        m.eta = kEta;
        m.omega0 = w0;
        return cosine_floquet_matrix(m.H0(), m.V(), 1.0, n_f);
    };
}

// static two-level crossing with gap eta at x = 0
Eigen::MatrixXd bare_crossing(double x) {
    Eigen::MatrixXd F(2, 2);
    F << 0.5 * x, 0.5 * kEta, 0.5 * kEta, -0.5 * x;
    return F;
}

}  // namespace

TEST(LandauZener, TrivialLimits) {
    AvoidedCrossing c;
    c.gap = 0.0;
    c.slope_difference = 1.0;
    EXPECT_EQ(landau_zener(c, 0.3), 1.0);
    // 2 pi (g/2)^2 / rate = ln 2
    c.gap = 2.0 * std::sqrt(std::log(2.0) / (2.0 * kPi));
    EXPECT_NEAR(landau_zener(c, 1.0), 0.5, 1e-14);
    EXPECT_NEAR(landau_zener_angle(c.gap, 2.0 * std::atan(0.5), 1.0), 0.5, 1e-14);
    c.slope_difference = 0.0;
    EXPECT_THROW(landau_zener(c, 1.0), NumericalError);
    EXPECT_THROW(landau_zener_angle(0.1, 0.0, 1.0), UsageError);
}

TEST(LandauZener, MatchesDrivenTwoLevelRamp) {
    AvoidedCrossing c;
    c.gap = kEta;
    c.slope_difference = 1.0;
    for (double P : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double rate = rate_for(P);
        const double exact = oracle::two_level_ramp(kEta, rate, 0.6, 1.4);
        EXPECT_NEAR(landau_zener(c, rate) / exact, 1.0, 0.15) << P;
    }
}

TEST(Crossings, TwoLevelResonance) {
    TwoLevelModel m;
    m.eta = kEta;
    std::vector<double> x;
    std::vector<std::vector<double>> curves(2);
    for (int i = 0; i <= 400; ++i) {
        m.omega0 = 0.8 + 0.4 * i / 400.0;
        x.push_back(m.omega0);
        const auto q = two_level_quasienergies(m, 20, 0.5);
        curves[0].push_back(q[0]);
        curves[1].push_back(q[1]);
    }
    const auto found = extract_avoided_crossings(x, curves, 0.1, 1.0);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_NEAR(found[0].gap / kEta, 1.0, 0.05);
    EXPECT_NEAR(found[0].location, 1.0, 1e-3);
    EXPECT_NEAR(std::abs(found[0].slope_difference), 1.0, 0.02);
    EXPECT_TRUE(found[0].reliable);
    EXPECT_TRUE(extract_avoided_crossings(x, curves, 1e-3, 1.0).empty());
}

TEST(Crossings, RecoversExactHyperbola) {
    const double xs = 0.37, gap = 0.05, s = 0.8, mean = 0.1;
    std::vector<double> x;
    std::vector<std::vector<double>> curves(2);
    for (int i = 0; i <= 200; ++i) {
        const double v = i / 200.0;
        const double half = std::hypot(s * (v - xs), 0.5 * gap);
        x.push_back(v);
        curves[0].push_back(mean - half);
        curves[1].push_back(mean + half);
    }
    const auto found = extract_avoided_crossings(x, curves, 0.2);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_NEAR(found[0].location, xs, 1e-6);
    EXPECT_NEAR(found[0].gap, gap, 1e-6);
    EXPECT_NEAR(std::abs(found[0].slope), s, 1e-6);
    EXPECT_NEAR(std::abs(found[0].slope_difference), 2.0 * s, 1e-6);
    EXPECT_LT(found[0].fit_residual, 1e-6);
}

TEST(TransitionAmplitudes, StaticRampHasNoTransitions) {
    const auto ramp = linear_ramp(0.7, 0.7, 1e-3, 101);
    for (const RampPoint& p : ramp) EXPECT_EQ(p.lambda, 0.7);
    const auto tr = transition_amplitudes(two_level_floquet(6), {2, 6}, 1.0, ramp, 1);
    for (const auto& c : tr.c_state) EXPECT_LT(std::abs(c), 1e-12);
}

TEST(TransitionAmplitudes, EndpointTermsAtSlowRates) {
    // far from the crossing c ~ rate [g / gap e^{i Phi / rate}] between the ends,
    // so |c| / rate lies between the difference and the sum of the end terms
    auto end_term = [](double x) { return 0.5 * kEta / std::pow(x * x + kEta * kEta, 1.5); };
    const double lo = std::abs(end_term(0.2) - end_term(0.4)), hi = end_term(0.2) + end_term(0.4);
    for (double rate : {4e-4, 2e-4, 1e-4}) {
        const auto tr = transition_amplitudes(bare_crossing, {2, 0}, 100.0, linear_ramp(0.2, 0.4, rate, 4001), 0);
        double c = 0.0;
        for (const auto& v : tr.c_state) c = std::max(c, std::abs(v));
        EXPECT_GT(c / rate, 0.95 * lo) << rate;
        EXPECT_LT(c / rate, 1.05 * hi) << rate;
    }
}

TEST(TransitionAmplitudes, InsensitiveToEigenvectorSigns) {
    const auto ramp = linear_ramp(-0.3, 0.3, rate_for(0.1), 3001);
    const auto ref = transition_amplitudes(bare_crossing, {2, 0}, 100.0, ramp, 0);
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2, 2);
    S(1, 1) = -1.0;
    const FloquetMatrixFn conjugated = [&](double x) { return Eigen::MatrixXd(S * bare_crossing(x) * S); };
    const auto flipped = transition_amplitudes(conjugated, {2, 0}, 100.0, ramp, 0);
    auto sorted = [](const TransitionAmplitudes& t) {
        std::vector<double> v;
        for (const auto& c : t.c_state) v.push_back(std::abs(c));
        std::sort(v.begin(), v.end());
        return v;
    };
    const auto a = sorted(ref), b = sorted(flipped);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    EXPECT_GT(a.back(), 0.1);
}

TEST(TransitionAmplitudes, MatchesFirstOrderIntegral) {
    for (double P : {0.01, 0.1}) {
        const double rate = rate_for(P);
        const auto tr = transition_amplitudes(bare_crossing, {2, 0}, 100.0, linear_ramp(-0.3, 0.3, rate, 12001), 0);
        const double ref = oracle::two_level_first_order(kEta, rate, 0.3);
        EXPECT_NEAR(std::norm(tr.c_state[1]) / ref, 1.0, 1e-3) << P;
        EXPECT_LT(tr.richardson_error, 1e-4);
    }
}

TEST(TransitionAmplitudes, BranchPopulationFollowsLandauZener) {
    // first order overshoots P itself; the populations left on the branch agree
    AvoidedCrossing c;
    c.gap = kEta;
    c.slope_difference = 1.0;
    for (double P : {0.01, 0.05, 0.1}) {
        const double rate = rate_for(P);
        const auto tr = transition_amplitudes(bare_crossing, {2, 0}, 100.0, linear_ramp(-0.3, 0.3, rate, 3001), 0);
        const double c1 = std::norm(tr.c_state[1]), lz = landau_zener(c, rate);
        EXPECT_NEAR((1.0 - c1) / (1.0 - lz), 1.0, 0.2) << P;
        EXPECT_GT(c1 / lz, std::pow(kPi / 3.0, 2)) << P;
        EXPECT_LT(c1 / lz, 1.45) << P;
    }
}

TEST(TransitionAmplitudes, FloquetRampAcrossResonance) {
    const double rate = rate_for(0.1);
    const auto tr = transition_amplitudes(two_level_floquet(10), {2, 10}, 1.0, linear_ramp(0.7, 1.3, rate, 3001), 1);
    ASSERT_EQ(tr.c_state.size(), 2u);
    double out = 0.0;
    for (const auto& c : tr.c_state) out = std::max(out, std::norm(c));
    EXPECT_GT(out, 0.05);
    EXPECT_LT(out, 0.2);
}

TEST(GateFidelity, EqualPhasesGiveUnity) {
    GatePhaseSet p;
    p.theta = {0.1, 0.7, 1.3, 2.0};
    p.theta_excited = p.theta;
    p.p_e = 0.3;
    const GateFidelity f = gate_fidelity(p);
    EXPECT_NEAR(f.fidelity, 1.0, 1e-12);
    p.theta_excited = {3.0, 1.0, 0.2, 5.0};
    p.p_e = 0.0;
    EXPECT_EQ(gate_fidelity(p).fidelity, 1.0);
    p.p_e = 1.0;
    EXPECT_THROW(gate_fidelity(p), UsageError);
}

TEST(GateFidelity, RandomPhasesRespectBoundAndOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    for (int trial = 0; trial < 100; ++trial) {
        GatePhaseSet p;
        for (int k = 0; k < 4; ++k) {
            p.theta[std::size_t(k)] = u(rng);
            p.theta_excited[std::size_t(k)] = u(rng);
        }
        p.p_e = 0.01;
        const GateFidelity f = gate_fidelity(p);
        EXPECT_LE(f.max_vmv, 1.5 + 1e-9);
        EXPECT_GE(f.fidelity, f.bound - 1e-12);
        EXPECT_NEAR(f.max_vmv, oracle::gate_max_vmv(p.alpha()), 1e-8);
        EXPECT_LE(1.0 - f.fidelity, 0.0075 + 1e-6);
    }
}

TEST(GateFidelity, GlobalPhaseInvariance) {
    GatePhaseSet p;
    p.theta = {0.2, 1.1, 2.5, 4.0};
    p.theta_excited = {0.9, 0.3, 3.3, 1.7};
    p.p_e = 0.05;
    const double ref = gate_fidelity(p).fidelity;
    for (auto& v : p.theta_excited) v += 1.234;
    EXPECT_NEAR(gate_fidelity(p).fidelity, ref, 1e-12);
}

TEST(GateFidelity, MonotoneAndLinearInSmallExcitation) {
    GatePhaseSet p;
    p.theta = {0.0, 0.0, 0.0, 0.0};
    p.theta_excited = {0.0, 0.4, 0.9, 1.2};
    double prev = 1.0;
    for (double pe : {0.001, 0.01, 0.05, 0.1}) {
        p.p_e = pe;
        const double f = gate_fidelity(p).fidelity;
        EXPECT_LT(f, prev);
        prev = f;
    }
    p.p_e = 2e-4;
    const double a = 1.0 - gate_fidelity(p).fidelity;
    p.p_e = 1e-4;
    const double b = 1.0 - gate_fidelity(p).fidelity;
    EXPECT_NEAR(a / b, 2.0, 1e-3);
}

TEST(GateFidelity, MatrixIsSingular) {
    const Eigen::Matrix4d M = gate_matrix({0.0, 0.5, 1.7, 2.9});
    EXPECT_LT(std::abs(M.determinant()), 1e-12);
    EXPECT_EQ(M.diagonal().cwiseAbs().maxCoeff(), 0.0);
    std::array<double, 4> v{};
    const double best = simplex_max_vmv(M, &v);
    double sum = 0.0;
    for (double x : v) {
        EXPECT_GE(x, 0.0);
        sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LE(best, 1.0 + 1e-12);
}
