#include "micromotion/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "micromotion/error.hpp"
#include "micromotion/floquet.hpp"

namespace micromotion {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

}  // namespace

double PeriodicHamiltonian::period() const {
    if (!(omega > 0.0)) throw UsageError("periodic Hamiltonian needs omega > 0");
    return 2.0 * constants::pi / omega;
}

Eigen::MatrixXcd PeriodicHamiltonian::at(double tau) const {
    Eigen::MatrixXcd h = H0;
    for (const auto& t : terms) {
        const double ph = t.harmonic * omega * tau;
        h += (t.sine ? std::sin(ph) : std::cos(ph)) * t.M;
    }
    return h;
}

Eigen::MatrixXcd PeriodicHamiltonian::integral(double t0, double t1) const {
    Eigen::MatrixXcd g = (t1 - t0) * H0;
    for (const auto& t : terms) {
        if (t.harmonic < 1) throw UsageError("drive terms need harmonic >= 1");
        const double w = t.harmonic * omega;
        const double c = t.sine ? (std::cos(w * t0) - std::cos(w * t1)) / w : (std::sin(w * t1) - std::sin(w * t0)) / w;
        g += c * t.M;
    }
    return g;
}

PeriodicHamiltonian micromotion_hamiltonian(const UnperturbedBasis& basis, const DimensionlessModel& model, double d,
                                            const HamiltonianTerms& terms) {
    const int n = basis.size();
    const double dp = d + model.delta_d;
    const auto drive = atom_ion_drive(basis, model, dp);
    PeriodicHamiltonian H;
    H.omega = model.omega;
    H.H0 = drive.H0.cast<cplx>();
    if (terms.v1 && model.gamma != 0.0) H.terms.push_back({drive.V1.cast<cplx>(), 2, false});
    if (terms.v2 && model.gamma != 0.0) H.terms.push_back({-I * drive.iV2.cast<cplx>(), 1, true});
    if (!terms.excess) return H;

    const bool need_p = model.l_ac != 0.0 || model.delta_d != 0.0;
    if (need_p && basis.D.rows() != n) throw UsageError("micromotion_hamiltonian: excess terms need the derivative matrix");
    Eigen::MatrixXd shifted = basis.X;  // X - d'
    shifted.diagonal().array() -= dp;
    const Eigen::MatrixXcd P = need_p ? Eigen::MatrixXcd(-I * basis.D.cast<cplx>()) : Eigen::MatrixXcd();
    if (model.l_ac != 0.0) {
        H.terms.push_back({(model.l_ac * model.gamma * shifted).cast<cplx>(), 2, true});
        H.terms.push_back({-model.l_ac * P, 1, false});
    }
    if (model.delta_d != 0.0) {
        const double c = -2.0 * model.gamma * model.delta_d;
        H.terms.push_back({(c * model.gamma * shifted).cast<cplx>(), 2, false});
        H.terms.push_back({c * P, 1, true});
    }
    return H;
}

std::vector<double> quasienergies_from_eigenphases(const Eigen::MatrixXcd& U, double omega) {
    if (U.rows() != U.cols()) throw UsageError("quasienergies_from_eigenphases: U must be square");
    const double T = 2.0 * constants::pi / omega;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(U, false);
    std::vector<double> eps;
    eps.reserve(std::size_t(U.rows()));
    for (Eigen::Index i = 0; i < U.rows(); ++i) eps.push_back(reduce_to_zone(-std::arg(es.eigenvalues()[i]) / T, omega));
    std::sort(eps.begin(), eps.end());
    return eps;
}

PropagatorResult propagate_one_period(const PeriodicHamiltonian& H, const PropagatorOptions& opts) {
    const Eigen::Index n = H.size();
    if (n == 0 || H.H0.cols() != n) throw UsageError("propagate_one_period: H0 must be square and non-empty");
    for (const auto& t : H.terms)
        if (t.M.rows() != n || t.M.cols() != n) throw UsageError("propagate_one_period: drive term size mismatch");
    const double inv = 1.0 / opts.dt_fraction;
    const int steps = int(std::lround(inv));
    if (steps < 1 || std::abs(inv - steps) > 1e-9 * inv)
        throw UsageError("propagate_one_period: dt must divide the period (1/dt_fraction = " + std::to_string(inv) + ")");

    const double T = H.period();
    const double dt = T / steps;
    PropagatorResult r;
    r.steps = steps;
    r.U = Eigen::MatrixXcd::Identity(n, n);
    for (int s = 0; s < steps; ++s) {
        const Eigen::MatrixXcd G = H.integral(s * dt, (s + 1) * dt);
        const Eigen::MatrixXcd step = (-I * G).exp();
        r.U = step * r.U;
    }
    r.unitarity_residual = (r.U.adjoint() * r.U - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (r.unitarity_residual > opts.unitarity_tolerance)
        throw NumericalError("propagator lost unitarity (residual " + std::to_string(r.unitarity_residual) +
                             "); try dt_fraction = " + std::to_string(opts.dt_fraction / 4));

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(r.U);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> eps(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx lam = es.eigenvalues()[i];
        eps[std::size_t(i)] = reduce_to_zone(-std::arg(lam) / T, H.omega);
        r.eigenvalue_residual = std::max(r.eigenvalue_residual, std::abs(std::abs(lam) - 1.0));
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eps[std::size_t(a)] < eps[std::size_t(b)]; });
    r.eigenvalues.resize(n);
    r.eigenvectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto src = order[std::size_t(j)];
        r.eigenvalues[j] = es.eigenvalues()[src];
        r.eigenvectors.col(j) = es.eigenvectors().col(src).normalized();
        r.quasienergies.push_back(eps[std::size_t(src)]);
        Eigen::Index k = 0;
        r.dominant_weight.push_back(r.eigenvectors.col(j).cwiseAbs2().maxCoeff(&k));
        r.dominant_state.push_back(int(k));
    }
    return r;
}

}  // namespace micromotion
