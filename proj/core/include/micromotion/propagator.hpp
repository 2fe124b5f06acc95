#pragma once

#include <Eigen/Dense>
#include <vector>

#include "micromotion/numerov.hpp"
#include "micromotion/units.hpp"

namespace micromotion {

/// M cos(p omega tau) or M sin(p omega tau), p >= 1.
struct DriveTerm {
    Eigen::MatrixXcd M;
    int harmonic = 1;
    bool sine = false;
};

/// H(tau) = H0 + sum of drive terms, Hermitian matrices in some fixed basis.
struct PeriodicHamiltonian {
    double omega = 0.0;
    Eigen::MatrixXcd H0;
    std::vector<DriveTerm> terms;

    Eigen::Index size() const noexcept { return H0.rows(); }
    double period() const;
    Eigen::MatrixXcd at(double tau) const;
    /// Exact integral of H over [t0, t1].
    Eigen::MatrixXcd integral(double t0, double t1) const;
};

struct HamiltonianTerms {
    bool v1 = true;      ///< -gamma^2 (X - d')^2 cos(2 omega tau)
    bool v2 = true;      ///< -gamma {X - d', P} sin(omega tau)
    bool excess = true;  ///< ac and dc excess micromotion terms when l_ac or delta_d is nonzero
};

/// Transformed-picture Hamiltonian at trap distance d in the given basis,
/// written around d' = d + delta_d (equal to the lab form up to a constant):
///   H0(d') - gamma^2 (X - d')^2 cos 2w t - gamma {X - d', P} sin w t
///   + l_ac [gamma (X - d') sin 2w t - P cos w t]
///   - 2 gamma delta_d [gamma (X - d') cos 2w t + P sin w t].
/// {X - d', P} uses the d = 0 energy identity, P = -i D.
PeriodicHamiltonian micromotion_hamiltonian(const UnperturbedBasis& basis, const DimensionlessModel& model, double d,
                                            const HamiltonianTerms& terms = {});

struct PropagatorOptions {
    double dt_fraction = 1.0e-3;          ///< step as a fraction of the period; 1/dt_fraction must be an integer
    double unitarity_tolerance = 1.0e-6;  ///< larger residuals throw NumericalError
};

struct PropagatorResult {
    Eigen::MatrixXcd U;                  ///< U(T, 0)
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd eigenvectors;       ///< columns follow `quasienergies`
    std::vector<double> quasienergies;   ///< ascending, in [-omega/2, omega/2)
    std::vector<int> dominant_state;     ///< basis index with the largest weight
    std::vector<double> dominant_weight;
    double unitarity_residual = 0.0;     ///< max |U^H U - I|
    double eigenvalue_residual = 0.0;    ///< max ||lambda| - 1|
    int steps = 0;
};

/// U(T, 0) from U(t + dt) = exp(-i int_t^{t+dt} H) U(t), each exponential by
/// scaling and squaring, then its eigenphases.
PropagatorResult propagate_one_period(const PeriodicHamiltonian& H, const PropagatorOptions& opts = {});

/// epsilon_n = -arg(lambda_n) / T in [-omega/2, omega/2), ascending, with multiplicity.
std::vector<double> quasienergies_from_eigenphases(const Eigen::MatrixXcd& U, double omega);

}  // namespace micromotion
