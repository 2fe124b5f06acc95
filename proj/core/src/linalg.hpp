#pragma once

#include <Eigen/Dense>

namespace micromotion::detail {

struct Eigh {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns
};

/// Symmetric eigendecomposition (LAPACK dsyevd). Only the lower triangle of
/// `a` is read.
Eigh eigh(Eigen::MatrixXd a, bool want_vectors = true);

/// exp(-i h t) for real symmetric h, through its eigendecomposition.
Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXd& h, double t);

/// Fixes the sign of each column so that its largest-magnitude entry is positive.
void fix_signs(Eigen::MatrixXd& v);

}  // namespace micromotion::detail
