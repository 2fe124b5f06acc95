#include "linalg.hpp"

#include <lapacke.h>

#include <complex>

#include "micromotion/error.hpp"

namespace micromotion::detail {

Eigh eigh(Eigen::MatrixXd a, bool want_vectors) {
    const lapack_int n = lapack_int(a.rows());
    if (a.cols() != a.rows()) throw UsageError("eigh: matrix not square");
    Eigh out;
    out.values.resize(n);
    if (n == 0) return out;
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'L', n, a.data(), n, out.values.data());
    if (info != 0) throw NumericalError("dsyevd failed with info = " + std::to_string(info));
    if (want_vectors) out.vectors = std::move(a);
    return out;
}

Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXd& h, double t) {
    const Eigh e = eigh(h);
    const Eigen::VectorXcd phases = (e.values * (-t)).unaryExpr([](double x) { return std::polar(1.0, x); });
    const Eigen::MatrixXcd v = e.vectors.cast<std::complex<double>>();
    return v * phases.asDiagonal() * v.adjoint();
}

void fix_signs(Eigen::MatrixXd& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index i;
        v.col(j).cwiseAbs().maxCoeff(&i);
        if (v(i, j) < 0.0) v.col(j) *= -1.0;
    }
}

}  // namespace micromotion::detail
