#include "nhsense/bath.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace nhsense {

namespace {

// (chi * F * F^dag * chi^dag)_11 as the squared norm of (chi * F) row 1.
double gram_11(const Matrix& chi, const Matrix& factor) {
    if (factor.cols() == 0) return 0.0;
    return (chi.row(0) * factor).squaredNorm();
}

// Columns sqrt(w_i) * u_i over eigenpairs with w_i > cutoff of a Hermitian G.
Matrix psd_columns(const Matrix& g, double cutoff) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g);
    if (solver.info() != Eigen::Success)
        throw NumericFailureError("bath decomposition: eigensolver failed");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        if (solver.eigenvalues()(i) > cutoff) keep.push_back(i);
    Matrix cols(g.rows(), static_cast<Eigen::Index>(keep.size()));
    for (Eigen::Index j = 0; j < cols.cols(); ++j)
        cols.col(j) = std::sqrt(solver.eigenvalues()(keep[j])) *
                      solver.eigenvectors().col(keep[j]);
    return cols;
}

double min_eigenvalue(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericFailureError("bath decomposition: eigensolver failed");
    return solver.eigenvalues().minCoeff();
}

}  // namespace

Matrix antihermitian_part(const Matrix& h0) {
    if (h0.rows() != h0.cols())
        throw InvalidSystemError("antihermitian_part: matrix must be square");
    const Complex two_i(0.0, 2.0);
    Matrix m = (h0 - h0.adjoint()) / two_i;
    // Symmetrize away rounding so downstream eigen-solvers see an exactly
    // Hermitian matrix.
    return 0.5 * (m + m.adjoint());
}

BathCoupling spectral_decomposition(const Matrix& m, double column_tol) {
    if (!is_hermitian(m, 1e-10))
        throw InvalidSystemError("spectral_decomposition: input not Hermitian");
    BathCoupling bath;
    bath.y = psd_columns(m, column_tol);
    bath.z = psd_columns(-m, column_tol);
    return bath;
}

double xi_functional(const Matrix& chi, double k1, double k2) {
    const Complex c11 = chi(0, 0);
    double xi = -2.0 * c11.real() + std::norm(c11);
    if (chi.cols() > 1) xi += (k2 / k1) * std::norm(chi(0, 1));
    return xi;
}

double achieved_noise(const BathCoupling& bath, const Matrix& chi, double k1) {
    if (bath.y.cols() > 0 && bath.y.rows() != chi.cols())
        throw InvalidSystemError("achieved_noise: Y rows do not match chi");
    return 0.5 * k1 * (1.0 + (4.0 / k1) * gram_11(chi, bath.y));
}

BathCoupling min_noise_decomposition(const Matrix& m, const Matrix& chi,
                                     double tol, double alpha_max) {
    if (!is_hermitian(m, 1e-10))
        throw InvalidSystemError("min_noise_decomposition: M not Hermitian");
    if (chi.rows() != m.rows() || chi.cols() != m.cols())
        throw InvalidSystemError("min_noise_decomposition: chi/M dimension mismatch");

    const Eigen::Index n = m.rows();
    const Vector v = chi.adjoint().col(0);
    const double vnorm2 = v.squaredNorm();
    if (!(vnorm2 > 0.0))
        throw InvalidSystemError("min_noise_decomposition: chi has zero first row");

    // (chi M chi^dag)_11 = (k1/2) * Xi decides which Gram matrix must be
    // orthogonal to v: the loss one when Xi >= 0, the gain one otherwise.
    const double v_m_v = (v.adjoint() * m * v)(0, 0).real();
    const bool gain_branch = v_m_v >= 0.0;

    Matrix projector = Matrix::Identity(n, n) - v * v.adjoint() / vnorm2;
    projector = 0.5 * (projector + projector.adjoint());

    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    auto feasible = [&](double alpha) {
        const Matrix completed = gain_branch ? Matrix(m + alpha * projector)
                                             : Matrix(alpha * projector - m);
        const double floor = -std::max(kBathColumnTol, 1e-15 * (scale + alpha));
        return min_eigenvalue(completed) >= floor;
    };

    double alpha = 0.0;
    bool found = feasible(0.0);
    if (!found) {
        for (double a = 1.0; a <= alpha_max; a *= 2.0) {
            if (feasible(a)) {
                alpha = a;
                found = true;
                break;
            }
        }
    }
    if (!found)
        throw ConstructionInfeasibleError(
            "min_noise_decomposition: no PSD completion with alpha <= " +
            std::to_string(alpha_max));

    const double cutoff = std::max(kBathColumnTol, 1e-15 * (scale + alpha));
    BathCoupling bath;
    if (gain_branch) {
        bath.y = psd_columns(m + alpha * projector, cutoff);
        bath.z = psd_columns(alpha * projector, cutoff);
    } else {
        bath.y = psd_columns(alpha * projector, cutoff);
        bath.z = psd_columns(alpha * projector - m, cutoff);
    }

    // Attainment check against the analytic minimum (k1 cancels in the
    // relative comparison; use k1 = 1).
    const double xi = 2.0 * v_m_v;
    const double n_min = 0.5 * (1.0 + 2.0 * std::max(xi, 0.0));
    const double got = achieved_noise(bath, chi, 1.0);
    if (std::abs(got - n_min) > tol * n_min)
        throw ConstructionInfeasibleError(
            "min_noise_decomposition: achieved noise misses the minimum by " +
            std::to_string(std::abs(got - n_min) / n_min) + " relative");
    return bath;
}

DecompositionReport validate_decomposition(const BathCoupling& bath,
                                           const Matrix& m, const Matrix& chi,
                                           double k1, double k2) {
    const Eigen::Index n = m.rows();
    Matrix yy = Matrix::Zero(n, n);
    Matrix zz = Matrix::Zero(n, n);
    if (bath.y.cols() > 0) yy = bath.y * bath.y.adjoint();
    if (bath.z.cols() > 0) zz = bath.z * bath.z.adjoint();

    DecompositionReport report;
    report.diff_residual = (yy - zz - m).cwiseAbs().maxCoeff();
    const double lhs = gram_11(chi, bath.y) - gram_11(chi, bath.z);
    report.xi_residual = std::abs(lhs - 0.5 * k1 * xi_functional(chi, k1, k2));
    report.valid = report.diff_residual < kDecompositionTol &&
                   report.xi_residual < kDecompositionTol;
    return report;
}

NoiseBudget noise_budget(const BathCoupling& bath, const Matrix& chi,
                         double k1, double k2) {
    NoiseBudget budget;
    budget.xi = xi_functional(chi, k1, k2);
    budget.shot = 0.5 * k1;
    budget.excess = 2.0 * std::max(budget.xi, 0.0);
    budget.achieved = achieved_noise(bath, chi, k1);
    return budget;
}

}  // namespace nhsense
