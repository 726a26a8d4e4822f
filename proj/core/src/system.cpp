#include "nhsense/system.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace nhsense {

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

namespace {

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

// K1 + K2 damping matrix, diag(k1, k2, 0, ...).
Matrix port_coupling(const SensorSystem& sys) {
    Matrix k = Matrix::Zero(sys.n_modes(), sys.n_modes());
    k(0, 0) = sys.k1;
    if (sys.n_modes() > 1) k(1, 1) = sys.k2;
    return k;
}

}  // namespace

SensorSystem make_sensor_system(Matrix h0, Matrix v, double k1, double k2,
                                double beta1, double beta2, ModelTag tag) {
    if (h0.rows() != h0.cols() || h0.rows() < 1)
        throw InvalidSystemError("sensor system: h0 must be square, N >= 1");
    if (v.rows() != h0.rows() || v.cols() != h0.cols())
        throw InvalidSystemError("sensor system: v must match h0 dimensions");
    if (!all_finite(h0) || !all_finite(v))
        throw InvalidSystemError("sensor system: non-finite matrix entry");
    if (!std::isfinite(k1) || k1 <= 0.0)
        throw InvalidSystemError("sensor system: k1 must be positive");
    if (!std::isfinite(k2) || k2 < 0.0)
        throw InvalidSystemError("sensor system: k2 must be >= 0");
    if (!std::isfinite(beta1) || beta1 < 0.0 || !std::isfinite(beta2) || beta2 < 0.0)
        throw InvalidSystemError("sensor system: drive amplitudes must be >= 0");
    if (h0.rows() < 2 && (k2 > 0.0 || beta2 > 0.0))
        throw InvalidSystemError("sensor system: mode 2 port requires N >= 2");

    SensorSystem sys;
    sys.h0 = h0 / k1;
    sys.v = v / k1;
    sys.k1 = 1.0;
    sys.k2 = k2 / k1;
    sys.beta1 = beta1 / std::sqrt(k1);
    sys.beta2 = beta2 / std::sqrt(k1);
    sys.tag = tag;

    // Frequency reference: Re h0(0,0) == 0.
    const double shift = sys.h0(0, 0).real();
    if (std::abs(shift) > 0.0) {
        sys.h0 -= shift * Matrix::Identity(sys.n_modes(), sys.n_modes());
        sys.reference_shift = shift;
    }
    return sys;
}

Matrix dynamics_matrix(const SensorSystem& sys, double delta, double eps) {
    if (!std::isfinite(delta) || !std::isfinite(eps))
        throw InvalidSystemError("dynamics_matrix: delta and eps must be finite");
    const Eigen::Index n = sys.n_modes();
    const Complex i(0.0, 1.0);
    Matrix h = sys.h0 + eps * sys.v;
    return i * delta * Matrix::Identity(n, n) - i * (h - i * 0.5 * port_coupling(sys));
}

Vector drive_vector(const SensorSystem& sys) {
    Vector b = Vector::Zero(sys.n_modes());
    const Complex i(0.0, 1.0);
    b(0) = -i * std::sqrt(sys.k1) * sys.beta1;
    if (sys.n_modes() > 1) b(1) = -i * std::sqrt(sys.k2) * sys.beta2;
    return b;
}

StabilityReport stability(const SensorSystem& sys, double delta, double eps,
                          double margin) {
    const Matrix a = dynamics_matrix(sys, delta, eps);
    Eigen::ComplexEigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw NumericFailureError("stability: eigenvalue iteration did not converge");
    StabilityReport report;
    const auto& ev = solver.eigenvalues();
    report.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
              [](const Complex& a, const Complex& b) { return a.real() > b.real(); });
    report.stable = report.eigenvalues.empty()
                        ? false
                        : report.eigenvalues.front().real() < -margin;
    return report;
}

bool is_stable(const SensorSystem& sys, double delta, double eps, double margin) {
    return stability(sys, delta, eps, margin).stable;
}

Matrix transfer_matrix_unchecked(const SensorSystem& sys, double delta, double eps) {
    const Eigen::Index n = sys.n_modes();
    const Complex i(0.0, 1.0);
    const Matrix h = sys.h0 + eps * sys.v;
    const Matrix m = delta * Matrix::Identity(n, n) - h + i * 0.5 * port_coupling(sys);
    Eigen::PartialPivLU<Matrix> lu(m);
    const Matrix chi = lu.solve(i * sys.k1 * Matrix::Identity(n, n));
    const double residual =
        (chi * m - i * sys.k1 * Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!chi.allFinite() || residual >= kResolventResidualTol)
        throw SingularityError("transfer_matrix: singular resolvent (residual " +
                               std::to_string(residual) + ")");
    return chi;
}

Matrix transfer_matrix(const SensorSystem& sys, double delta, double eps) {
    if (!is_stable(sys, delta, eps))
        throw InstabilityError("transfer_matrix: dynamics not strictly stable");
    return transfer_matrix_unchecked(sys, delta, eps);
}

SensorSystem single_drive_variant(const SensorSystem& sys) {
    SensorSystem s = sys;
    s.k2 = 0.0;
    s.beta2 = 0.0;
    return s;
}

}  // namespace nhsense
