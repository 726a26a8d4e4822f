// system.hpp — sensor model: drift matrix, stability test, transfer matrix.
//
// Conventions. All rates are expressed in units of the mode-1 waveguide
// coupling k1; the factory normalizes physical inputs so that k1 == 1
// internally. The frequency reference is fixed so that Re h0(0,0) == 0;
// a nonzero real part is subtracted on construction and recorded.

#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nhsense/errors.hpp"

namespace nhsense {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kStabilityMargin = 1e-10;
inline constexpr double kResolventResidualTol = 1e-10;
inline constexpr double kHermitianTol = 1e-12;

/// True if m equals its own adjoint entrywise within tol (absolute).
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

enum class ModelTag { generic, reciprocal, nonreciprocal };

/// A linear sensor: unperturbed effective Hamiltonian h0 (non-Hermitian,
/// N x N), perturbation coupling v, waveguide couplings on modes 1 and 2,
/// and coherent drive amplitudes. Use make_sensor_system to build one.
struct SensorSystem {
    Matrix h0;               // H[0] in units of k1, Re h0(0,0) == 0
    Matrix v;                // dH/deps in units of k1
    double k1 = 1.0;         // always 1 after normalization
    double k2 = 0.0;         // k2/k1
    double beta1 = 0.0;      // beta1 / sqrt(k1_physical)
    double beta2 = 0.0;
    double reference_shift = 0.0;  // Re h0(0,0) removed on construction
    ModelTag tag = ModelTag::generic;

    Eigen::Index n_modes() const { return h0.rows(); }
    double eta() const { return k2 / k1; }
    double drive_ratio() const { return beta1 > 0.0 ? beta2 / beta1 : 0.0; }
};

/// Dimensionless drive/coupling ratios of the two-port setup.
struct DriveRatio {
    double p = 0.0;    // beta2 / beta1
    double eta = 0.0;  // k2 / k1
};

/// Validates and normalizes a sensor description. h0 and v are given in the
/// same physical rate units as k1; both are divided by k1, as are k2 and
/// delta-like quantities downstream. Re h0(0,0) is re-referenced to zero.
/// Throws InvalidSystemError on dimension mismatch, non-finite entries,
/// k1 <= 0, k2 < 0 or negative drive amplitudes.
SensorSystem make_sensor_system(Matrix h0, Matrix v, double k1, double k2,
                                double beta1, double beta2,
                                ModelTag tag = ModelTag::generic);

/// Drift matrix of the mean dynamics,
///   A = i*delta*I - i*(H[eps] - i*K1/2 - i*K2/2),   H[eps] = h0 + eps*v.
Matrix dynamics_matrix(const SensorSystem& sys, double delta, double eps);

/// Coherent drive vector b with b1 = -i*sqrt(k1)*beta1, b2 = -i*sqrt(k2)*beta2.
Vector drive_vector(const SensorSystem& sys);

struct StabilityReport {
    bool stable = false;
    std::vector<Complex> eigenvalues;  // sorted by real part, descending
};

/// Stable iff every drift eigenvalue has real part < -margin.
StabilityReport stability(const SensorSystem& sys, double delta, double eps,
                          double margin = kStabilityMargin);

bool is_stable(const SensorSystem& sys, double delta, double eps = 0.0,
               double margin = kStabilityMargin);

/// Zero-frequency transfer matrix
///   chi(eps) = i*k1*(delta*I - H[eps] + i*K1/2 + i*K2/2)^{-1}.
/// Refuses unstable systems (InstabilityError); verifies the resolvent
/// residual (SingularityError on failure).
Matrix transfer_matrix(const SensorSystem& sys, double delta, double eps = 0.0);

/// Same resolvent without the stability gate; used for comparison curves of
/// formally unstable reference systems (still refuses singular resolvents).
Matrix transfer_matrix_unchecked(const SensorSystem& sys, double delta,
                                 double eps = 0.0);

/// The k2 = 0, beta2 = 0 variant of sys (single-drive reference).
SensorSystem single_drive_variant(const SensorSystem& sys);

}  // namespace nhsense
