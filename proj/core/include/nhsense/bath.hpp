// bath.hpp — gain/loss bath couplings realizing the anti-Hermitian part of
// the effective Hamiltonian, and noise-optimal constructions.
//
// A coupling pair (Y, Z) is valid for a Hermitian matrix M when
// Y*Y^dag - Z*Z^dag == M. The Gram matrix Y*Y^dag describes gain processes,
// Z*Z^dag loss processes. The homodyne noise power density of a measurement
// through mode 1 only depends on (chi*Y*Y^dag*chi^dag)_11, which is bounded
// below by max(0, (k1/2)*Xi); the constructions here attain that bound.

#pragma once

#include <Eigen/Dense>

#include "nhsense/system.hpp"

namespace nhsense {

inline constexpr double kBathColumnTol = 1e-12;   // eigenvalue -> column cutoff
inline constexpr double kDecompositionTol = 1e-9; // validity residuals
inline constexpr double kDefaultAttainTol = 1e-6; // relative, noise attainment
inline constexpr double kDefaultAlphaMax = 1e6;

/// Mode-bath coupling matrices. y is N x N_Y (gain), z is N x N_Z (loss);
/// either may have zero columns.
struct BathCoupling {
    Matrix y;
    Matrix z;

    Matrix gain_gram() const { return y.cols() ? Matrix(y * y.adjoint()) : Matrix(); }
    Matrix loss_gram() const { return z.cols() ? Matrix(z * z.adjoint()) : Matrix(); }
};

/// Noise accounting for one decomposition, densities per unit tau in units
/// where the shot floor is k1/2.
struct NoiseBudget {
    double xi = 0.0;        // excess-noise functional Xi(Delta)
    double shot = 0.0;      // k1/2
    double excess = 0.0;    // 2*Xi*Theta(Xi), fraction of shot above the floor
    double achieved = 0.0;  // noise density of the concrete (Y, Z)
};

struct DecompositionReport {
    double diff_residual = 0.0;  // max-norm of Y*Y^dag - Z*Z^dag - M
    double xi_residual = 0.0;    // |(chi Y Y^dag chi^dag)_11 - (chi Z Z^dag chi^dag)_11 - (k1/2) Xi|
    bool valid = false;
};

/// M = (h - h^dag) / (2i); Hermitian by construction.
/// Throws InvalidSystemError for non-square input.
Matrix antihermitian_part(const Matrix& h0);

/// Eigen-decomposition split: positive eigenpairs become gain columns
/// sqrt(lambda)*v, negative ones loss columns sqrt(-lambda)*v. Eigenvalues
/// with magnitude <= column_tol produce no column.
BathCoupling spectral_decomposition(const Matrix& m,
                                    double column_tol = kBathColumnTol);

/// Excess-noise functional of the transfer matrix,
///   Xi = -(chi_11 + conj(chi_11)) + |chi_11|^2 + (k2/k1)|chi_12|^2.
double xi_functional(const Matrix& chi, double k1, double k2);

/// Noise power density per unit tau of a concrete decomposition,
///   N/tau = (k1/2) * (1 + (4/k1) * (chi Y Y^dag chi^dag)_11).
double achieved_noise(const BathCoupling& bath, const Matrix& chi, double k1);

/// Builds a valid (Y, Z) for M whose achieved noise meets the minimum
/// (k1/2)(1 + 2*Xi*Theta(Xi)) within tol (relative). Construction: with
/// v = chi^dag e1, add alpha * P to the branch that must stay clear of v
/// (P the projector onto the orthogonal complement of v), doubling alpha
/// from 1 until the complementary Gram matrix is positive semidefinite.
/// chi must come from a k1-normalized system (transfer matrices from this
/// library always are). Throws ConstructionInfeasibleError when no
/// alpha <= alpha_max works.
BathCoupling min_noise_decomposition(const Matrix& m, const Matrix& chi,
                                     double tol = kDefaultAttainTol,
                                     double alpha_max = kDefaultAlphaMax);

/// Diagnostic residuals of a decomposition against its system (never throws
/// on bad decompositions; both residuals must be < 1e-9 for "valid").
DecompositionReport validate_decomposition(const BathCoupling& bath,
                                           const Matrix& m, const Matrix& chi,
                                           double k1, double k2);

/// Budget summary (shot floor, excess fraction, achieved) for a bath.
NoiseBudget noise_budget(const BathCoupling& bath, const Matrix& chi,
                         double k1, double k2);

}  // namespace nhsense
