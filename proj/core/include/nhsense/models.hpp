// models.hpp — canonical two-mode sensor families and their analytic
// transfer matrices, used as an independent route against the generic
// LU-based resolvent.

#pragma once

#include "nhsense/system.hpp"

namespace nhsense {

inline constexpr double kPoleTol = 1e-14;

/// Local gain/loss rates (negative = gain) and Hermitian inter-mode coupling,
/// all in units of k1.
struct ReciprocalParams {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double j = 0.0;
};

/// One-way coupled pair: J feeds mode 2 into mode 1 only; nu2 is the mode-2
/// frequency offset.
struct NonReciprocalParams {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double nu2 = 0.0;
    double j = 0.0;
};

/// h0 = [[-i g1/2, J], [J, -i g2/2]], v = sigma_x / 2.
SensorSystem build_reciprocal(const ReciprocalParams& params, double k1,
                              double k2, double beta1, double beta2);

/// h0 = [[-i g1/2, J], [0, nu2 - i g2/2]], v = sigma_x / 2.
SensorSystem build_nonreciprocal(const NonReciprocalParams& params, double k1,
                                 double k2, double beta1, double beta2);

/// Analytic chi of the reciprocal family,
///   chi = (i k1 / G) [[D2, J], [J, D1]],  D_i = Delta + i (k_i + gamma_i)/2,
///   G = -J^2 + D1 * D2.
/// Throws SingularityError when |G| < kPoleTol.
Matrix closed_form_chi_reciprocal(const ReciprocalParams& params, double k1,
                                  double k2, double delta);

/// Analytic chi of the one-way family, upper triangular with
///   chi_11 = i k1 / D1, chi_12 = i k1 J / (D1 D2), chi_21 = 0,
///   D2 = Delta - nu2 + i (k2 + gamma2)/2.
/// Throws SingularityError when either denominator magnitude < kPoleTol.
Matrix closed_form_chi_nonreciprocal(const NonReciprocalParams& params,
                                     double k1, double k2, double delta);

}  // namespace nhsense
