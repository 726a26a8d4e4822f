// metrics.hpp — homodyne signal, noise, photon number and measurement-rate
// formulas for the driven non-Hermitian sensor.
//
// The figure of merit throughout is the measurement rate per photon
//   Gamma = k1^2 * S / (N * tau * n_tot * eps^2),
// reported in units of k1 (dimensionless; systems are k1-normalized).
// Gamma_meas uses the noise of a concrete bath realization; Gamma_opt uses
// the minimized noise (k1/2)(1 + 2*Xi*Theta(Xi)).

#pragma once

#include <optional>

#include "nhsense/bath.hpp"
#include "nhsense/system.hpp"

namespace nhsense {

inline constexpr double kDefaultDominanceThreshold = 10.0;

/// Linear response of the mode-1 output mean to the perturbation.
struct ResponseResult {
    Complex lambda{0.0, 0.0};
    double phi = 0.0;        // homodyne angle, -arg(lambda); 0 when degenerate
    bool degenerate = false; // lambda == 0, phase undefined
};

/// lambda = i*(beta1/k1)*(chi V chi)_11 + i*sqrt(k2/k1)*(beta2/k1)*(chi V chi)_12.
ResponseResult response_coefficient(const Matrix& chi, const Matrix& v,
                                    double k1, double k2, double beta1,
                                    double beta2);

/// Signal power density S/(eps^2 tau^2) = 2*k1*|lambda|^2.
double signal_power_density(Complex lambda, double k1);

struct NoisePair {
    double raw = 0.0;         // |1-chi_11|^2 + eta|chi_12|^2 + channel terms
    double simplified = 0.0;  // 1 + (4/k1)(chi Y Y^dag chi^dag)_11
};

/// Both routes to the noise power density per unit tau; they agree for valid
/// decompositions.
NoisePair noise_power_density(const BathCoupling& bath, const Matrix& chi,
                              double k1, double k2);

struct MinNoise {
    double xi = 0.0;
    double density = 0.0;  // (k1/2)(1 + 2*Xi*Theta(Xi))
};

MinNoise min_noise_density(const Matrix& chi, double k1, double k2);

/// Coherent photon number summed over modes, per Eq.-(11)-style bookkeeping:
///   n = (beta1^2/k1) g_11 + (k2/k1^2) beta2^2 g_22
///     + (sqrt(k1 k2)/k1^2) beta1 beta2 (g_12 + g_21),   g = chi^dag chi.
double total_photons(const Matrix& chi, double k1, double k2, double beta1,
                     double beta2);

struct MetricsReport {
    Complex lambda{0.0, 0.0};
    double phi = 0.0;
    double signal_density = 0.0;
    double noise_density_raw = 0.0;
    double noise_density = 0.0;
    double noise_density_min = 0.0;
    double xi = 0.0;
    double n_tot = 0.0;
    double gamma_meas = 0.0;  // in units of k1
    double gamma_opt = 0.0;   // in units of k1
    bool stable = false;
    bool phi_degenerate = false;
};

/// Full report at one detuning. If no bath is supplied, the spectral
/// decomposition of the anti-Hermitian part of h0 is used for gamma_meas.
/// Throws InstabilityError for unstable dynamics and InvalidSystemError
/// when both drives vanish (zero photon number).
MetricsReport measurement_rate(const SensorSystem& sys, double delta,
                               const BathCoupling* bath = nullptr);

/// Best possible rate of a two-mode sensor with V = sigma_x/2, as a closed
/// form in the transfer-matrix entries and the drive/coupling ratios.
double two_mode_rate(const Matrix& chi, double eta, double p, double k1);

/// Gamma_opt/k1 assembled directly from a transfer matrix (signal over
/// minimized noise and photon number). Equals two_mode_rate for two-mode
/// systems with V = sigma_x/2. Returns the rate or throws InvalidSystemError
/// when the photon number vanishes.
double optimal_rate_from_chi(const Matrix& chi, const Matrix& v, double k1,
                             double k2, double beta1, double beta2);

struct AsymptoticBound {
    double limit_rate = 0.0;                 // p -> infinity value
    std::optional<double> uniform_bound;     // (1/2)(k1/k2)*k1; empty if eta == 0
};

/// Large-drive-ratio limit of two_mode_rate and the coupling-only bound it
/// approaches when |chi_12| dominates.
AsymptoticBound asymptotic_bound(const Matrix& chi, double eta, double k1);

/// Margins for the attainability conditions. Every "much greater" condition
/// is scored as a ratio and compared against `threshold` (default 10).
struct ConditionReport {
    bool cond_chi12 = false;       // |chi_12| >> max(|chi_11|, |chi_22|, 1)
    double margin_chi12 = 0.0;
    bool cond_p = false;           // p >> |chi_12|^3 (|chi_12| + |chi_21|)
    double margin_p = 0.0;
    bool cond_resonant = false;    // |Delta|, |k_i + gamma_i| small vs k1
    bool cond_hierarchy = false;   // k1 >> |J| >> max(|Delta|, |k_i + gamma_i|)
    double dominance_factor = 0.0; // min(|chi12|/|chi11|, |chi12|/|chi22|, |chi12|)
};

/// Parameters needed for the resonance/hierarchy checks of the reciprocal
/// model; pass nullopt for generic systems (those flags stay false).
struct ReciprocalConditionInput {
    double delta = 0.0;
    double k1 = 1.0;
    double k2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double j = 0.0;
};

ConditionReport check_conditions(const Matrix& chi, double p,
                                 const std::optional<ReciprocalConditionInput>& params,
                                 double threshold = kDefaultDominanceThreshold);

enum class DetunedCase { one, two };

/// Best possible measurement rate per photon when the two drive frequencies
/// differ by drive_gap (in units of k1) and the rapidly oscillating drive is
/// averaged away. Case one keeps drive 1's signal and both drives' photons;
/// case two keeps drive 2's signal, with the drive-1 photons evaluated at
/// the shifted detuning. Validity requires
///   |drive_gap| >= threshold * max(|delta_i|, ||H||, k_i, sqrt(k_i) beta_i)
/// or the call is refused (RwaInvalidError reporting the failing ratio).
double detuned_rate(const SensorSystem& sys, double delta_i, double drive_gap,
                    DetunedCase which,
                    double threshold = kDefaultDominanceThreshold);

}  // namespace nhsense
