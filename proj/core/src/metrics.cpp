#include "nhsense/metrics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

namespace nhsense {

namespace {

constexpr Complex kImag{0.0, 1.0};

double noise_factor(double xi) {
    return 1.0 + 2.0 * std::max(xi, 0.0);
}

double spectral_norm(const Matrix& m) {
    return m.jacobiSvd().singularValues()(0);
}

}  // namespace

ResponseResult response_coefficient(const Matrix& chi, const Matrix& v,
                                    double k1, double k2, double beta1,
                                    double beta2) {
    if (chi.rows() != chi.cols() || v.rows() != chi.rows() || v.cols() != chi.cols())
        throw InvalidSystemError("response_coefficient: chi/V dimension mismatch");
    const Matrix cvc = chi * v * chi;
    Complex lambda = kImag * (beta1 / k1) * cvc(0, 0);
    if (chi.rows() > 1)
        lambda += kImag * std::sqrt(k2 / k1) * (beta2 / k1) * cvc(0, 1);

    ResponseResult result;
    result.lambda = lambda;
    if (std::abs(lambda) == 0.0) {
        result.degenerate = true;  // phase undefined at zero signal
        result.phi = 0.0;
    } else {
        result.phi = -std::arg(lambda);
    }
    return result;
}

double signal_power_density(Complex lambda, double k1) {
    return 2.0 * k1 * std::norm(lambda);
}

NoisePair noise_power_density(const BathCoupling& bath, const Matrix& chi,
                              double k1, double k2) {
    if ((bath.y.cols() > 0 && bath.y.rows() != chi.rows()) ||
        (bath.z.cols() > 0 && bath.z.rows() != chi.rows()))
        throw InvalidSystemError("noise_power_density: bath/chi dimension mismatch");

    const double gain_11 =
        bath.y.cols() ? (chi.row(0) * bath.y).squaredNorm() : 0.0;
    const double loss_11 =
        bath.z.cols() ? (chi.row(0) * bath.z).squaredNorm() : 0.0;

    double raw = std::norm(1.0 - chi(0, 0));
    if (chi.cols() > 1) raw += (k2 / k1) * std::norm(chi(0, 1));
    raw += (2.0 / k1) * (gain_11 + loss_11);

    NoisePair pair;
    pair.raw = 0.5 * k1 * raw;
    pair.simplified = 0.5 * k1 * (1.0 + (4.0 / k1) * gain_11);
    return pair;
}

MinNoise min_noise_density(const Matrix& chi, double k1, double k2) {
    MinNoise result;
    result.xi = xi_functional(chi, k1, k2);
    result.density = 0.5 * k1 * noise_factor(result.xi);
    return result;
}

double total_photons(const Matrix& chi, double k1, double k2, double beta1,
                     double beta2) {
    const Matrix g = chi.adjoint() * chi;
    double n = beta1 * beta1 / k1 * g(0, 0).real();
    if (chi.rows() > 1) {
        n += k2 / (k1 * k1) * beta2 * beta2 * g(1, 1).real();
        n += std::sqrt(k1 * k2) / (k1 * k1) * beta1 * beta2 *
             (g(0, 1) + g(1, 0)).real();
    }
    return n;
}

MetricsReport measurement_rate(const SensorSystem& sys, double delta,
                               const BathCoupling* bath) {
    if (sys.beta1 == 0.0 && sys.beta2 == 0.0)
        throw InvalidSystemError("measurement_rate: zero photon number (no drive)");

    const Matrix chi = transfer_matrix(sys, delta);

    BathCoupling local;
    if (bath == nullptr) {
        local = spectral_decomposition(antihermitian_part(sys.h0));
        bath = &local;
    }

    MetricsReport report;
    report.stable = true;
    const ResponseResult resp =
        response_coefficient(chi, sys.v, sys.k1, sys.k2, sys.beta1, sys.beta2);
    report.lambda = resp.lambda;
    report.phi = resp.phi;
    report.phi_degenerate = resp.degenerate;
    report.signal_density = signal_power_density(resp.lambda, sys.k1);

    const NoisePair noise = noise_power_density(*bath, chi, sys.k1, sys.k2);
    report.noise_density_raw = noise.raw;
    report.noise_density = noise.simplified;

    const MinNoise mn = min_noise_density(chi, sys.k1, sys.k2);
    report.xi = mn.xi;
    report.noise_density_min = mn.density;

    report.n_tot = total_photons(chi, sys.k1, sys.k2, sys.beta1, sys.beta2);
    if (!(report.n_tot > 0.0))
        throw InvalidSystemError("measurement_rate: zero photon number");

    // Gamma/k1 = k1 * S_density / (N_density * n_tot).
    report.gamma_meas =
        sys.k1 * report.signal_density / (report.noise_density * report.n_tot);
    report.gamma_opt =
        sys.k1 * report.signal_density / (report.noise_density_min * report.n_tot);
    return report;
}

double two_mode_rate(const Matrix& chi, double eta, double p, double k1) {
    if (chi.rows() != 2 || chi.cols() != 2)
        throw InvalidSystemError("two_mode_rate: chi must be 2x2");
    const Complex c11 = chi(0, 0), c12 = chi(0, 1), c21 = chi(1, 0), c22 = chi(1, 1);
    const Complex sum_off = c12 + c21;            // enters the drive-1 signal
    const Complex cross = c12 * c12 + c11 * c22;  // enters the drive-2 signal
    const double root_eta_p = std::sqrt(eta) * p;

    const double num = std::norm(c11) * std::norm(sum_off) +
                       2.0 * root_eta_p *
                           (c11 * sum_off * std::conj(cross)).real() +
                       root_eta_p * root_eta_p * std::norm(cross);
    const double den =
        std::norm(c11) + std::norm(c21) +
        2.0 * root_eta_p * (c12 * std::conj(c11) + std::conj(c21) * c22).real() +
        root_eta_p * root_eta_p * (std::norm(c12) + std::norm(c22));

    const double xi = xi_functional(chi, 1.0, eta);
    return num / den * k1 / noise_factor(xi);
}

double optimal_rate_from_chi(const Matrix& chi, const Matrix& v, double k1,
                             double k2, double beta1, double beta2) {
    const ResponseResult resp =
        response_coefficient(chi, v, k1, k2, beta1, beta2);
    const double signal = signal_power_density(resp.lambda, k1);
    const MinNoise mn = min_noise_density(chi, k1, k2);
    const double n = total_photons(chi, k1, k2, beta1, beta2);
    if (!(n > 0.0))
        throw InvalidSystemError("optimal_rate_from_chi: zero photon number");
    return k1 * signal / (mn.density * n);
}

AsymptoticBound asymptotic_bound(const Matrix& chi, double eta, double k1) {
    if (chi.rows() != 2 || chi.cols() != 2)
        throw InvalidSystemError("asymptotic_bound: chi must be 2x2");
    const Complex cross = chi(0, 1) * chi(0, 1) + chi(0, 0) * chi(1, 1);
    const double xi = xi_functional(chi, 1.0, eta);

    AsymptoticBound bound;
    bound.limit_rate = std::norm(cross) /
                       (std::norm(chi(0, 1)) + std::norm(chi(1, 1))) * k1 /
                       noise_factor(xi);
    if (eta > 0.0) bound.uniform_bound = 0.5 * k1 / eta;
    return bound;
}

ConditionReport check_conditions(const Matrix& chi, double p,
                                 const std::optional<ReciprocalConditionInput>& params,
                                 double threshold) {
    if (chi.rows() != 2 || chi.cols() != 2)
        throw InvalidSystemError("check_conditions: chi must be 2x2");
    constexpr double inf = std::numeric_limits<double>::infinity();

    ConditionReport report;
    const double c12 = std::abs(chi(0, 1));
    const double c21 = std::abs(chi(1, 0));
    const double c11 = std::abs(chi(0, 0));
    const double c22 = std::abs(chi(1, 1));

    report.margin_chi12 = c12 / std::max({c11, c22, 1.0});
    report.cond_chi12 = report.margin_chi12 >= threshold;

    const double p_scale = c12 * c12 * c12 * (c12 + c21);
    report.margin_p = p_scale > 0.0 ? p / p_scale : (p > 0.0 ? inf : 0.0);
    report.cond_p = report.margin_p >= threshold;

    report.dominance_factor =
        std::min({c11 > 0.0 ? c12 / c11 : inf, c22 > 0.0 ? c12 / c22 : inf, c12});

    if (params) {
        const double k1 = params->k1;
        const double slack = std::max({std::abs(params->delta),
                                       std::abs(params->k1 + params->gamma1),
                                       std::abs(params->k2 + params->gamma2)});
        report.cond_resonant = slack <= k1 / threshold;
        const double j = std::abs(params->j);
        report.cond_hierarchy = k1 >= threshold * j && j >= threshold * slack;
    }
    return report;
}

double detuned_rate(const SensorSystem& sys, double delta_i, double drive_gap,
                    DetunedCase which, double threshold) {
    const double gap = std::abs(drive_gap);
    const double fast_scale =
        std::max({std::abs(delta_i), spectral_norm(sys.h0), sys.k1, sys.k2,
                  std::sqrt(sys.k1) * sys.beta1, std::sqrt(sys.k2) * sys.beta2});
    if (gap < threshold * fast_scale)
        throw RwaInvalidError("detuned_rate: drive gap / system scale = " +
                              std::to_string(fast_scale > 0 ? gap / fast_scale : 0.0) +
                              ", below threshold " + std::to_string(threshold));
    if (sys.beta1 == 0.0 && sys.beta2 == 0.0)
        throw InvalidSystemError("detuned_rate: zero photon number (no drive)");

    const double eta = sys.eta();
    const double b1sq = sys.beta1 * sys.beta1;
    const double b2sq = sys.beta2 * sys.beta2;
    const Matrix chi = transfer_matrix(sys, delta_i);
    const Matrix cvc = chi * sys.v * chi;
    const double xi = xi_functional(chi, sys.k1, sys.k2);

    if (which == DetunedCase::one) {
        // Signal survives only through drive 1; drive 2 still costs photons,
        // evaluated at its own (shifted) detuning.
        const Matrix chi_shift = transfer_matrix(sys, delta_i - drive_gap);
        const double photons =
            b1sq * chi.col(0).squaredNorm() +
            (sys.n_modes() > 1 ? eta * b2sq * chi_shift.col(1).squaredNorm() : 0.0);
        const double num = 4.0 * sys.k1 * b1sq * std::norm(cvc(0, 0));
        return num / (photons * noise_factor(xi));
    }

    if (sys.n_modes() < 2)
        throw InvalidSystemError("detuned_rate: case two requires N >= 2");
    const Matrix chi_shift = transfer_matrix(sys, delta_i + drive_gap);
    const double photons = b1sq * chi_shift.col(0).squaredNorm() +
                           eta * b2sq * chi.col(1).squaredNorm();
    const double num = 4.0 * sys.k1 * eta * b2sq * std::norm(cvc(0, 1));
    return num / (photons * noise_factor(xi));
}

}  // namespace nhsense
