#include "nhsense/models.hpp"

#include <cmath>

namespace nhsense {

namespace {

constexpr Complex kImag{0.0, 1.0};

Matrix pauli_x_half() {
    Matrix v(2, 2);
    v << 0.0, 0.5, 0.5, 0.0;
    return v;
}

}  // namespace

SensorSystem build_reciprocal(const ReciprocalParams& params, double k1,
                              double k2, double beta1, double beta2) {
    Matrix h0(2, 2);
    h0 << -kImag * params.gamma1 / 2.0, Complex(params.j, 0.0),
          Complex(params.j, 0.0), -kImag * params.gamma2 / 2.0;
    return make_sensor_system(h0 * k1, pauli_x_half() * k1, k1, k2, beta1,
                              beta2, ModelTag::reciprocal);
}

SensorSystem build_nonreciprocal(const NonReciprocalParams& params, double k1,
                                 double k2, double beta1, double beta2) {
    Matrix h0(2, 2);
    h0 << -kImag * params.gamma1 / 2.0, Complex(params.j, 0.0),
          Complex(0.0, 0.0), Complex(params.nu2, 0.0) - kImag * params.gamma2 / 2.0;
    return make_sensor_system(h0 * k1, pauli_x_half() * k1, k1, k2, beta1,
                              beta2, ModelTag::nonreciprocal);
}

Matrix closed_form_chi_reciprocal(const ReciprocalParams& params, double k1,
                                  double k2, double delta) {
    // Rates here are in units of k1, matching the builders.
    const Complex d1 = delta + kImag * 0.5 * (1.0 + params.gamma1);
    const Complex d2 = delta + kImag * 0.5 * (k2 / k1 + params.gamma2);
    const Complex g = -params.j * params.j + d1 * d2;
    if (std::abs(g) < kPoleTol)
        throw SingularityError("closed_form_chi_reciprocal: resolvent pole");
    Matrix chi(2, 2);
    chi << d2, Complex(params.j, 0.0), Complex(params.j, 0.0), d1;
    return kImag / g * chi;
}

Matrix closed_form_chi_nonreciprocal(const NonReciprocalParams& params,
                                     double k1, double k2, double delta) {
    const Complex d1 = delta + kImag * 0.5 * (1.0 + params.gamma1);
    // nu2 shifts the mode-2 resonance, so it enters this denominator.
    const Complex d2 = delta - params.nu2 + kImag * 0.5 * (k2 / k1 + params.gamma2);
    if (std::abs(d1) < kPoleTol || std::abs(d2) < kPoleTol)
        throw SingularityError("closed_form_chi_nonreciprocal: resolvent pole");
    Matrix chi(2, 2);
    chi << kImag / d1, kImag * params.j / (d1 * d2), Complex(0.0, 0.0), kImag / d2;
    return chi;
}

}  // namespace nhsense
