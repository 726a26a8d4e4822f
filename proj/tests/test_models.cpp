#include <doctest.h>

#include <cmath>
#include <random>

#include "nhsense/metrics.hpp"
#include "nhsense/models.hpp"
#include "testing_support.hpp"

using namespace nhsense;

TEST_CASE("builders produce the expected Hamiltonians") {
    const SensorSystem f2 = nhtest::fig2_system();
    CHECK(f2.tag == ModelTag::reciprocal);
    CHECK(std::abs(f2.h0(0, 0) - Complex(0.0, 0.495)) < 1e-15);
    CHECK(std::abs(f2.h0(1, 1) - Complex(0.0, 0.0055)) < 1e-15);
    CHECK(std::abs(f2.h0(0, 1) - Complex(0.16, 0.0)) < 1e-15);
    CHECK(std::abs(f2.v(0, 1) - Complex(0.5, 0.0)) < 1e-15);

    const SensorSystem zero = build_reciprocal({0.0, 0.0, 0.0}, 1, 0, 1, 0);
    CHECK(zero.h0.cwiseAbs().maxCoeff() == 0.0);

    const SensorSystem cb = nhtest::no_gain_system();
    CHECK(std::abs(cb.h0(1, 1) - Complex(0.0, -0.1)) < 1e-15);
    CHECK(std::abs(cb.h0(0, 1) - Complex(0.2, 0.0)) < 1e-15);

    const SensorSystem f3 = nhtest::fig3_system();
    CHECK(f3.tag == ModelTag::nonreciprocal);
    CHECK(f3.h0(1, 0) == Complex(0.0, 0.0));
    CHECK(std::abs(f3.h0(0, 1) - Complex(1.5, 0.0)) < 1e-15);

    const SensorSystem diag = build_nonreciprocal({1.0, 0.5, 0.3, 0.0}, 1, 0, 1, 0);
    CHECK(diag.h0(0, 1) == Complex(0.0, 0.0));
    CHECK(std::abs(diag.h0(1, 1) - Complex(0.3, -0.25)) < 1e-15);
}

TEST_CASE("closed forms match the generic resolvent") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> gamma(0.05, 2.0);
    std::uniform_real_distribution<double> coupling(-2.0, 2.0);
    std::uniform_real_distribution<double> detuning(-3.0, 3.0);
    std::uniform_real_distribution<double> port(0.0, 1.0);

    for (int trial = 0; trial < 100; ++trial) {
        const ReciprocalParams params{gamma(rng), gamma(rng), coupling(rng)};
        const double k2 = port(rng);
        const double delta = detuning(rng);
        const SensorSystem sys = build_reciprocal(params, 1.0, k2, 1.0, 0.0);
        const Matrix by_lu = transfer_matrix(sys, delta);
        const Matrix by_formula = closed_form_chi_reciprocal(params, 1.0, k2, delta);
        CHECK((by_lu - by_formula).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(std::abs(by_lu(0, 1)) - std::abs(by_lu(1, 0))) < 1e-12);
    }

    for (int trial = 0; trial < 100; ++trial) {
        const NonReciprocalParams params{gamma(rng), gamma(rng), coupling(rng),
                                         coupling(rng)};
        const double k2 = port(rng);
        const double delta = detuning(rng);
        const SensorSystem sys = build_nonreciprocal(params, 1.0, k2, 1.0, 0.0);
        const Matrix by_lu = transfer_matrix(sys, delta);
        const Matrix by_formula =
            closed_form_chi_nonreciprocal(params, 1.0, k2, delta);
        CHECK((by_lu - by_formula).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(by_lu(1, 0) == Complex(0.0, 0.0));
    }
}

TEST_CASE("closed-form corner cases") {
    // Decoupled reciprocal resolvent is diagonal with i k1 / D_i entries.
    const Matrix chi = closed_form_chi_reciprocal({0.4, 0.8, 0.0}, 1.0, 0.2, 0.3);
    const Complex d1 = 0.3 + Complex(0.0, 0.5) * (1.0 + 0.4);
    const Complex d2 = 0.3 + Complex(0.0, 0.5) * (0.2 + 0.8);
    CHECK(std::abs(chi(0, 0) - Complex(0.0, 1.0) / d1) < 1e-14);
    CHECK(std::abs(chi(1, 1) - Complex(0.0, 1.0) / d2) < 1e-14);
    CHECK(std::abs(chi(0, 1)) == 0.0);

    // Pole of the reciprocal determinant: gamma_i = -k_i makes G = delta^2 - J^2.
    CHECK_THROWS_AS(closed_form_chi_reciprocal({-1.0, 0.0, 0.25}, 1.0, 0.0, 0.25),
                    SingularityError);

    // nu2 shifts the mode-2 denominator; cross-check against the resolvent.
    const NonReciprocalParams shifted{0.5, 0.7, 1.3, 0.9};
    const SensorSystem sys = build_nonreciprocal(shifted, 1.0, 0.4, 1.0, 0.0);
    const Matrix lhs = closed_form_chi_nonreciprocal(shifted, 1.0, 0.4, -0.6);
    CHECK((lhs - transfer_matrix(sys, -0.6)).cwiseAbs().maxCoeff() < 1e-12);
    const Complex expected_d2 =
        -0.6 - 1.3 + Complex(0.0, 0.5) * (0.4 + 0.7);
    CHECK(std::abs(lhs(1, 1) - Complex(0.0, 1.0) / expected_d2) < 1e-14);
}

TEST_CASE("weak-coupling gain ladder grows the dominance factor") {
    // J shrinking with k_i + gamma_i and Delta shrinking faster keeps
    // k1 >> |J| >> everything else while |chi_12| ~ k1/|J| diverges.
    double previous = 0.0;
    for (int rung = 1; rung <= 3; ++rung) {
        const double j = std::pow(10.0, -rung);
        const double slack = j / 10.0;
        const double delta = j / 20.0;
        const double k2 = 0.01;
        const ReciprocalParams params{-1.0 + slack, -k2 + slack, j};
        const Matrix chi = closed_form_chi_reciprocal(params, 1.0, k2, delta);
        const auto report = check_conditions(chi, 0.0, std::nullopt);
        CHECK(report.dominance_factor > previous);
        CHECK(report.dominance_factor > 0.5 * std::pow(10.0, rung));
        previous = report.dominance_factor;
    }
    CHECK(previous > 500.0);
}
