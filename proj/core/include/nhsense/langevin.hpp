// langevin.hpp — independent time-domain route to the steady-state response,
// photon number, and homodyne noise power.
//
// The deterministic mean is propagated with exact exponential steps; noise is
// injected Euler-Maruyama style. Every quantum input channel is simulated as
// an independent complex Gaussian increment dW per step with E[dW] = 0,
// E[dW^2] = 0 and E[|dW|^2] = dt/2 (real and imaginary parts independent with
// variance dt/4), which reproduces the vacuum homodyne variance of each
// channel. Gain channels enter the mode equation through the conjugated
// increment.

#pragma once

#include <cstdint>
#include <optional>

#include "nhsense/bath.hpp"
#include "nhsense/system.hpp"

namespace nhsense {

struct TrajectoryConfig {
    double dt = 1e-3;       // SDE step, units of 1/k1
    double t_total = -1.0;  // ODE horizon; < 0 selects 25 slowest decay times
    double t_burn = -1.0;   // SDE transient; < 0 selects 20 slowest decay times
    int n_traj = 4000;
    std::uint64_t seed = 20260810;
    int max_threads = 0;    // 0 = hardware concurrency
};

/// Steady-state mode amplitudes from forward integration of
/// d<a>/dt = A <a> + b starting at zero. Divergence of the transient raises
/// InstabilityError. The result matches -A^{-1} b once the horizon exceeds
/// ~20 slowest decay times.
Vector steady_state_means(const SensorSystem& sys, double delta, double eps,
                          const TrajectoryConfig& cfg);

/// Mean reflected field beta1 - i sqrt(k1) <a_1>.
Complex output_mean(const SensorSystem& sys, const Vector& means);

/// Central difference of the output mean over eps = +-eps_step.
Complex lambda_fd(const SensorSystem& sys, double delta,
                  const TrajectoryConfig& cfg, double eps_step = 1e-6);

/// Total coherent photon number from the time-domain steady state.
double photon_number_td(const SensorSystem& sys, double delta,
                        const TrajectoryConfig& cfg);

struct McEstimate {
    double noise = 0.0;    // variance of the integrated record, approx N = density * tau
    double stderr_ = 0.0;  // standard error of that variance estimate
    double tau = 0.0;
    int n_traj = 0;
    double density() const { return noise / tau; }
};

/// Monte-Carlo estimate of the integrated homodyne noise power over a window
/// tau, driving all channels (waveguide inputs and bath couplings) with
/// semiclassical vacuum noise. The homodyne phase is taken from the response
/// coefficient at this detuning. Refuses dt > 0.01 / ||A||_F (ConfigError)
/// and unstable systems (InstabilityError).
McEstimate mc_noise(const SensorSystem& sys, double delta,
                    const BathCoupling& bath, const TrajectoryConfig& cfg,
                    double tau);

struct OracleReport {
    Vector means_ss;
    Complex bout_mean{0.0, 0.0};
    Complex lambda_fd{0.0, 0.0};
    std::optional<McEstimate> noise_mc;
    double n_tot_td = 0.0;
};

/// Bundles the time-domain quantities; runs the Monte-Carlo stage only when
/// tau_mc is positive.
OracleReport oracle_report(const SensorSystem& sys, double delta,
                           const BathCoupling& bath,
                           const TrajectoryConfig& cfg, double tau_mc);

}  // namespace nhsense
