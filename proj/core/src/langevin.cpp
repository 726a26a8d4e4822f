#include "nhsense/langevin.hpp"

#include <cmath>
#include <future>
#include <random>
#include <thread>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "nhsense/metrics.hpp"

namespace nhsense {

namespace {

constexpr Complex kImag{0.0, 1.0};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Per-trajectory stream: depends only on (seed, index), so serial and
// parallel schedules draw identical numbers.
std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

double slowest_decay(const SensorSystem& sys, double delta, double eps) {
    const StabilityReport report = stability(sys, delta, eps);
    if (!report.stable)
        throw InstabilityError("time-domain oracle: dynamics not strictly stable");
    return -report.eigenvalues.front().real();  // smallest |Re|, sorted descending
}

}  // namespace

Vector steady_state_means(const SensorSystem& sys, double delta, double eps,
                          const TrajectoryConfig& cfg) {
    const Matrix a_drift = dynamics_matrix(sys, delta, eps);
    const Vector b = drive_vector(sys);

    double horizon = cfg.t_total;
    if (horizon <= 0.0) horizon = std::max(50.0, 25.0 / slowest_decay(sys, delta, eps));

    // Exponential steps are exact for the linear mean dynamics; 1024 of them
    // leave room to catch a growing transient early.
    const int n_steps = 1024;
    const double h = horizon / n_steps;
    const Matrix propagator = (a_drift * h).exp();
    // a(t+h) = e^{Ah}(a + A^{-1}b) - A^{-1}b
    const Vector shift = a_drift.partialPivLu().solve(b);

    Vector a = Vector::Zero(sys.n_modes());
    const double guard = 1e9 * (1.0 + shift.norm());
    for (int step = 0; step < n_steps; ++step) {
        a = propagator * (a + shift) - shift;
        if (!a.allFinite() || a.norm() > guard)
            throw InstabilityError("steady_state_means: transient grows without decay");
    }
    return a;
}

Complex output_mean(const SensorSystem& sys, const Vector& means) {
    return sys.beta1 - kImag * std::sqrt(sys.k1) * means(0);
}

Complex lambda_fd(const SensorSystem& sys, double delta,
                  const TrajectoryConfig& cfg, double eps_step) {
    const Complex up = output_mean(sys, steady_state_means(sys, delta, +eps_step, cfg));
    const Complex down = output_mean(sys, steady_state_means(sys, delta, -eps_step, cfg));
    return (up - down) / (2.0 * eps_step);
}

double photon_number_td(const SensorSystem& sys, double delta,
                        const TrajectoryConfig& cfg) {
    return steady_state_means(sys, delta, 0.0, cfg).squaredNorm();
}

McEstimate mc_noise(const SensorSystem& sys, double delta,
                    const BathCoupling& bath, const TrajectoryConfig& cfg,
                    double tau) {
    if (cfg.dt <= 0.0 || tau <= 0.0 || cfg.n_traj < 2)
        throw ConfigError("mc_noise: need dt > 0, tau > 0, n_traj >= 2");
    const Matrix a_drift = dynamics_matrix(sys, delta, 0.0);
    if (cfg.dt > 0.01 / a_drift.norm())
        throw ConfigError("mc_noise: dt too coarse for ||A|| = " +
                          std::to_string(a_drift.norm()));
    const double decay = slowest_decay(sys, delta, 0.0);  // also gates stability

    const Eigen::Index n = sys.n_modes();
    const Vector b = drive_vector(sys);
    const Matrix propagator = (a_drift * cfg.dt).exp();
    const Vector shift = a_drift.partialPivLu().solve(b);
    const Vector a_ss = -shift;

    // Homodyne phase of the protocol; the variance itself is phase-invariant.
    double phi = 0.0;
    {
        const Matrix chi = transfer_matrix(sys, delta);
        phi = response_coefficient(chi, sys.v, sys.k1, sys.k2, sys.beta1, sys.beta2).phi;
    }
    const Complex phase = std::exp(kImag * phi);

    const double t_burn = cfg.t_burn >= 0.0 ? cfg.t_burn : 20.0 / decay;
    const long burn_steps = std::lround(t_burn / cfg.dt);
    const long window_steps = std::lround(tau / cfg.dt);

    const bool drive2 = sys.n_modes() > 1 && sys.k2 > 0.0;
    const Eigen::Index n_gain = bath.y.cols();
    const Eigen::Index n_loss = bath.z.cols();
    const double sqrt_k1 = std::sqrt(sys.k1);
    const double sqrt_k2 = std::sqrt(sys.k2);
    const double record_gain = std::sqrt(sys.k1 / 2.0);
    const double dw_sigma = 0.5 * std::sqrt(cfg.dt);  // per quadrature

    auto run_trajectory = [&](std::uint64_t index) {
        std::mt19937_64 rng = trajectory_stream(cfg.seed, index);
        std::normal_distribution<double> normal(0.0, dw_sigma);
        Vector a = a_ss;
        Vector kick(n);
        double m = 0.0;
        for (long step = 0; step < burn_steps + window_steps; ++step) {
            const Complex dw1(normal(rng), normal(rng));
            kick.setZero();
            kick(0) = -kImag * sqrt_k1 * dw1;
            if (drive2) {
                const Complex dw2(normal(rng), normal(rng));
                kick(1) += -kImag * sqrt_k2 * dw2;
            }
            for (Eigen::Index j = 0; j < n_gain; ++j) {
                const Complex dwc(normal(rng), normal(rng));
                kick += -kImag * std::sqrt(2.0) * bath.y.col(j) * std::conj(dwc);
            }
            for (Eigen::Index j = 0; j < n_loss; ++j) {
                const Complex dwd(normal(rng), normal(rng));
                kick += -kImag * std::sqrt(2.0) * bath.z.col(j) * dwd;
            }
            if (step >= burn_steps) {
                const Complex bout =
                    (sys.beta1 - kImag * sqrt_k1 * a(0)) * cfg.dt + dw1;
                m += record_gain * 2.0 * (phase * bout).real();
            }
            a = propagator * (a + shift) - shift + kick;
        }
        return m;
    };

    std::vector<double> samples(static_cast<std::size_t>(cfg.n_traj));
    unsigned threads = cfg.max_threads > 0
                           ? static_cast<unsigned>(cfg.max_threads)
                           : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.n_traj));
    if (threads <= 1) {
        for (int t = 0; t < cfg.n_traj; ++t)
            samples[static_cast<std::size_t>(t)] =
                run_trajectory(static_cast<std::uint64_t>(t));
    } else {
        std::vector<std::future<void>> jobs;
        for (unsigned w = 0; w < threads; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w]() {
                for (int t = static_cast<int>(w); t < cfg.n_traj;
                     t += static_cast<int>(threads))
                    samples[static_cast<std::size_t>(t)] =
                        run_trajectory(static_cast<std::uint64_t>(t));
            }));
        }
        for (auto& job : jobs) job.get();
    }

    // Two-pass variance in trajectory-index order keeps the reduction
    // deterministic regardless of thread count.
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size() - 1);

    McEstimate estimate;
    estimate.noise = var;
    estimate.stderr_ = var * std::sqrt(2.0 / (static_cast<double>(samples.size()) - 1.0));
    estimate.tau = tau;
    estimate.n_traj = cfg.n_traj;
    return estimate;
}

OracleReport oracle_report(const SensorSystem& sys, double delta,
                           const BathCoupling& bath,
                           const TrajectoryConfig& cfg, double tau_mc) {
    OracleReport report;
    report.means_ss = steady_state_means(sys, delta, 0.0, cfg);
    report.bout_mean = output_mean(sys, report.means_ss);
    report.lambda_fd = nhsense::lambda_fd(sys, delta, cfg);
    report.n_tot_td = report.means_ss.squaredNorm();
    if (tau_mc > 0.0) report.noise_mc = mc_noise(sys, delta, bath, cfg, tau_mc);
    return report;
}

}  // namespace nhsense
