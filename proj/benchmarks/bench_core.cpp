// Microbenchmarks for the hot paths: resolvent solves, the two-mode closed
// form, bath construction, and the stochastic integrator.

#include <benchmark/benchmark.h>

#include <random>

#include "nhsense/explore.hpp"
#include "nhsense/langevin.hpp"

using namespace nhsense;

namespace {

SensorSystem stable_system(Eigen::Index n) {
    std::mt19937_64 rng(123 + static_cast<std::uint64_t>(n));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix h0(n, n), v(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            h0(r, c) = Complex(normal(rng), normal(rng));
            v(r, c) = Complex(normal(rng), normal(rng));
        }
    SensorSystem sys = make_sensor_system(h0, v, 1.0, 0.3, 1.0, 2.0);
    const auto report = stability(sys, 0.0, 0.0);
    const double worst = report.eigenvalues.front().real();
    if (worst > -0.2)
        sys.h0 -= Complex(0.0, 1.0) * (worst + 0.2) * Matrix::Identity(n, n);
    return sys;
}

void bm_transfer_matrix(benchmark::State& state) {
    const SensorSystem sys = stable_system(state.range(0));
    double delta = 0.0;
    for (auto _ : state) {
        delta += 1e-6;  // defeat caching
        benchmark::DoNotOptimize(transfer_matrix_unchecked(sys, delta));
    }
}
BENCHMARK(bm_transfer_matrix)->Arg(2)->Arg(4)->Arg(8);

void bm_two_mode_rate(benchmark::State& state) {
    const SensorSystem sys = stable_system(2);
    const Matrix chi = transfer_matrix(sys, 0.1);
    double p = 1.0;
    for (auto _ : state) {
        p += 1e-3;
        benchmark::DoNotOptimize(two_mode_rate(chi, 0.3, p, 1.0));
    }
}
BENCHMARK(bm_two_mode_rate);

void bm_min_noise_decomposition(benchmark::State& state) {
    const SensorSystem sys = stable_system(state.range(0));
    const Matrix chi = transfer_matrix(sys, 0.0);
    const Matrix m = antihermitian_part(sys.h0);
    for (auto _ : state)
        benchmark::DoNotOptimize(min_noise_decomposition(m, chi));
}
BENCHMARK(bm_min_noise_decomposition)->Arg(2)->Arg(4);

void bm_mc_noise_steps(benchmark::State& state) {
    const SensorSystem sys = stable_system(2);
    const Matrix chi = transfer_matrix(sys, 0.0);
    const BathCoupling bath =
        min_noise_decomposition(antihermitian_part(sys.h0), chi);
    TrajectoryConfig cfg;
    cfg.dt = 5e-3;
    cfg.n_traj = 8;
    cfg.t_burn = 5.0;
    for (auto _ : state) {
        cfg.seed += 1;
        benchmark::DoNotOptimize(mc_noise(sys, 0.0, bath, cfg, 20.0));
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_traj *
                            static_cast<long>(25.0 / cfg.dt));
}
BENCHMARK(bm_mc_noise_steps)->Unit(benchmark::kMillisecond);

void bm_feasibility_objective(benchmark::State& state) {
    const ModelConfig model = fig2_reciprocal_config();
    const SensorSystem base = model.build();
    double eta = 0.0;
    for (auto _ : state) {
        eta = eta < 1.0 ? eta + 1e-4 : 0.0;
        SensorSystem sys = base;
        sys.k2 = eta;
        if (is_stable(sys, 0.1)) {
            const Matrix chi = transfer_matrix_unchecked(sys, 0.1);
            benchmark::DoNotOptimize(optimal_rate_from_chi(
                chi, sys.v, sys.k1, sys.k2, sys.beta1, sys.beta2));
        }
    }
}
BENCHMARK(bm_feasibility_objective);

}  // namespace

BENCHMARK_MAIN();
