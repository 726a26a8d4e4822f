// Acceptance suite: end-to-end checks of the headline numbers, figure
// regenerations, and property sweeps, one pass/fail line each, with wall-time
// budgets enforced per check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nhsense/explore.hpp"
#include "nhsense/langevin.hpp"
#include "../testing_support.hpp"

using namespace nhsense;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(const std::string& name, double time_limit_s,
         const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = body();
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_time = elapsed < time_limit_s;
    const bool pass = outcome.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %-34s %7.2fs/%-5.0fs  %s\n", pass ? "PASS" : "FAIL",
                name.c_str(), elapsed, time_limit_s, outcome.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6g", x);
    return buffer;
}

// Single-drive optimum over delta: coarse scan plus golden-section polish.
std::pair<double, double> single_drive_optimum(const SensorSystem& single,
                                               double lo, double hi) {
    auto rate = [&](double delta) {
        if (!is_stable(single, delta)) return -1.0;
        const Matrix chi = transfer_matrix_unchecked(single, delta, 0.0);
        return optimal_rate_from_chi(chi, single.v, single.k1, single.k2,
                                     single.beta1, single.beta2);
    };
    const int n = 4001;
    int best_i = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        const double d = lo + (hi - lo) * i / (n - 1);
        const double r = rate(d);
        if (r > best) {
            best = r;
            best_i = i;
        }
    }
    const double h = (hi - lo) / (n - 1);
    double a = lo + h * std::max(0, best_i - 1);
    double b = lo + h * std::min(n - 1, best_i + 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = rate(x1), f2 = rate(x2);
    while (b - a > 1e-12) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = rate(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = rate(x1);
        }
    }
    const double mid = 0.5 * (a + b);
    return {std::max({best, f1, f2, rate(mid)}), mid};
}

const SweepRow* row_at(const std::vector<SweepRow>& rows, double delta) {
    for (const auto& row : rows)
        if (std::abs(row.delta - delta) < 1e-9) return &row;
    return nullptr;
}

// Smallest |delta| whose two-drive rate drops below half the curve's peak.
double half_peak_width(const std::vector<SweepRow>& rows) {
    double peak = 0.0;
    for (const auto& row : rows)
        if (row.rate_two && *row.rate_two > peak) peak = *row.rate_two;
    double width = std::numeric_limits<double>::infinity();
    for (const auto& row : rows)
        if (row.rate_two && *row.rate_two < 0.5 * peak)
            width = std::min(width, std::abs(row.delta));
    return width;
}

}  // namespace

int main() {
    std::printf("acceptance checks (tolerances pinned in source)\n");

    run("1 no-gain single-drive baseline", 10.0, [] {
        const auto [baseline, at] =
            single_drive_optimum(nhtest::no_gain_system(), -5.0, 5.0);
        Outcome o;
        o.pass = std::abs(baseline - 5.67003) <= 1e-3;
        o.detail = "baseline " + fmt(baseline) + " at delta " + fmt(at) +
                   " (target 5.67003 +- 1e-3)";
        return o;
    });

    run("2 no-gain feasibility verdict", 300.0, [] {
        ModelConfig model;
        model.kind = ModelTag::reciprocal;
        model.recip = ReciprocalParams{0.0, 0.2, 0.2};
        const FeasibilityResult result =
            feasibility_search(model, FeasibilityConfig{});
        Outcome o;
        o.pass = !result.improved &&
                 result.best_found <= result.baseline * (1.0 + 1e-4);
        o.detail = "baseline " + fmt(result.baseline) + ", best " +
                   fmt(result.best_found) + " at (eta " + fmt(result.best_eta) +
                   ", p " + fmt(result.best_p) + ", delta " +
                   fmt(result.best_delta) + "), verdict " +
                   (result.improved ? "improved" : "not-improved");
        return o;
    });

    run("3 uniform-bound attainment", 1.0, [] {
        const SensorSystem sys =
            build_nonreciprocal({1.0, 0.5, 0.0, 1e3}, 1.0, 1e-3, 1.0, 1.0);
        const Matrix chi = transfer_matrix(sys, 0.0);
        const double c12 = std::abs(chi(0, 1));
        const double p = 10.0 * c12 * c12 * c12 * (c12 + std::abs(chi(1, 0)));
        const double rate = two_mode_rate(chi, sys.eta(), p, sys.k1);
        Outcome o;
        o.pass = std::abs(rate - 500.0) <= 0.05 * 500.0;
        o.detail = "rate " + fmt(rate) + " at p " + fmt(p) +
                   " (target 500 +- 5%)";
        return o;
    });

    run("4 figure sweeps", 60.0, [] {
        SweepConfig grid;  // defaults mirror the figure axes
        const auto recip = sweep_detuning(nhtest::fig2_system(), grid);
        const auto nonrecip = sweep_detuning(nhtest::fig3_system(), grid);

        std::ostringstream recip_csv, nonrecip_csv;
        write_sweep_csv(recip_csv, recip);
        write_sweep_csv(nonrecip_csv, nonrecip);
        std::istringstream recip_in(recip_csv.str()), nonrecip_in(nonrecip_csv.str());
        const auto recip_rows = read_sweep_csv(recip_in);
        const auto nonrecip_rows = read_sweep_csv(nonrecip_in);

        const SweepRow* r2 = row_at(recip_rows, 0.0);
        const SweepRow* r3 = row_at(nonrecip_rows, 0.0);
        Outcome o;
        if (!r2 || !r3 || !r2->rate_two || !r2->rate_single || !r3->rate_two ||
            !r3->rate_single) {
            o.detail = "missing delta = 0 rows";
            return o;
        }
        const bool a_recip = *r2->rate_two > *r2->rate_single;
        const bool a_nonrecip = *r3->rate_two > *r3->rate_single;
        const double w2 = half_peak_width(recip_rows);
        const double w3 = half_peak_width(nonrecip_rows);
        const bool b = w2 < w3;
        o.pass = a_recip && a_nonrecip && b;
        o.detail = "(a) recip " + fmt(*r2->rate_two) + " vs " +
                   fmt(*r2->rate_single) + (a_recip ? " ok" : " VIOLATED") +
                   "; nonrecip " + fmt(*r3->rate_two) + " vs " +
                   fmt(*r3->rate_single) + (a_nonrecip ? " ok" : " VIOLATED") +
                   "; (b) widths " + fmt(w2) + " < " + fmt(w3) +
                   (b ? " ok" : " VIOLATED");
        return o;
    });

    run("5 closed-form transfer matrices", 1.0, [] {
        std::mt19937_64 rng(71);
        std::uniform_real_distribution<double> gamma(0.05, 2.0);
        std::uniform_real_distribution<double> coupling(-2.0, 2.0);
        std::uniform_real_distribution<double> detuning(-3.0, 3.0);
        std::uniform_real_distribution<double> port(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const ReciprocalParams rp{gamma(rng), gamma(rng), coupling(rng)};
            const double k2 = port(rng), delta = detuning(rng);
            const Matrix lu =
                transfer_matrix(build_reciprocal(rp, 1, k2, 1, 0), delta);
            const Matrix formula = closed_form_chi_reciprocal(rp, 1, k2, delta);
            worst = std::max(worst, (lu - formula).cwiseAbs().maxCoeff());

            const NonReciprocalParams np{gamma(rng), gamma(rng), coupling(rng),
                                         coupling(rng)};
            const Matrix lu_n =
                transfer_matrix(build_nonreciprocal(np, 1, k2, 1, 0), delta);
            const Matrix formula_n =
                closed_form_chi_nonreciprocal(np, 1, k2, delta);
            worst = std::max(worst, (lu_n - formula_n).cwiseAbs().maxCoeff());
        }
        Outcome o;
        o.pass = worst < 1e-10;
        o.detail = "worst max-norm deviation " + fmt(worst) + " (limit 1e-10)";
        return o;
    });

    run("6 raw vs simplified noise", 30.0, [] {
        std::mt19937_64 rng(72);
        std::uniform_real_distribution<double> uni(-1.5, 1.5);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(trial % 3);
            const SensorSystem sys = nhtest::random_stable_system(rng, n);
            const Matrix chi = transfer_matrix(sys, uni(rng));
            BathCoupling bath =
                spectral_decomposition(antihermitian_part(sys.h0));
            bath = nhtest::randomized_decomposition(rng, bath, n);
            const auto pair = noise_power_density(bath, chi, sys.k1, sys.k2);
            worst = std::max(worst,
                             std::abs(pair.raw - pair.simplified) / pair.simplified);
        }
        Outcome o;
        o.pass = worst < 1e-9;
        o.detail = "worst relative gap " + fmt(worst) + " (limit 1e-9)";
        return o;
    });

    run("7 decomposition identity", 30.0, [] {
        std::mt19937_64 rng(73);
        std::uniform_real_distribution<double> uni(-1.5, 1.5);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(trial % 3);
            const SensorSystem sys = nhtest::random_stable_system(rng, n);
            const Matrix chi = transfer_matrix(sys, uni(rng));
            const Matrix m = antihermitian_part(sys.h0);
            BathCoupling bath = spectral_decomposition(m);
            bath = nhtest::randomized_decomposition(rng, bath, n);
            const auto report =
                validate_decomposition(bath, m, chi, sys.k1, sys.k2);
            worst = std::max(worst, report.xi_residual);
            worst = std::max(worst, report.diff_residual);
        }
        Outcome o;
        o.pass = worst < 1e-9;
        o.detail = "worst residual " + fmt(worst) + " (limit 1e-9)";
        return o;
    });

    run("8 minimal-noise attainment", 30.0, [] {
        std::mt19937_64 rng(74);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        double worst = 0.0;
        int infeasible = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const SensorSystem sys = nhtest::random_stable_system(rng, 2);
            const Matrix chi = transfer_matrix(sys, uni(rng));
            const Matrix m = antihermitian_part(sys.h0);
            try {
                const BathCoupling bath = min_noise_decomposition(m, chi);
                const double xi = xi_functional(chi, sys.k1, sys.k2);
                const double floor = 0.5 * (1.0 + 2.0 * std::max(xi, 0.0));
                worst = std::max(worst, std::abs(achieved_noise(bath, chi, sys.k1) -
                                                 floor) / floor);
            } catch (const ConstructionInfeasibleError&) {
                ++infeasible;
            }
        }
        // The shipped figure configurations must all be feasible.
        int figure_infeasible = 0;
        for (const SensorSystem& sys :
             {nhtest::fig2_system(), nhtest::fig3_system(),
              nhtest::no_gain_system()}) {
            try {
                const Matrix chi = transfer_matrix(sys, 0.0);
                min_noise_decomposition(antihermitian_part(sys.h0), chi);
            } catch (const ConstructionInfeasibleError&) {
                ++figure_infeasible;
            }
        }
        Outcome o;
        o.pass = worst < 1e-6 && figure_infeasible == 0;
        o.detail = "worst relative excess " + fmt(worst) + ", random infeasible " +
                   std::to_string(infeasible) + ", figure infeasible " +
                   std::to_string(figure_infeasible);
        return o;
    });

    run("9 time-domain oracle agreement", 600.0, [] {
        std::mt19937_64 rng(75);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        TrajectoryConfig ode_cfg;
        double worst_lambda = 0.0, worst_photon = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(trial % 2);
            const SensorSystem sys = nhtest::random_stable_system(rng, n);
            const double delta = uni(rng);
            const Matrix chi = transfer_matrix(sys, delta);
            const Complex lambda =
                response_coefficient(chi, sys.v, sys.k1, sys.k2, sys.beta1,
                                     sys.beta2).lambda;
            const Complex fd = lambda_fd(sys, delta, ode_cfg);
            if (std::abs(lambda) > 1e-9)
                worst_lambda = std::max(worst_lambda,
                                        std::abs(fd - lambda) / std::abs(lambda));
            const double n_eq =
                total_photons(chi, sys.k1, sys.k2, sys.beta1, sys.beta2);
            worst_photon =
                std::max(worst_photon, std::abs(photon_number_td(sys, delta,
                                                                 ode_cfg) -
                                                n_eq) /
                                           std::max(1.0, n_eq));
        }

        auto sigma_gap = [](const SensorSystem& sys, const BathCoupling& bath,
                            const TrajectoryConfig& cfg, double tau) {
            const Matrix chi = transfer_matrix(sys, 0.0);
            const double expected =
                noise_power_density(bath, chi, sys.k1, sys.k2).simplified * tau;
            const McEstimate est = mc_noise(sys, 0.0, bath, cfg, tau);
            return std::abs(est.noise - expected) / est.stderr_;
        };

        TrajectoryConfig mc_cfg;
        mc_cfg.dt = 5e-3;
        mc_cfg.n_traj = 4000;
        mc_cfg.seed = 4242;

        const SensorSystem t0 = nhtest::t0_system();
        const BathCoupling t0_bath = min_noise_decomposition(
            antihermitian_part(t0.h0), transfer_matrix(t0, 0.0));
        const double s_t0 = sigma_gap(t0, t0_bath, mc_cfg, 100.0);

        BathCoupling balanced;
        balanced.y = Matrix::Identity(2, 2);
        balanced.z = Matrix::Identity(2, 2);
        const double s_t1 = sigma_gap(nhtest::t1_system(), balanced, mc_cfg, 100.0);

        const SensorSystem f2 = nhtest::fig2_system();
        const BathCoupling f2_bath = min_noise_decomposition(
            antihermitian_part(f2.h0), transfer_matrix(f2, 0.0));
        TrajectoryConfig f2_cfg;
        f2_cfg.dt = 0.02;
        f2_cfg.t_burn = 2000.0;
        f2_cfg.n_traj = 4000;
        f2_cfg.seed = 4243;
        const double s_f2 = sigma_gap(f2, f2_bath, f2_cfg, 3000.0);

        Outcome o;
        o.pass = worst_lambda < 1e-6 && worst_photon < 1e-8 && s_t0 < 3.0 &&
                 s_t1 < 3.0 && s_f2 < 3.0;
        o.detail = "lambda " + fmt(worst_lambda) + ", photons " +
                   fmt(worst_photon) + ", MC sigmas " + fmt(s_t0) + "/" +
                   fmt(s_t1) + "/" + fmt(s_f2);
        return o;
    });

    run("10 finite-p limit consistency", 30.0, [] {
        std::mt19937_64 rng(76);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        int accepted = 0, violations = 0;
        while (accepted < 100) {
            const SensorSystem sys = nhtest::random_stable_system(rng, 2);
            const double delta = uni(rng);
            const Matrix chi = transfer_matrix(sys, delta);
            if (std::abs(chi(0, 1)) < 1e-3) continue;
            ++accepted;
            const double limit =
                asymptotic_bound(chi, sys.eta(), sys.k1).limit_rate;
            double previous = std::numeric_limits<double>::infinity();
            for (double p : {1e2, 1e3, 1e4}) {
                const double gap =
                    std::abs(two_mode_rate(chi, sys.eta(), p, sys.k1) - limit);
                if (gap > previous + 1e-12 * (1.0 + limit)) ++violations;
                previous = gap;
            }
        }
        Outcome o;
        o.pass = violations == 0;
        o.detail = std::to_string(violations) + " monotonicity violations / 100";
        return o;
    });

    run("11 detuned-drive bounds", 30.0, [] {
        std::mt19937_64 rng(77);
        int ceiling_violations = 0;
        for (int trial = 0; trial < 50; ++trial) {
            SensorSystem sys = nhtest::random_stable_system(rng, 2);
            if (sys.beta2 == 0.0) sys.beta2 = 0.5;
            const double rate = detuned_rate(sys, 0.1, 1e3, DetunedCase::one);
            const Matrix chi = transfer_matrix(sys, 0.1);
            const Matrix cvc = chi * sys.v * chi;
            const double ceiling =
                4.0 * sys.k1 * std::norm(cvc(0, 0)) / chi.col(0).squaredNorm();
            if (rate > ceiling + 1e-9) ++ceiling_violations;
        }

        const NonReciprocalParams params{1.0, 0.5, 0.0, 1e3};
        const SensorSystem probe =
            build_nonreciprocal(params, 1.0, 1e-3, 1e-14, 1e-14);
        const Matrix chi = transfer_matrix(probe, 0.0);
        const double c12 = std::abs(chi(0, 1));
        const double p = 10.0 * c12 * c12 * c12 * c12;
        const SensorSystem sys =
            build_nonreciprocal(params, 1.0, 1e-3, 1e-14, 1e-14 * p);
        const double rate2 = detuned_rate(sys, 0.0, 1e5, DetunedCase::two);

        Outcome o;
        o.pass = ceiling_violations == 0 && std::abs(rate2 - 500.0) <= 25.0;
        o.detail = std::to_string(ceiling_violations) +
                   " ceiling violations / 50; case-two rate " + fmt(rate2) +
                   " (target 500 +- 5%)";
        return o;
    });

    if (failures == 0) {
        std::printf("all acceptance checks passed\n");
        return 0;
    }
    std::printf("%d acceptance check(s) failed\n", failures);
    return 1;
}
