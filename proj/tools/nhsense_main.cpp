// nhsense — command-line front end: per-point metrics reports, bath
// decompositions, time-domain cross-checks, and CSV campaigns.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhsense/explore.hpp"
#include "nhsense/langevin.hpp"

namespace {

using nhsense::BathCoupling;
using nhsense::Complex;
using nhsense::Matrix;
using nhsense::ModelConfig;
using nhsense::SensorSystem;

struct SystemFlags {
    std::string config_path;
    std::string model = "reciprocal";
    bool model_given = false;
    std::optional<double> gamma1, gamma2, j, nu2, k2, p, beta1;
};

void add_system_flags(CLI::App* cmd, SystemFlags& flags) {
    cmd->add_option("--config", flags.config_path,
                    "system description file (key = value)");
    cmd->add_option("--model", flags.model, "reciprocal|nonreciprocal")
        ->check(CLI::IsMember({"reciprocal", "nonreciprocal"}))
        ->each([&flags](const std::string&) { flags.model_given = true; });
    cmd->add_option("--gamma1", flags.gamma1, "mode-1 local rate (units of k1)");
    cmd->add_option("--gamma2", flags.gamma2, "mode-2 local rate (units of k1)");
    cmd->add_option("--j", flags.j, "inter-mode coupling (units of k1)");
    cmd->add_option("--nu2", flags.nu2, "mode-2 detuning, nonreciprocal only");
    cmd->add_option("--k2", flags.k2, "mode-2 waveguide coupling (units of k1)");
    cmd->add_option("--p", flags.p, "drive amplitude ratio beta2/beta1");
    cmd->add_option("--beta1", flags.beta1, "drive-1 amplitude");
}

ModelConfig resolve_model(const SystemFlags& flags) {
    if (!flags.config_path.empty()) {
        if (flags.model_given)
            throw nhsense::ConfigError("pass either --config or --model flags");
        const auto file = nhsense::KeyValueFile::load(flags.config_path);
        file.require_known_keys(nhsense::model_config_keys());
        return nhsense::parse_model_config(file);
    }
    ModelConfig config = flags.model == "nonreciprocal"
                             ? nhsense::fig3_nonreciprocal_config()
                             : nhsense::fig2_reciprocal_config();
    if (config.kind == nhsense::ModelTag::reciprocal) {
        if (flags.gamma1) config.recip.gamma1 = *flags.gamma1;
        if (flags.gamma2) config.recip.gamma2 = *flags.gamma2;
        if (flags.j) config.recip.j = *flags.j;
        if (flags.nu2)
            throw nhsense::ConfigError("--nu2 applies to the nonreciprocal model");
    } else {
        if (flags.gamma1) config.nonrecip.gamma1 = *flags.gamma1;
        if (flags.gamma2) config.nonrecip.gamma2 = *flags.gamma2;
        if (flags.j) config.nonrecip.j = *flags.j;
        if (flags.nu2) config.nonrecip.nu2 = *flags.nu2;
    }
    if (flags.k2) config.k2 = *flags.k2;
    if (flags.beta1) config.beta1 = *flags.beta1;
    const double p = flags.p ? *flags.p
                             : (config.beta1 > 0 ? config.beta2 / config.beta1 : 0.0);
    config.beta2 = p * config.beta1;
    return config;
}

BathCoupling make_bath(const SensorSystem& sys, const Matrix& chi,
                       const std::string& kind) {
    const Matrix m = nhsense::antihermitian_part(sys.h0);
    if (kind == "minimal") return nhsense::min_noise_decomposition(m, chi);
    return nhsense::spectral_decomposition(m);
}

std::string fmt(double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.10g", x);
    return buffer;
}

void print_matrix(std::ostream& out, const Matrix& m, const std::string& label) {
    out << label << " (" << m.rows() << "x" << m.cols() << "):\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out << " ";
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out << "  " << nhsense::format_complex(m(r, c));
        out << "\n";
    }
}

int run_rate(const SystemFlags& flags, double delta, const std::string& bath_kind,
             bool as_json) {
    const SensorSystem sys = resolve_model(flags).build();
    const Matrix chi = nhsense::transfer_matrix(sys, delta);
    const BathCoupling bath = make_bath(sys, chi, bath_kind);
    const nhsense::MetricsReport report =
        nhsense::measurement_rate(sys, delta, &bath);

    if (as_json) {
        nlohmann::json j{
            {"lambda_", {report.lambda.real(), report.lambda.imag()}},
            {"phi", report.phi},
            {"signal_density", report.signal_density},
            {"noise_density_raw", report.noise_density_raw},
            {"noise_density", report.noise_density},
            {"noise_density_min", report.noise_density_min},
            {"xi", report.xi},
            {"n_tot", report.n_tot},
            {"gamma_meas", report.gamma_meas},
            {"gamma_opt", report.gamma_opt},
            {"stable", report.stable},
            {"phi_degenerate", report.phi_degenerate},
        };
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "delta             " << fmt(delta) << "\n"
              << "lambda            " << nhsense::format_complex(report.lambda)
              << (report.phi_degenerate ? "  (zero signal, phi degenerate)" : "")
              << "\n"
              << "phi               " << fmt(report.phi) << "\n"
              << "signal_density    " << fmt(report.signal_density) << "\n"
              << "noise_density_raw " << fmt(report.noise_density_raw) << "\n"
              << "noise_density     " << fmt(report.noise_density) << "\n"
              << "noise_density_min " << fmt(report.noise_density_min) << "\n"
              << "xi                " << fmt(report.xi) << "\n"
              << "n_tot             " << fmt(report.n_tot) << "\n"
              << "gamma_meas        " << fmt(report.gamma_meas) << "\n"
              << "gamma_opt         " << fmt(report.gamma_opt) << "\n";
    return 0;
}

int run_bath(const SystemFlags& flags, double delta, const std::string& emit,
             const std::string& out_path) {
    const SensorSystem sys = resolve_model(flags).build();
    const Matrix chi = nhsense::transfer_matrix(sys, delta);
    const Matrix m = nhsense::antihermitian_part(sys.h0);

    struct Candidate {
        std::string name;
        BathCoupling bath;
    };
    std::vector<Candidate> candidates;
    candidates.push_back({"spectral", nhsense::spectral_decomposition(m)});
    try {
        candidates.push_back({"minimal", nhsense::min_noise_decomposition(m, chi)});
    } catch (const nhsense::ConstructionInfeasibleError& e) {
        std::cerr << "minimal decomposition infeasible: " << e.what() << "\n";
    }

    if (emit == "csv") {
        std::ostringstream csv;
        csv << "name,n_y,n_z,xi,shot,excess,achieved,diff_residual,xi_residual,"
               "valid\n";
        for (const auto& c : candidates) {
            const auto budget = nhsense::noise_budget(c.bath, chi, sys.k1, sys.k2);
            const auto check =
                nhsense::validate_decomposition(c.bath, m, chi, sys.k1, sys.k2);
            char line[512];
            std::snprintf(line, sizeof line,
                          "%s,%ld,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                          c.name.c_str(), static_cast<long>(c.bath.y.cols()),
                          static_cast<long>(c.bath.z.cols()), budget.xi,
                          budget.shot, budget.excess, budget.achieved,
                          check.diff_residual, check.xi_residual,
                          check.valid ? 1 : 0);
            csv << line;
        }
        if (out_path.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream out(out_path);
            if (!out) throw nhsense::ConfigError("cannot write '" + out_path + "'");
            out << csv.str();
        }
        return 0;
    }

    print_matrix(std::cout, m, "M = (h0 - h0^dag)/2i");
    std::cout << "\n"
              << "  name      N_Y  N_Z           Xi         shot       excess"
              << "     achieved    diff_res      xi_res  valid\n";
    for (const auto& c : candidates) {
        const auto budget = nhsense::noise_budget(c.bath, chi, sys.k1, sys.k2);
        const auto check =
            nhsense::validate_decomposition(c.bath, m, chi, sys.k1, sys.k2);
        char line[512];
        std::snprintf(line, sizeof line,
                      "  %-9s %3ld  %3ld %12.6g %12.6g %12.6g %12.6g %11.3e %11.3e  %s\n",
                      c.name.c_str(), static_cast<long>(c.bath.y.cols()),
                      static_cast<long>(c.bath.z.cols()), budget.xi, budget.shot,
                      budget.excess, budget.achieved, check.diff_residual,
                      check.xi_residual, check.valid ? "yes" : "NO");
        std::cout << line;
    }
    return 0;
}

int run_oracle(const SystemFlags& flags, double delta,
               const nhsense::TrajectoryConfig& cfg, double tau,
               const std::string& bath_kind) {
    const SensorSystem sys = resolve_model(flags).build();
    const Matrix chi = nhsense::transfer_matrix(sys, delta);
    const BathCoupling bath = make_bath(sys, chi, bath_kind);
    const auto report = nhsense::oracle_report(sys, delta, bath, cfg, tau);

    const auto resp = nhsense::response_coefficient(chi, sys.v, sys.k1, sys.k2,
                                                    sys.beta1, sys.beta2);
    const double n_eq = nhsense::total_photons(chi, sys.k1, sys.k2, sys.beta1,
                                               sys.beta2);
    const auto noise =
        nhsense::noise_power_density(bath, chi, sys.k1, sys.k2);

    std::cout << "steady-state means:";
    for (Eigen::Index i = 0; i < report.means_ss.size(); ++i)
        std::cout << "  " << nhsense::format_complex(report.means_ss(i));
    std::cout << "\n"
              << "bout_mean       " << nhsense::format_complex(report.bout_mean) << "\n"
              << "lambda_fd       " << nhsense::format_complex(report.lambda_fd) << "\n"
              << "lambda (chi)    " << nhsense::format_complex(resp.lambda) << "\n";
    const double lambda_rel =
        std::abs(resp.lambda) > 0
            ? std::abs(report.lambda_fd - resp.lambda) / std::abs(resp.lambda)
            : std::abs(report.lambda_fd - resp.lambda);
    std::cout << "lambda rel.dev  " << fmt(lambda_rel) << "\n"
              << "n_tot_td        " << fmt(report.n_tot_td) << "\n"
              << "n_tot (chi)     " << fmt(n_eq) << "\n";
    if (report.noise_mc) {
        const double expected = noise.simplified * report.noise_mc->tau;
        const double sigmas =
            (report.noise_mc->noise - expected) / report.noise_mc->stderr_;
        std::cout << "mc_noise        " << fmt(report.noise_mc->noise) << " +- "
                  << fmt(report.noise_mc->stderr_) << "  (tau "
                  << fmt(report.noise_mc->tau) << ", " << report.noise_mc->n_traj
                  << " traj)\n"
                  << "expected N      " << fmt(expected) << "\n"
                  << "deviation       " << fmt(sigmas) << " sigma\n";
    }
    return 0;
}

template <typename WriteCsv>
int emit_campaign(const std::string& out_path, WriteCsv&& write) {
    if (out_path.empty()) {
        write(std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw nhsense::ConfigError("cannot write '" + out_path + "'");
        write(out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear non-Hermitian sensor metrics and campaigns"};
    app.require_subcommand(1);

    SystemFlags flags;
    double delta = 0.0;
    std::string bath_kind = "spectral";
    bool as_json = false;
    std::string emit = "text";
    std::string out_path;
    std::string config_path;

    auto* rate = app.add_subcommand("rate", "metrics report at one detuning");
    add_system_flags(rate, flags);
    rate->add_option("--delta", delta, "detuning (units of k1)");
    rate->add_option("--bath", bath_kind, "spectral|minimal")
        ->check(CLI::IsMember({"spectral", "minimal"}));
    rate->add_flag("--json", as_json, "machine-readable output");

    auto* bath = app.add_subcommand("bath", "gain/loss decompositions");
    add_system_flags(bath, flags);
    bath->add_option("--delta", delta, "detuning (units of k1)");
    bath->add_option("--emit", emit, "text|csv")
        ->check(CLI::IsMember({"text", "csv"}));
    bath->add_option("--out", out_path, "output file (default stdout)");

    nhsense::TrajectoryConfig traj;
    traj.n_traj = 256;
    double tau = 100.0;
    auto* oracle = app.add_subcommand("oracle", "time-domain verification");
    add_system_flags(oracle, flags);
    oracle->add_option("--delta", delta, "detuning (units of k1)");
    oracle->add_option("--dt", traj.dt, "SDE step");
    oracle->add_option("--t-total", traj.t_total, "ODE horizon (<0 = auto)");
    oracle->add_option("--burn-in", traj.t_burn, "MC transient (<0 = auto)");
    oracle->add_option("--trajectories", traj.n_traj, "MC trajectory count (0 skips MC)");
    oracle->add_option("--seed", traj.seed, "RNG seed");
    oracle->add_option("--tau", tau, "integration window");
    oracle->add_option("--bath", bath_kind, "spectral|minimal")
        ->check(CLI::IsMember({"spectral", "minimal"}));

    auto* sweep = app.add_subcommand("sweep", "detuning sweep -> CSV");
    sweep->add_option("--config", config_path, "model + grid description");
    sweep->add_option("--out", out_path, "CSV path (default stdout)");
    sweep->add_flag("--json", as_json, "emit rows as JSON instead of CSV");

    auto* feas = app.add_subcommand("feasibility",
                                    "(eta, p, delta) improvement search");
    feas->add_option("--config", config_path, "model + search box description");
    feas->add_option("--out", out_path, "trace CSV path");
    feas->add_flag("--json", as_json, "emit the summary as JSON");

    auto* conv = app.add_subcommand("convergence", "bound-attainment ladder");
    conv->add_option("--config", config_path, "model + ladder description");
    conv->add_option("--out", out_path, "CSV path (default stdout)");
    conv->add_flag("--json", as_json, "emit rows as JSON instead of CSV");

    try {
        app.parse(argc, argv);

        if (rate->parsed())
            return run_rate(flags, delta, bath_kind == "spectral" ? "spectral" : "minimal",
                            as_json);
        if (bath->parsed()) return run_bath(flags, delta, emit, out_path);
        if (oracle->parsed()) {
            if (traj.n_traj == 0) tau = 0.0;
            if (traj.n_traj == 0) traj.n_traj = 2;
            return run_oracle(flags, delta, traj, tau, bath_kind);
        }

        // Campaign subcommands share the config / defaults resolution.
        nhsense::KeyValueFile file = config_path.empty()
                                         ? nhsense::KeyValueFile::parse("")
                                         : nhsense::KeyValueFile::load(config_path);
        const ModelConfig model = config_path.empty()
                                      ? nhsense::fig2_reciprocal_config()
                                      : nhsense::parse_model_config(file);
        if (sweep->parsed()) {
            const auto rows =
                nhsense::sweep_detuning(model.build(), nhsense::parse_sweep_config(file));
            if (as_json) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& r : rows) {
                    nlohmann::json row{{"delta", r.delta}, {"stable", r.stable},
                                       {"cond_chi12", r.cond_chi12},
                                       {"cond_p", r.cond_p}};
                    if (r.rate_single) row["rate_single"] = *r.rate_single;
                    if (r.rate_two) row["rate_two"] = *r.rate_two;
                    if (r.xi) row["xi"] = *r.xi;
                    if (r.n_tot) row["n_tot"] = *r.n_tot;
                    j.push_back(row);
                }
                std::cout << j.dump(2) << "\n";
                return 0;
            }
            return emit_campaign(out_path, [&](std::ostream& out) {
                nhsense::write_sweep_csv(out, rows);
            });
        }
        if (feas->parsed()) {
            const auto result = nhsense::feasibility_search(
                model, nhsense::parse_feasibility_config(file));
            if (as_json) {
                nlohmann::json j{{"baseline", result.baseline},
                                 {"baseline_delta", result.baseline_delta},
                                 {"best_found", result.best_found},
                                 {"best_eta", result.best_eta},
                                 {"best_p", result.best_p},
                                 {"best_delta", result.best_delta},
                                 {"verdict", result.improved ? "improved"
                                                             : "not-improved"},
                                 {"evaluations", result.evaluations}};
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "baseline     " << fmt(result.baseline) << "  at delta "
                          << fmt(result.baseline_delta) << "\n"
                          << "best_found   " << fmt(result.best_found)
                          << "  at (eta, p, delta) = (" << fmt(result.best_eta)
                          << ", " << fmt(result.best_p) << ", "
                          << fmt(result.best_delta) << ")\n"
                          << "verdict      "
                          << (result.improved ? "improved" : "not-improved") << "\n"
                          << "evaluations  " << result.evaluations << "\n";
            }
            if (!out_path.empty())
                return emit_campaign(out_path, [&](std::ostream& out) {
                    nhsense::write_feasibility_csv(out, result);
                });
            return 0;
        }
        if (conv->parsed()) {
            if (config_path.empty())
                throw nhsense::ConfigError("convergence requires --config with j_ladder");
            const auto rows = nhsense::convergence_study(
                model, nhsense::parse_convergence_config(file));
            if (as_json) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& r : rows) {
                    nlohmann::json row{{"j", r.j},
                                       {"p", r.p},
                                       {"margin_chi12", r.margin_chi12},
                                       {"margin_p", r.margin_p},
                                       {"stable", r.stable}};
                    if (r.rate) row["rate"] = *r.rate;
                    if (r.uniform_bound) row["uniform_bound"] = *r.uniform_bound;
                    if (r.gap) row["gap"] = *r.gap;
                    j.push_back(row);
                }
                std::cout << j.dump(2) << "\n";
                return 0;
            }
            return emit_campaign(out_path, [&](std::ostream& out) {
                nhsense::write_convergence_csv(out, rows);
            });
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const nhsense::PartialResultError& e) {
        std::cerr << "partial result: " << e.what() << "\n";
        return 2;
    } catch (const nhsense::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
