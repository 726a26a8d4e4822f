// explore.hpp — campaign drivers: detuning sweeps, the drive/coupling
// feasibility search, and bound-attainment convergence ladders, all with
// deterministic CSV emission (17 significant digits, fixed column order).

#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "nhsense/config.hpp"
#include "nhsense/metrics.hpp"

namespace nhsense {

/// One detuning grid point. Rate/photon fields are empty (never zero) when
/// the configured system is unstable there. rate_single refers to the
/// k2 = 0, beta2 = 0 variant and is evaluated algebraically, matching how
/// single-drive reference curves are usually drawn even where that variant
/// is formally unstable.
struct SweepRow {
    double delta = 0.0;
    std::optional<double> rate_single;
    std::optional<double> rate_two;
    std::optional<double> xi;
    bool stable = false;
    std::optional<double> n_tot;
    bool cond_chi12 = false;
    bool cond_p = false;
};

struct SweepConfig {
    double delta_min = -0.5;
    double delta_max = 0.5;
    double delta_step = 0.005;
    double dominance_threshold = kDefaultDominanceThreshold;
};

std::vector<SweepRow> sweep_detuning(const SensorSystem& sys,
                                     const SweepConfig& config);

/// Columns: delta, rate_single, rate_two, xi, n_tot, stable, cond_chi12, cond_p.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

struct TracePoint {
    long eval = 0;
    double eta = 0.0;
    double p = 0.0;
    double delta = 0.0;
    double value = 0.0;
};

struct FeasibilityConfig {
    double eta_min = 0.0, eta_max = 10.0;
    double p_min = 0.0, p_max = 1000.0;
    double delta_min = -5.0, delta_max = 5.0;
    int grid_points = 40;      // per axis for the coarse stage
    long budget = 500000;      // total objective evaluations allowed
    double feasibility_tol = 1e-4;   // relative margin for "improved"
    double refine_tol = 1e-6;        // simplex convergence, relative
    std::uint64_t seed = 1;          // jitters the restart simplex scales
};

struct FeasibilityResult {
    double baseline = 0.0;        // single-drive optimum over delta
    double baseline_delta = 0.0;
    double best_found = 0.0;
    double best_eta = 0.0, best_p = 0.0, best_delta = 0.0;
    bool improved = false;
    long evaluations = 0;
    std::vector<TracePoint> trace;  // stable evaluations only
};

/// Searches (eta, p, delta) for a rate exceeding the single-drive baseline:
/// coarse grid then simplex refinement restarted from the best grid points.
/// Unstable points are excluded rather than penalized. Throws
/// PartialResultError if the budget runs out before the coarse grid is done.
FeasibilityResult feasibility_search(const ModelConfig& model,
                                     const FeasibilityConfig& config);

void write_feasibility_csv(std::ostream& out, const FeasibilityResult& result);

struct ConvergenceRow {
    double j = 0.0;
    double p = 0.0;
    std::optional<double> rate;
    std::optional<double> uniform_bound;  // empty when eta == 0
    std::optional<double> gap;            // |rate - uniform_bound|
    double margin_chi12 = 0.0;
    double margin_p = 0.0;
    bool stable = false;
};

struct ConvergenceConfig {
    std::vector<double> j_ladder;
    std::vector<double> p_ladder;       // empty = auto from the p condition
    double p_margin = 10.0;             // auto p = margin * |chi12|^3(|chi12|+|chi21|)
    std::vector<double> slack_ladder;   // reciprocal: per-rung gamma_i = -k_i + slack
    double delta = 0.0;
};

/// Walks the coupling ladder toward the uniform bound. Requires a named
/// two-mode model config (the ladder rebuilds h0 per rung); instability at a
/// rung is recorded in the row, not fatal.
std::vector<ConvergenceRow> convergence_study(const ModelConfig& model,
                                              const ConvergenceConfig& config);

void write_convergence_csv(std::ostream& out,
                           const std::vector<ConvergenceRow>& rows);

/// Campaign configs parsed from the same key-value file as the model.
SweepConfig parse_sweep_config(const KeyValueFile& file);
FeasibilityConfig parse_feasibility_config(const KeyValueFile& file);
ConvergenceConfig parse_convergence_config(const KeyValueFile& file);

}  // namespace nhsense
