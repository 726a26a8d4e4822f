#include "nhsense/explore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace nhsense {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt(double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", x);
    return buffer;
}

std::string fmt_opt(const std::optional<double>& x) {
    return x ? fmt(*x) : std::string();
}

std::optional<double> parse_opt(const std::string& field) {
    if (field.empty()) return std::nullopt;
    std::size_t used = 0;
    const double value = std::stod(field, &used);
    if (used != field.size()) throw ConfigError("bad CSV number '" + field + "'");
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

/// Gamma_opt/k1 from the algebraic resolvent; empty when the resolvent is
/// singular or the variant carries no photons.
std::optional<double> algebraic_rate(const SensorSystem& sys, double delta) {
    try {
        const Matrix chi = transfer_matrix_unchecked(sys, delta, 0.0);
        return optimal_rate_from_chi(chi, sys.v, sys.k1, sys.k2, sys.beta1,
                                     sys.beta2);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<SweepRow> sweep_detuning(const SensorSystem& sys,
                                     const SweepConfig& config) {
    if (!(config.delta_step > 0.0) || !(config.delta_max >= config.delta_min))
        throw ConfigError("sweep: need delta_max >= delta_min and delta_step > 0");

    const SensorSystem single = single_drive_variant(sys);
    const double p = sys.drive_ratio();
    std::vector<SweepRow> rows;
    const long n_steps =
        std::lround((config.delta_max - config.delta_min) / config.delta_step);
    for (long i = 0; i <= n_steps; ++i) {
        const double delta = config.delta_min + config.delta_step * i;
        SweepRow row;
        row.delta = delta;
        row.stable = is_stable(sys, delta);
        if (row.stable) {
            const Matrix chi = transfer_matrix_unchecked(sys, delta, 0.0);
            row.rate_two =
                optimal_rate_from_chi(chi, sys.v, sys.k1, sys.k2, sys.beta1,
                                      sys.beta2);
            row.xi = xi_functional(chi, sys.k1, sys.k2);
            row.n_tot = total_photons(chi, sys.k1, sys.k2, sys.beta1, sys.beta2);
            if (sys.n_modes() == 2) {
                const ConditionReport conds = check_conditions(
                    chi, p, std::nullopt, config.dominance_threshold);
                row.cond_chi12 = conds.cond_chi12;
                row.cond_p = conds.cond_p;
            }
            row.rate_single = algebraic_rate(single, delta);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "delta,rate_single,rate_two,xi,n_tot,stable,cond_chi12,cond_p\n";
    for (const SweepRow& row : rows) {
        out << fmt(row.delta) << ',' << fmt_opt(row.rate_single) << ','
            << fmt_opt(row.rate_two) << ',' << fmt_opt(row.xi) << ','
            << fmt_opt(row.n_tot) << ',' << (row.stable ? 1 : 0) << ','
            << (row.cond_chi12 ? 1 : 0) << ',' << (row.cond_p ? 1 : 0) << '\n';
    }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("sweep CSV: missing header");
    if (split_csv_line(line) !=
        std::vector<std::string>{"delta", "rate_single", "rate_two", "xi",
                                 "n_tot", "stable", "cond_chi12", "cond_p"})
        throw ConfigError("sweep CSV: unexpected header '" + line + "'");

    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 8)
            throw ConfigError("sweep CSV: expected 8 fields, got " +
                              std::to_string(fields.size()));
        SweepRow row;
        row.delta = *parse_opt(fields[0]);
        row.rate_single = parse_opt(fields[1]);
        row.rate_two = parse_opt(fields[2]);
        row.xi = parse_opt(fields[3]);
        row.n_tot = parse_opt(fields[4]);
        row.stable = fields[5] == "1";
        row.cond_chi12 = fields[6] == "1";
        row.cond_p = fields[7] == "1";
        rows.push_back(row);
    }
    return rows;
}

namespace {

/// Objective for the feasibility search: Gamma_opt/k1 of the base sensor
/// re-dressed with port coupling eta and drive ratio p; -inf outside the
/// stable set.
class FeasibilityObjective {
  public:
    FeasibilityObjective(const SensorSystem& base, const FeasibilityConfig& cfg,
                         std::vector<TracePoint>& trace)
        : base_(base), cfg_(cfg), trace_(trace) {}

    long evaluations() const { return evaluations_; }
    bool budget_left() const { return evaluations_ < cfg_.budget; }

    double operator()(double eta, double p, double delta) {
        ++evaluations_;
        SensorSystem sys = base_;
        sys.k2 = eta;
        sys.beta1 = 1.0;
        sys.beta2 = p;
        if (!is_stable(sys, delta)) return kNegInf;
        const auto rate = algebraic_rate(sys, delta);
        if (!rate) return kNegInf;
        trace_.push_back({evaluations_, eta, p, delta, *rate});
        return *rate;
    }

  private:
    SensorSystem base_;
    const FeasibilityConfig& cfg_;
    std::vector<TracePoint>& trace_;
    long evaluations_ = 0;
};

struct Candidate {
    double value = kNegInf;
    std::array<double, 3> x{0.0, 0.0, 0.0};  // eta, p, delta
};

/// Derivative-free simplex descent on -value, clamped to the search box.
Candidate nelder_mead(FeasibilityObjective& objective,
                      const std::array<double, 3>& start,
                      const std::array<double, 3>& lo,
                      const std::array<double, 3>& hi,
                      std::array<double, 3> step, double rel_tol,
                      int max_iter) {
    using Point = std::array<double, 3>;
    auto clamp = [&](Point x) {
        for (int d = 0; d < 3; ++d) x[d] = std::clamp(x[d], lo[d], hi[d]);
        return x;
    };
    auto eval = [&](const Point& x) {
        return objective.budget_left() ? objective(x[0], x[1], x[2]) : kNegInf;
    };

    std::array<Point, 4> simplex;
    std::array<double, 4> value;
    simplex[0] = clamp(start);
    value[0] = eval(simplex[0]);
    for (int d = 0; d < 3; ++d) {
        Point x = simplex[0];
        x[d] += step[d];
        simplex[d + 1] = clamp(x);
        value[d + 1] = eval(simplex[d + 1]);
    }

    Candidate best;
    auto record = [&](const Point& x, double v) {
        if (v > best.value) best = {v, x};
    };
    for (int i = 0; i < 4; ++i) record(simplex[i], value[i]);

    for (int iter = 0; iter < max_iter && objective.budget_left(); ++iter) {
        std::array<int, 4> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return value[a] > value[b]; });
        const double spread =
            std::abs(value[order[0]] - value[order[3]]);
        if (std::isfinite(value[order[0]]) &&
            spread <= rel_tol * std::max(1.0, std::abs(value[order[0]])))
            break;

        const int worst = order[3];
        Point centroid{0.0, 0.0, 0.0};
        for (int i : {order[0], order[1], order[2]})
            for (int d = 0; d < 3; ++d) centroid[d] += simplex[i][d] / 3.0;

        auto blend = [&](double coeff) {
            Point x;
            for (int d = 0; d < 3; ++d)
                x[d] = centroid[d] + coeff * (simplex[worst][d] - centroid[d]);
            return clamp(x);
        };

        const Point reflected = blend(-1.0);
        const double reflected_value = eval(reflected);
        record(reflected, reflected_value);

        if (reflected_value > value[order[0]]) {
            const Point expanded = blend(-2.0);
            const double expanded_value = eval(expanded);
            record(expanded, expanded_value);
            if (expanded_value > reflected_value) {
                simplex[worst] = expanded;
                value[worst] = expanded_value;
            } else {
                simplex[worst] = reflected;
                value[worst] = reflected_value;
            }
            continue;
        }
        if (reflected_value > value[order[2]]) {
            simplex[worst] = reflected;
            value[worst] = reflected_value;
            continue;
        }
        const Point contracted = blend(0.5);
        const double contracted_value = eval(contracted);
        record(contracted, contracted_value);
        if (contracted_value > value[worst]) {
            simplex[worst] = contracted;
            value[worst] = contracted_value;
            continue;
        }
        // Shrink toward the best vertex.
        for (int i : {order[1], order[2], order[3]}) {
            for (int d = 0; d < 3; ++d)
                simplex[i][d] =
                    simplex[order[0]][d] + 0.5 * (simplex[i][d] - simplex[order[0]][d]);
            simplex[i] = clamp(simplex[i]);
            value[i] = eval(simplex[i]);
            record(simplex[i], value[i]);
        }
    }
    return best;
}

}  // namespace

FeasibilityResult feasibility_search(const ModelConfig& model,
                                     const FeasibilityConfig& config) {
    if (!(config.eta_max >= config.eta_min) || !(config.p_max >= config.p_min) ||
        !(config.delta_max >= config.delta_min) || config.grid_points < 2)
        throw ConfigError("feasibility: malformed search box");

    const SensorSystem base = model.build();
    FeasibilityResult result;
    FeasibilityObjective objective(base, config, result.trace);

    // Stage 1: single-drive baseline, 1-D optimum over delta at eta = p = 0.
    const int n_base = 4001;
    std::vector<double> base_values(n_base, kNegInf);
    double best_base = kNegInf;
    int best_base_index = 0;
    for (int i = 0; i < n_base; ++i) {
        if (!objective.budget_left())
            throw PartialResultError("feasibility: budget exhausted in baseline grid");
        const double delta = config.delta_min +
                             (config.delta_max - config.delta_min) * i / (n_base - 1);
        base_values[i] = objective(0.0, 0.0, delta);
        if (base_values[i] > best_base) {
            best_base = base_values[i];
            best_base_index = i;
        }
    }
    {
        // Golden-section refinement inside the bracketing neighbors.
        const double h = (config.delta_max - config.delta_min) / (n_base - 1);
        double lo = config.delta_min + h * std::max(0, best_base_index - 1);
        double hi = config.delta_min + h * std::min(n_base - 1, best_base_index + 1);
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - inv_phi * (hi - lo);
        double x2 = lo + inv_phi * (hi - lo);
        double f1 = objective(0.0, 0.0, x1);
        double f2 = objective(0.0, 0.0, x2);
        while (hi - lo > 1e-12 * std::max(1.0, std::abs(lo)) &&
               objective.budget_left()) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = objective(0.0, 0.0, x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = objective(0.0, 0.0, x1);
            }
        }
        const double mid = 0.5 * (lo + hi);
        const double f_mid = objective(0.0, 0.0, mid);
        result.baseline = std::max({best_base, f1, f2, f_mid});
        result.baseline_delta = f_mid >= std::max(f1, f2)  ? mid
                                : f1 >= f2                 ? x1
                                                           : x2;
        if (best_base > std::max({f1, f2, f_mid})) {
            result.baseline_delta = config.delta_min + h * best_base_index;
        }
    }

    // Stage 2: coarse product grid over the full box.
    std::vector<Candidate> top;
    auto offer = [&](const Candidate& c) {
        top.push_back(c);
        std::sort(top.begin(), top.end(),
                  [](const Candidate& a, const Candidate& b) {
                      return a.value > b.value;
                  });
        if (top.size() > 5) top.pop_back();
    };
    const int n = config.grid_points;
    for (int ie = 0; ie < n; ++ie) {
        const double eta = config.eta_min +
                           (config.eta_max - config.eta_min) * ie / (n - 1);
        for (int ip = 0; ip < n; ++ip) {
            const double p =
                config.p_min + (config.p_max - config.p_min) * ip / (n - 1);
            for (int id = 0; id < n; ++id) {
                if (!objective.budget_left())
                    throw PartialResultError(
                        "feasibility: budget exhausted in coarse grid");
                const double delta =
                    config.delta_min +
                    (config.delta_max - config.delta_min) * id / (n - 1);
                const double value = objective(eta, p, delta);
                if (std::isfinite(value)) offer({value, {eta, p, delta}});
            }
        }
    }

    // Stage 3: simplex refinement from the best grid points.
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    Candidate best;
    for (const Candidate& c : top) {
        if (c.value > best.value) best = c;
    }
    const std::array<double, 3> lo{config.eta_min, config.p_min, config.delta_min};
    const std::array<double, 3> hi{config.eta_max, config.p_max, config.delta_max};
    for (const Candidate& start : top) {
        if (!objective.budget_left()) break;
        std::array<double, 3> step{
            0.1 * (config.eta_max - config.eta_min) * jitter(rng),
            0.1 * (config.p_max - config.p_min) * jitter(rng),
            0.1 * (config.delta_max - config.delta_min) * jitter(rng)};
        const Candidate refined = nelder_mead(objective, start.x, lo, hi, step,
                                              config.refine_tol, 300);
        if (refined.value > best.value) best = refined;
    }

    result.best_found = best.value;
    result.best_eta = best.x[0];
    result.best_p = best.x[1];
    result.best_delta = best.x[2];
    result.evaluations = objective.evaluations();
    result.improved = result.best_found >
                      result.baseline +
                          config.feasibility_tol * std::abs(result.baseline) + 1e-12;
    return result;
}

void write_feasibility_csv(std::ostream& out, const FeasibilityResult& result) {
    out << "eval,eta,p,delta,rate\n";
    for (const TracePoint& point : result.trace) {
        out << point.eval << ',' << fmt(point.eta) << ',' << fmt(point.p) << ','
            << fmt(point.delta) << ',' << fmt(point.value) << '\n';
    }
}

std::vector<ConvergenceRow> convergence_study(const ModelConfig& model,
                                              const ConvergenceConfig& config) {
    if (model.kind == ModelTag::generic)
        throw ConfigError("convergence: requires a named two-mode model");
    if (config.j_ladder.empty())
        throw ConfigError("convergence: empty j_ladder");
    if (!std::is_sorted(config.j_ladder.begin(), config.j_ladder.end()))
        throw ConfigError("convergence: j_ladder must be increasing");
    if (!config.p_ladder.empty() &&
        config.p_ladder.size() != config.j_ladder.size())
        throw ConfigError("convergence: p_ladder length must match j_ladder");
    if (!config.slack_ladder.empty() &&
        config.slack_ladder.size() != config.j_ladder.size())
        throw ConfigError("convergence: slack_ladder length must match j_ladder");

    std::vector<ConvergenceRow> rows;
    for (std::size_t i = 0; i < config.j_ladder.size(); ++i) {
        ModelConfig rung = model;
        const double j = config.j_ladder[i];
        if (rung.kind == ModelTag::reciprocal) {
            rung.recip.j = j;
            if (!config.slack_ladder.empty()) {
                rung.recip.gamma1 = -rung.k1 + config.slack_ladder[i];
                rung.recip.gamma2 = -rung.k2 + config.slack_ladder[i];
            }
        } else {
            rung.nonrecip.j = j;
        }

        ConvergenceRow row;
        row.j = j;
        const SensorSystem sys = rung.build();
        const double eta = sys.eta();
        row.stable = is_stable(sys, config.delta);
        if (!row.stable) {
            rows.push_back(row);
            continue;
        }
        const Matrix chi = transfer_matrix_unchecked(sys, config.delta, 0.0);
        const double c12 = std::abs(chi(0, 1));
        const double c21 = std::abs(chi(1, 0));
        row.p = config.p_ladder.empty()
                    ? config.p_margin * c12 * c12 * c12 * (c12 + c21)
                    : config.p_ladder[i];
        row.rate = two_mode_rate(chi, eta, row.p, sys.k1);
        if (eta > 0.0) {
            row.uniform_bound = 0.5 * sys.k1 / eta;
            row.gap = std::abs(*row.rate - *row.uniform_bound);
        }
        std::optional<ReciprocalConditionInput> params;
        if (rung.kind == ModelTag::reciprocal)
            params = ReciprocalConditionInput{config.delta, sys.k1,  sys.k2,
                                              rung.recip.gamma1, rung.recip.gamma2,
                                              rung.recip.j};
        const ConditionReport conds = check_conditions(chi, row.p, params);
        row.margin_chi12 = conds.margin_chi12;
        row.margin_p = conds.margin_p;
        rows.push_back(row);
    }
    return rows;
}

void write_convergence_csv(std::ostream& out,
                           const std::vector<ConvergenceRow>& rows) {
    out << "j,p,rate,uniform_bound,gap,margin_chi12,margin_p,stable\n";
    for (const ConvergenceRow& row : rows) {
        out << fmt(row.j) << ',' << fmt(row.p) << ',' << fmt_opt(row.rate) << ','
            << fmt_opt(row.uniform_bound) << ',' << fmt_opt(row.gap) << ','
            << fmt(row.margin_chi12) << ',' << fmt(row.margin_p) << ','
            << (row.stable ? 1 : 0) << '\n';
    }
}

namespace {

std::set<std::string> with_model_keys(std::initializer_list<const char*> extra) {
    std::set<std::string> keys = model_config_keys();
    for (const char* key : extra) keys.insert(key);
    return keys;
}

}  // namespace

SweepConfig parse_sweep_config(const KeyValueFile& file) {
    static const std::set<std::string> allowed = with_model_keys(
        {"delta_min", "delta_max", "delta_step", "dominance_threshold"});
    file.require_known_keys(allowed);
    SweepConfig config;
    config.delta_min = file.get_double_or("delta_min", config.delta_min);
    config.delta_max = file.get_double_or("delta_max", config.delta_max);
    config.delta_step = file.get_double_or("delta_step", config.delta_step);
    config.dominance_threshold =
        file.get_double_or("dominance_threshold", config.dominance_threshold);
    return config;
}

FeasibilityConfig parse_feasibility_config(const KeyValueFile& file) {
    static const std::set<std::string> allowed = with_model_keys(
        {"eta_min", "eta_max", "p_min", "p_max", "delta_min", "delta_max",
         "grid_points", "budget", "feasibility_tol", "seed"});
    file.require_known_keys(allowed);
    FeasibilityConfig config;
    config.eta_min = file.get_double_or("eta_min", config.eta_min);
    config.eta_max = file.get_double_or("eta_max", config.eta_max);
    config.p_min = file.get_double_or("p_min", config.p_min);
    config.p_max = file.get_double_or("p_max", config.p_max);
    config.delta_min = file.get_double_or("delta_min", config.delta_min);
    config.delta_max = file.get_double_or("delta_max", config.delta_max);
    config.grid_points =
        static_cast<int>(file.get_long_or("grid_points", config.grid_points));
    config.budget = file.get_long_or("budget", config.budget);
    config.feasibility_tol =
        file.get_double_or("feasibility_tol", config.feasibility_tol);
    config.seed = static_cast<std::uint64_t>(file.get_long_or(
        "seed", static_cast<long>(config.seed)));
    return config;
}

ConvergenceConfig parse_convergence_config(const KeyValueFile& file) {
    static const std::set<std::string> allowed = with_model_keys(
        {"j_ladder", "p_ladder", "p_margin", "slack_ladder", "delta"});
    file.require_known_keys(allowed);
    ConvergenceConfig config;
    config.j_ladder = file.get_double_list("j_ladder");
    if (file.has("p_ladder")) config.p_ladder = file.get_double_list("p_ladder");
    config.p_margin = file.get_double_or("p_margin", config.p_margin);
    if (file.has("slack_ladder"))
        config.slack_ladder = file.get_double_list("slack_ladder");
    config.delta = file.get_double_or("delta", config.delta);
    return config;
}

}  // namespace nhsense
