#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fracpk/estimation.hpp"
#include "fracpk/gaussian.hpp"

namespace fracpk {

// Grid of sigma^2 budgets M(lambda, radius^{1-beta}, H) over concentration-space
// deviation radii and exceedance levels. The kernel value R_{H,theta}(T,T) is
// computed once per table.
struct BudgetTable {
    std::vector<double> radii;   // concentration-space
    std::vector<double> lambdas;
    std::vector<std::vector<double>> budgets; // budgets[i][j] for radii[i], lambdas[j]
    double kernel_value = 0.0;   // R_{H,theta}(T,T)
};

inline BudgetTable budget_table(double hurst, double beta, double upsilon, double horizon,
                                const std::vector<double>& radii,
                                const std::vector<double>& lambdas,
                                const QuadControl& ctl = {}) {
    if (radii.empty() || lambdas.empty())
        throw ValidationError("budget_table: empty radius or lambda grid");
    for (double r : radii)
        if (!(r > 0.0)) throw ValidationError("budget_table: radii must be positive");
    for (double l : lambdas)
        if (!(l > 0.0 && l < 1.0)) throw ValidationError("budget_table: lambdas must be in (0,1)");
    ModelParams p{upsilon, 1.0, beta, hurst, 1.0, horizon};
    p.validate();
    BudgetTable table;
    table.radii = radii;
    table.lambdas = lambdas;
    table.kernel_value = r_h_theta(horizon, horizon, p, ctl);
    table.budgets.resize(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        table.budgets[i].resize(lambdas.size());
        const double x = std::pow(radii[i], 1.0 - beta);
        for (std::size_t j = 0; j < lambdas.size(); ++j)
            table.budgets[i][j] = x * x / (2.0 * table.kernel_value * std::log(2.0 / lambdas[j]));
    }
    return table;
}

// Largest transformed-scale deviation of the observations from the
// deterministic decay x0 e^{-at}.
inline double observed_deviation_radius(const ObservationSet& obs, double c0, double upsilon) {
    obs.validate();
    if (!(c0 > 0.0)) throw ValidationError("observed_deviation_radius: c0 must be positive");
    if (!(upsilon > 0.0)) throw ValidationError("observed_deviation_radius: upsilon must be positive");
    const double a = upsilon * (1.0 - obs.beta);
    const double x0 = std::pow(c0, 1.0 - obs.beta);
    double dev = 0.0;
    for (std::size_t i = 0; i < obs.times.size(); ++i) {
        const double x = std::pow(obs.concentrations[i], 1.0 - obs.beta);
        dev = std::max(dev, std::fabs(x - x0 * std::exp(-a * obs.times[i])));
    }
    return dev;
}

struct ProcedureConfig {
    double h_init = 0.9;
    double beta_init = 0.9;
    double lambda = 0.01;
    std::vector<double> radius_grid{0.1, 0.2, 0.4};
    std::vector<double> lambda_grid{0.01, 0.05, 0.10};
    int max_iterations = 8;
    double c0 = 1.0;
    std::optional<double> horizon;          // defaults to the last observation time
    std::optional<double> upsilon;          // if absent, fit by log-linear regression
    std::optional<double> radius_override;  // concentration-space radius for the budget

    // codified adequacy judgments
    double ratio_low = 0.05;   // below: data barely perturbed, raise beta
    double ratio_high = 0.5;   // above: data too wild for the current beta, lower it
    double local_h_min = 0.75; // implied Hurst below this flags rough paths
    double beta_step = 0.1;
    double beta_max = 0.95;
};

struct ProcedureIteration {
    double beta = 0.0;
    double radius_c = 0.0;      // concentration-space radius (x_radius^{1/(1-beta)})
    double x_radius = 0.0;      // deviation radius on the transformed scale
    double budget = 0.0;        // M(lambda, x_radius, H)
    double deviation_ratio = 0.0; // x_obs / C0^{1-beta}
    std::optional<double> implied_hurst;
    std::string action;         // "accept" | "increase_beta" | "decrease_beta" | "deterministic_fit"
};

struct ProcedureReport {
    std::vector<ProcedureIteration> iterations;
    double recommended_hurst = 0.0;
    double recommended_beta = 0.0;
    double sigma2_max = 0.0;   // recommended interval is (0, sigma2_max]
    double upsilon_used = 0.0;
    bool upsilon_fitted = false;
    BudgetTable table;         // budget grid at the recommended (H, beta)
    std::vector<std::string> warnings;
};

// Calibration walk: fix H, fit or accept upsilon, then adjust beta until the
// observed deviation is significant but moderate, reporting the sigma^2 budget
// at each step. The admissible recommendation is the interval (0, sigma2_max].
inline ProcedureReport run_procedure(const ObservationSet& obs_in, const ProcedureConfig& cfg,
                                     const QuadControl& ctl = {}) {
    if (!(cfg.h_init > 0.5 && cfg.h_init < 1.0))
        throw ValidationError("run_procedure: h_init must lie in (1/2,1)");
    if (!(cfg.beta_init >= 0.0 && cfg.beta_init < 1.0))
        throw ValidationError("run_procedure: beta_init must lie in [0,1)");
    if (cfg.max_iterations < 1)
        throw ValidationError("run_procedure: max_iterations must be >= 1");
    ObservationSet obs = obs_in;
    obs.beta = cfg.beta_init;
    obs.validate();

    ProcedureReport report;
    report.recommended_hurst = cfg.h_init;
    if (cfg.upsilon) {
        report.upsilon_used = *cfg.upsilon;
        if (!(report.upsilon_used > 0.0))
            throw ValidationError("run_procedure: upsilon must be positive");
    } else {
        report.upsilon_used = regression_upsilon(obs).estimate;
        report.upsilon_fitted = true;
        if (!(report.upsilon_used > 0.0)) {
            report.warnings.push_back("fitted elimination rate is nonpositive; data do not decay");
            throw EstimationError("run_procedure: fitted upsilon is nonpositive");
        }
    }
    const double horizon = cfg.horizon ? *cfg.horizon : obs.times.back();
    if (!(horizon > 0.0)) throw ValidationError("run_procedure: horizon must be positive");

    double beta = cfg.beta_init;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        obs.beta = beta;
        ProcedureIteration it;
        it.beta = beta;
        const double x0 = std::pow(cfg.c0, 1.0 - beta);
        const double x_obs = observed_deviation_radius(obs, cfg.c0, report.upsilon_used);
        // a prescribed concentration-space radius fixes the budget query;
        // otherwise the observed transformed-scale deviation is used
        it.x_radius = cfg.radius_override ? std::pow(*cfg.radius_override, 1.0 - beta) : x_obs;
        it.radius_c = cfg.radius_override
                          ? *cfg.radius_override
                          : (x_obs > 0.0 ? std::pow(x_obs, 1.0 / (1.0 - beta)) : 0.0);
        it.deviation_ratio = x_obs / x0;
        try {
            EstimationResult h = hurst_hat(to_fou_observations(obs));
            it.implied_hurst = h.estimate;
            if (h.estimate < cfg.local_h_min)
                report.warnings.push_back(
                    "implied local regularity (Hurst estimate " + std::to_string(h.estimate) +
                    ") is below the working exponent; paths look rougher than assumed");
        } catch (const EstimationError&) {
            report.warnings.push_back("local regularity diagnostic unavailable (degenerate data)");
        }

        if (it.x_radius <= 0.0) {
            it.action = "deterministic_fit";
            it.budget = 0.0;
            report.warnings.push_back(
                "observations match the deterministic decay; recommended noise budget collapses to 0");
            report.iterations.push_back(it);
            break;
        }

        ModelParams p{report.upsilon_used, 1.0, beta, cfg.h_init, cfg.c0, horizon};
        it.budget = sigma_budget(BudgetQuery{cfg.lambda, it.x_radius, p}, ctl);

        if (cfg.radius_override) {
            // prescribed radius: report the budget at the working beta directly
            it.action = "accept";
            report.iterations.push_back(it);
            break;
        }

        if (it.deviation_ratio < cfg.ratio_low) {
            it.action = "increase_beta";
            report.iterations.push_back(it);
            const double next = std::min(beta + cfg.beta_step, cfg.beta_max);
            if (next == beta) {
                report.warnings.push_back("beta adjustment saturated at the upper limit");
                break;
            }
            beta = next;
        } else if (it.deviation_ratio > cfg.ratio_high) {
            it.action = "decrease_beta";
            report.iterations.push_back(it);
            const double next = std::max(beta - cfg.beta_step, 0.0);
            if (next == beta) {
                report.warnings.push_back("beta adjustment saturated at zero");
                break;
            }
            beta = next;
        } else {
            it.action = "accept";
            report.iterations.push_back(it);
            break;
        }
    }

    if (report.iterations.empty())
        throw NumericError("run_procedure: no iterations performed");
    const ProcedureIteration& last = report.iterations.back();
    if (last.action != "accept" && last.action != "deterministic_fit")
        report.warnings.push_back("procedure stopped before the deviation ratio entered the target band");
    report.recommended_beta = last.beta;
    report.sigma2_max = last.budget;
    report.table = budget_table(cfg.h_init, report.recommended_beta, report.upsilon_used, horizon,
                                cfg.radius_grid, cfg.lambda_grid, ctl);
    return report;
}

} // namespace fracpk
