// Command-line front end for the fractional pharmacokinetics toolkit.
//
// Subcommands: simulate, estimate, sweep, bound, procedure, density.
// Every subcommand accepts --config FILE (JSON); explicit flags override
// config values, and the fully resolved configuration is echoed to
// <out>/resolved_config.json. Exit codes: 0 success, 2 validation error,
// 3 numeric/estimation failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fracpk/estimation.hpp"
#include "fracpk/fbm.hpp"
#include "fracpk/gaussian.hpp"
#include "fracpk/io.hpp"
#include "fracpk/model.hpp"
#include "fracpk/procedure.hpp"

namespace fs = std::filesystem;
using fracpk::json;

namespace {

struct ConfigBinder {
    CLI::App* cmd = nullptr;
    std::string config_path;
    std::vector<std::function<void(const json&)>> appliers;

    void attach(CLI::App* c) {
        cmd = c;
        c->add_option("--config", config_path, "JSON config file; flags override its values");
    }

    template <class T>
    void bind(CLI::Option* opt, const std::string& key, T& var) {
        appliers.push_back([opt, key, &var](const json& cfg) {
            if (opt->count() == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
        });
    }

    json apply() {
        json cfg = json::object();
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw fracpk::ValidationError("cannot open config file: " + config_path);
            try {
                is >> cfg;
            } catch (const std::exception& e) {
                throw fracpk::ValidationError("config file " + config_path + ": " + e.what());
            }
        }
        for (auto& f : appliers) f(cfg);
        return cfg;
    }
};

struct ModelFlags {
    double upsilon = 1.0, sigma = 0.1, beta = 0.0, hurst = 0.7, c0 = 1.0, horizon = 1.0;

    void attach(CLI::App* cmd, ConfigBinder& b) {
        b.bind(cmd->add_option("--upsilon", upsilon, "elimination rate"), "upsilon", upsilon);
        b.bind(cmd->add_option("--sigma", sigma, "noise scale"), "sigma", sigma);
        b.bind(cmd->add_option("--beta", beta, "volatility exponent in [0,1)"), "beta", beta);
        b.bind(cmd->add_option("--hurst", hurst, "Hurst exponent in (1/2,1)"), "hurst", hurst);
        b.bind(cmd->add_option("--c0", c0, "initial concentration"), "c0", c0);
        b.bind(cmd->add_option("--horizon", horizon, "time horizon T"), "horizon", horizon);
    }

    fracpk::ModelParams params() const {
        fracpk::ModelParams p{upsilon, sigma, beta, hurst, c0, horizon};
        p.validate();
        return p;
    }

    json to_json() const { return fracpk::params_to_json({upsilon, sigma, beta, hurst, c0, horizon}); }
};

fracpk::FbmGenerator parse_generator(const std::string& name) {
    if (name == "volterra") return fracpk::FbmGenerator::volterra;
    if (name == "exact") return fracpk::FbmGenerator::exact;
    throw fracpk::ValidationError("unknown generator '" + name + "' (use volterra or exact)");
}

void write_resolved(const fs::path& out, const json& resolved) {
    fracpk::write_json(out / "resolved_config.json", resolved);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------- simulate

struct SimState {
    ConfigBinder binder;
    ModelFlags model;
    std::size_t steps = 256, replicates = 1;
    std::uint64_t seed = 12345;
    std::string generator = "exact", out = "out";
    bool averaged = false;
};

int cmd_simulate(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "simulate concentration paths");
    auto state = std::make_shared<SimState>();
    auto& s = *state;
    s.binder.attach(cmd);
    s.model.attach(cmd, s.binder);
    s.binder.bind(cmd->add_option("--grid-n", s.steps, "number of grid steps"), "grid_n", s.steps);
    s.binder.bind(cmd->add_option("--seed", s.seed, "master seed"), "seed", s.seed);
    s.binder.bind(cmd->add_option("--replicates", s.replicates, "number of paths"), "replicates",
                  s.replicates);
    s.binder.bind(cmd->add_option("--generator", s.generator, "volterra|exact"), "generator",
                  s.generator);
    s.binder.bind(cmd->add_option("--out", s.out, "output directory"), "out", s.out);
    s.binder.bind(cmd->add_flag("--averaged-weights", s.averaged,
                                "panel-averaged integral weights (better for long horizons)"),
                  "averaged_weights", s.averaged);

    cmd->callback([state]() {
        auto& s = *state;
        s.binder.apply();
        auto gen = parse_generator(s.generator);
        fracpk::ConcentrationSimulator sim(s.model.params(), s.steps, gen, s.averaged);
        const fs::path out(s.out);
        json resolved{{"command", "simulate"},      {"params", s.model.to_json()},
                      {"grid_n", s.steps},          {"seed", s.seed},
                      {"replicates", s.replicates}, {"generator", s.generator},
                      {"averaged_weights", s.averaged}, {"out", s.out}};
        write_resolved(out, resolved);
        for (std::size_t r = 0; r < s.replicates; ++r) {
            const fracpk::Seed seed =
                s.replicates == 1 ? fracpk::Seed{s.seed}
                                  : fracpk::replicate_seed(fracpk::Seed{s.seed}, r);
            auto bundle = sim.run(seed);
            char name[64];
            std::snprintf(name, sizeof(name), "bundle_%04zu", r);
            fracpk::write_bundle_csv(out / (std::string(name) + ".csv"), bundle);
            fracpk::write_json(out / (std::string(name) + ".json"), fracpk::bundle_sidecar(bundle));
            if (bundle.tau0_index)
                std::cerr << "note: replicate " << r << " hits a zero concentration core at t="
                          << bundle.grid[*bundle.tau0_index] << "\n";
        }
        std::cout << "wrote " << s.replicates << " bundle(s) to " << s.out << "\n";
    });
    return 0;
}

// ---------------------------------------------------------------- estimate

struct EstState {
    ConfigBinder binder;
    std::string data, out = "out";
    double beta = 0.0;
    double hval = 0.0, sval = 0.0;
    std::optional<double> hurst, sigma;
};

int cmd_estimate(CLI::App& app) {
    auto* cmd = app.add_subcommand("estimate", "run the estimators on observed concentrations");
    auto state = std::make_shared<EstState>();
    auto& s = *state;
    s.binder.attach(cmd);
    s.binder.bind(cmd->add_option("--data", s.data, "t,c CSV of observations")->required(), "data",
                  s.data);
    s.binder.bind(cmd->add_option("--beta", s.beta, "volatility exponent used for the transform"),
                  "beta", s.beta);
    auto* hopt = cmd->add_option("--hurst", s.hval, "known Hurst exponent (enables the known-parameter rate estimator)");
    auto* sopt = cmd->add_option("--sigma", s.sval, "known noise scale (enables the known-parameter rate estimator)");
    s.binder.bind(cmd->add_option("--out", s.out, "output directory"), "out", s.out);

    cmd->callback([state, hopt, sopt]() {
        auto& s = *state;
        json cfg = s.binder.apply();
        if (hopt->count() > 0) s.hurst = s.hval;
        else if (cfg.contains("hurst")) s.hurst = cfg["hurst"].get<double>();
        if (sopt->count() > 0) s.sigma = s.sval;
        else if (cfg.contains("sigma")) s.sigma = cfg["sigma"].get<double>();

        auto obs = fracpk::load_observations(s.data, s.beta);
        auto x = fracpk::to_fou_observations(obs);
        const double delta = obs.delta();
        json report{{"n", obs.times.size() - 1}, {"delta", delta}, {"beta", s.beta}};
        std::size_t failures = 0, attempts = 0;
        auto run = [&](const std::string& key, auto&& fn) {
            ++attempts;
            try {
                report[key] = fracpk::estimation_to_json(fn());
            } catch (const fracpk::EstimationError& e) {
                report[key] = json{{"error", e.what()}};
                ++failures;
            }
        };
        std::optional<fracpk::EstimationResult> hres;
        run("hurst", [&] {
            auto r = fracpk::hurst_hat(x);
            hres = r;
            return r;
        });
        run("sigma", [&] {
            if (!hres) throw fracpk::EstimationError("sigma: no Hurst estimate available");
            return fracpk::sigma_hat(x, hres->estimate, delta, s.beta);
        });
        run("upsilon_plugin", [&] { return fracpk::upsilon_hat_unknown(x, delta, s.beta); });
        run("upsilon_regression", [&] { return fracpk::regression_upsilon(obs); });
        if (s.hurst && s.sigma) {
            run("upsilon_known", [&] {
                auto grid = fracpk::TimeGrid::from_times(obs.times);
                return fracpk::upsilon_hat_known(fracpk::SamplePath(grid, x), *s.hurst, *s.sigma,
                                                 s.beta);
            });
        }
        const fs::path out(s.out);
        json resolved{{"command", "estimate"}, {"data", s.data}, {"beta", s.beta}, {"out", s.out}};
        if (s.hurst) resolved["hurst"] = *s.hurst;
        if (s.sigma) resolved["sigma"] = *s.sigma;
        write_resolved(out, resolved);
        fracpk::write_json(out / "estimates.json", report);
        std::cout << report.dump(2) << "\n";
        if (failures == attempts)
            throw fracpk::EstimationError("all estimators failed on this data set");
    });
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepState {
    ConfigBinder binder;
    ModelFlags model;
    std::vector<std::size_t> n_values{10, 18, 32, 56, 100, 178, 316, 562, 1000};
    std::size_t replicates = 50;
    std::uint64_t seed = 12345;
    std::string out = "out";
};

int cmd_sweep(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "sweep", "Monte Carlo consistency sweep of the estimators over sample sizes");
    auto state = std::make_shared<SweepState>();
    auto& s = *state;
    s.binder.attach(cmd);
    s.model.attach(cmd, s.binder);
    s.binder.bind(cmd->add_option("--n-values", s.n_values, "sample sizes"), "n_values", s.n_values);
    s.binder.bind(cmd->add_option("--replicates", s.replicates, "replicates per size"),
                  "replicates", s.replicates);
    s.binder.bind(cmd->add_option("--seed", s.seed, "master seed"), "seed", s.seed);
    s.binder.bind(cmd->add_option("--out", s.out, "output directory"), "out", s.out);

    cmd->callback([state]() {
        auto& s = *state;
        s.binder.apply();
        // in-fill + long-span schedule: delta_n = n^{-1/2}, T_n = sqrt(n)
        fracpk::ModelParams base = s.model.params();
        const fs::path out(s.out);
        json resolved{{"command", "sweep"},   {"params", s.model.to_json()},
                      {"n_values", s.n_values}, {"replicates", s.replicates},
                      {"seed", s.seed},       {"out", s.out}};
        write_resolved(out, resolved);

        struct Column {
            std::string name;
            double truth;
            std::map<std::size_t, std::vector<double>> samples;
            std::map<std::size_t, std::size_t> failures;
        };
        std::vector<Column> cols{{"hurst", base.hurst, {}, {}},
                                 {"sigma2", base.sigma * base.sigma, {}, {}},
                                 {"upsilon_plugin", base.upsilon, {}, {}},
                                 {"upsilon_known", base.upsilon, {}, {}},
                                 {"upsilon_regression", base.upsilon, {}, {}}};
        for (std::size_t n : s.n_values) {
            if (n < 5) throw fracpk::ValidationError("sweep: n must be >= 5");
            fracpk::ModelParams p = base;
            p.horizon = std::sqrt(static_cast<double>(n));
            fracpk::ConcentrationSimulator sim(p, n, fracpk::FbmGenerator::exact,
                                               /*averaged_weights=*/true);
            const double delta = p.horizon / static_cast<double>(n);
            for (std::size_t r = 0; r < s.replicates; ++r) {
                auto bundle = sim.run(fracpk::replicate_seed(fracpk::Seed{s.seed}, r));
                const auto& x = bundle.x.values;
                auto record = [&](Column& c, auto&& fn) {
                    try {
                        c.samples[n].push_back(fn());
                    } catch (const fracpk::EstimationError&) {
                        ++c.failures[n];
                    }
                };
                std::optional<double> hest;
                record(cols[0], [&] {
                    const double h = fracpk::hurst_hat(x).estimate;
                    hest = h;
                    return h;
                });
                record(cols[1], [&] {
                    if (!hest) throw fracpk::EstimationError("no Hurst estimate");
                    const double sg = fracpk::sigma_hat(x, *hest, delta, p.beta).estimate;
                    return sg * sg;
                });
                record(cols[2],
                       [&] { return fracpk::upsilon_hat_unknown(x, delta, p.beta).estimate; });
                record(cols[3], [&] {
                    return fracpk::upsilon_hat_known(bundle.x, p.hurst, p.sigma, p.beta).estimate;
                });
                record(cols[4], [&] {
                    fracpk::ObservationSet obs{bundle.grid.times(), bundle.c.values, p.beta};
                    return fracpk::regression_upsilon(obs).estimate;
                });
            }
        }
        for (auto& c : cols) {
            std::ofstream os(out / (c.name + ".csv"));
            os << "n,median,q25,q75,truth,failures\n";
            for (std::size_t n : s.n_values) {
                auto& v = c.samples[n];
                if (v.empty()) {
                    os << n << ",nan,nan,nan," << c.truth << "," << c.failures[n] << "\n";
                    continue;
                }
                os << n << "," << median_of(v) << "," << quantile_of(v, 0.25) << ","
                   << quantile_of(v, 0.75) << "," << c.truth << "," << c.failures[n] << "\n";
            }
            std::cout << "wrote " << (out / (c.name + ".csv")).string() << "\n";
        }
    });
    return 0;
}

// ---------------------------------------------------------------- bound

struct BoundState {
    ConfigBinder binder;
    ModelFlags model;
    std::vector<double> radius_grid{0.1, 0.2, 0.4};
    std::vector<double> lambda_grid{0.01, 0.05, 0.10};
    double radius_val = 0.0;
    std::optional<double> radius;
    std::string out = "out";
};

int cmd_bound(CLI::App& app) {
    auto* cmd = app.add_subcommand("bound", "deviation bounds and sigma^2 budget tables");
    auto state = std::make_shared<BoundState>();
    auto& s = *state;
    s.binder.attach(cmd);
    s.model.attach(cmd, s.binder);
    s.binder.bind(cmd->add_option("--radius-grid", s.radius_grid,
                                  "concentration-space deviation radii"),
                  "radius_grid", s.radius_grid);
    s.binder.bind(cmd->add_option("--lambda-grid", s.lambda_grid, "exceedance levels"),
                  "lambda_grid", s.lambda_grid);
    auto* ropt = cmd->add_option("--radius", s.radius_val,
                                 "single radius: also report the tail bound at the given sigma");
    s.binder.bind(cmd->add_option("--out", s.out, "output directory"), "out", s.out);

    cmd->callback([state, ropt]() {
        auto& s = *state;
        json cfg = s.binder.apply();
        if (ropt->count() > 0) s.radius = s.radius_val;
        else if (cfg.contains("radius")) s.radius = cfg["radius"].get<double>();

        fracpk::ModelParams p = s.model.params();
        auto table = fracpk::budget_table(p.hurst, p.beta, p.upsilon, p.horizon, s.radius_grid,
                                          s.lambda_grid);
        json report{{"budget_table", fracpk::budget_table_to_json(table)},
                    {"params", s.model.to_json()}};
        if (s.radius) {
            const double x = std::pow(*s.radius, 1.0 - p.beta);
            auto b = fracpk::borell_deviation_bound(x, p.horizon, p);
            report["tail_bound"] = json{{"radius", *s.radius},
                                        {"x_radius", x},
                                        {"probability", b.probability},
                                        {"raw", b.raw}};
        }
        const fs::path out(s.out);
        json resolved{{"command", "bound"},        {"params", s.model.to_json()},
                      {"radius_grid", s.radius_grid}, {"lambda_grid", s.lambda_grid},
                      {"out", s.out}};
        if (s.radius) resolved["radius"] = *s.radius;
        write_resolved(out, resolved);
        fracpk::write_json(out / "bound.json", report);
        std::cout << fracpk::budget_table_text(table);
        if (s.radius)
            std::cout << "tail bound at radius " << *s.radius << ": "
                      << report["tail_bound"]["probability"].get<double>() << "\n";
    });
    return 0;
}

// ---------------------------------------------------------------- procedure

struct ProcState {
    ConfigBinder binder;
    std::string data, out = "out";
    fracpk::ProcedureConfig cfg;
    double uval = 0.0, rval = 0.0, tval = 0.0;
};

int cmd_procedure(CLI::App& app) {
    auto* cmd = app.add_subcommand("procedure", "calibration walk for (H, sigma^2, beta)");
    auto state = std::make_shared<ProcState>();
    auto& s = *state;
    s.binder.attach(cmd);
    s.binder.bind(cmd->add_option("--data", s.data, "t,c CSV of observations")->required(), "data",
                  s.data);
    s.binder.bind(cmd->add_option("--hurst", s.cfg.h_init, "working Hurst exponent"), "hurst",
                  s.cfg.h_init);
    s.binder.bind(cmd->add_option("--beta", s.cfg.beta_init, "initial volatility exponent"), "beta",
                  s.cfg.beta_init);
    s.binder.bind(cmd->add_option("--lambda", s.cfg.lambda, "exceedance level"), "lambda",
                  s.cfg.lambda);
    s.binder.bind(cmd->add_option("--c0", s.cfg.c0, "initial concentration"), "c0", s.cfg.c0);
    s.binder.bind(cmd->add_option("--radius-grid", s.cfg.radius_grid, "table radii"), "radius_grid",
                  s.cfg.radius_grid);
    s.binder.bind(cmd->add_option("--lambda-grid", s.cfg.lambda_grid, "table lambdas"),
                  "lambda_grid", s.cfg.lambda_grid);
    s.binder.bind(cmd->add_option("--max-iterations", s.cfg.max_iterations, "iteration cap"),
                  "max_iterations", s.cfg.max_iterations);
    auto* uopt = cmd->add_option("--upsilon", s.uval, "known elimination rate (else fitted)");
    auto* ropt = cmd->add_option("--radius", s.rval, "override deviation radius (concentration scale)");
    auto* topt = cmd->add_option("--horizon", s.tval, "horizon (default: last observation)");
    s.binder.bind(cmd->add_option("--out", s.out, "output directory"), "out", s.out);

    cmd->callback([state, uopt, ropt, topt]() {
        auto& s = *state;
        json cfg = s.binder.apply();
        if (uopt->count() > 0) s.cfg.upsilon = s.uval;
        else if (cfg.contains("upsilon")) s.cfg.upsilon = cfg["upsilon"].get<double>();
        if (ropt->count() > 0) s.cfg.radius_override = s.rval;
        else if (cfg.contains("radius")) s.cfg.radius_override = cfg["radius"].get<double>();
        if (topt->count() > 0) s.cfg.horizon = s.tval;
        else if (cfg.contains("horizon")) s.cfg.horizon = cfg["horizon"].get<double>();

        auto obs = fracpk::load_observations(s.data, s.cfg.beta_init);
        auto report = fracpk::run_procedure(obs, s.cfg);
        const fs::path out(s.out);
        json resolved{{"command", "procedure"},
                      {"data", s.data},
                      {"hurst", s.cfg.h_init},
                      {"beta", s.cfg.beta_init},
                      {"lambda", s.cfg.lambda},
                      {"c0", s.cfg.c0},
                      {"max_iterations", s.cfg.max_iterations},
                      {"out", s.out}};
        if (s.cfg.upsilon) resolved["upsilon"] = *s.cfg.upsilon;
        if (s.cfg.radius_override) resolved["radius"] = *s.cfg.radius_override;
        if (s.cfg.horizon) resolved["horizon"] = *s.cfg.horizon;
        write_resolved(out, resolved);
        fracpk::write_json(out / "report.json", fracpk::procedure_report_to_json(report));
        std::ostringstream text;
        text << "recommended H      : " << report.recommended_hurst << "\n"
             << "recommended beta   : " << report.recommended_beta << "\n"
             << "sigma^2 interval   : (0, " << report.sigma2_max << "]\n"
             << "upsilon used       : " << report.upsilon_used
             << (report.upsilon_fitted ? " (fitted)" : " (given)") << "\n\n"
             << "budget table (sigma^2 budgets):\n"
             << fracpk::budget_table_text(report.table);
        for (const auto& w : report.warnings) text << "warning: " << w << "\n";
        std::ofstream(out / "report.txt") << text.str();
        std::cout << text.str();
    });
    return 0;
}

// ---------------------------------------------------------------- density

struct DensState {
    ConfigBinder binder;
    ModelFlags model;
    std::vector<double> times{1.0};
    std::string points, out = "out";
    std::size_t curve_points = 400;
    double x_max = 0.0; // 0 => auto
};

int cmd_density(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "density", "finite-dimensional density of the observed concentrations");
    auto state = std::make_shared<DensState>();
    auto& s = *state;
    s.binder.attach(cmd);
    s.model.attach(cmd, s.binder);
    s.binder.bind(cmd->add_option("--times", s.times, "observation times"), "times", s.times);
    s.binder.bind(cmd->add_option("--points", s.points,
                                  "CSV of evaluation points (one row per point, n columns)"),
                  "points", s.points);
    s.binder.bind(cmd->add_option("--curve-points", s.curve_points,
                                  "grid size for the 1-d curve mode"),
                  "curve_points", s.curve_points);
    s.binder.bind(cmd->add_option("--x-max", s.x_max, "upper end of the 1-d curve (0 = auto)"),
                  "x_max", s.x_max);
    s.binder.bind(cmd->add_option("--out", s.out, "output directory"), "out", s.out);

    cmd->callback([state]() {
        auto& s = *state;
        s.binder.apply();
        fracpk::ModelParams p = s.model.params();
        auto spec = fracpk::build_gaussian_spec(s.times, p);
        fracpk::ChiDensity dens(spec, p.beta);
        const fs::path out(s.out);
        json resolved{{"command", "density"}, {"params", s.model.to_json()}, {"times", s.times},
                      {"out", s.out},         {"points", s.points}};
        write_resolved(out, resolved);
        json meta{{"condition", dens.condition()}, {"warnings", spec.warnings}};
        auto os = fracpk::detail::open_out(out / "density.csv");
        if (!s.points.empty()) {
            std::ifstream is(s.points);
            if (!is) throw fracpk::ValidationError("cannot open points file: " + s.points);
            std::string line;
            std::size_t lineno = 0;
            os << "row,density\n";
            std::size_t row = 0;
            while (std::getline(is, line)) {
                ++lineno;
                if (line.empty()) continue;
                auto fields = fracpk::detail::split_csv_line(line);
                if (lineno == 1 && !fields.empty() &&
                    fields[0].find_first_not_of("0123456789.eE+-") != std::string::npos)
                    continue; // header
                std::vector<double> xs;
                for (const auto& f : fields)
                    xs.push_back(fracpk::detail::parse_double(f, s.points, lineno, "coordinate"));
                os << row++ << "," << fracpk::detail::fmt17(dens.evaluate(xs).value) << "\n";
            }
        } else {
            if (s.times.size() != 1)
                throw fracpk::ValidationError(
                    "density curve mode needs exactly one time; pass --points for n > 1");
            double xmax = s.x_max;
            if (xmax <= 0.0) {
                const double ymax = spec.vn(0) + 6.0 * std::sqrt(spec.rn(0, 0));
                xmax = std::pow(ymax, 1.0 / (1.0 - p.beta));
            }
            os << "x,density\n";
            for (std::size_t i = 1; i <= s.curve_points; ++i) {
                const double x = xmax * static_cast<double>(i) / s.curve_points;
                os << fracpk::detail::fmt17(x) << ","
                   << fracpk::detail::fmt17(dens.evaluate({x}).value) << "\n";
            }
            meta["x_max"] = xmax;
        }
        fracpk::write_json(out / "density_meta.json", meta);
        std::cout << "condition estimate: " << dens.condition() << "\n";
    });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional pharmacokinetics toolkit"};
    app.require_subcommand(1);
    cmd_simulate(app);
    cmd_estimate(app);
    cmd_sweep(app);
    cmd_bound(app);
    cmd_procedure(app);
    cmd_density(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const fracpk::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fracpk::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const fracpk::EstimationError& e) {
        std::cerr << "estimation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
