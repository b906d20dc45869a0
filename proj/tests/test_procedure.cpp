#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fracpk/procedure.hpp"
#include "stats_helpers.hpp"

using namespace fracpk;

namespace {

// decaying observations with a controlled relative perturbation
ObservationSet synthetic_obs(double upsilon, double c0, double eps, double T = 3.0,
                             std::size_t n = 60) {
    ObservationSet obs;
    obs.beta = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(n);
        const double wiggle = 1.0 + eps * std::sin(9.7 * t + 0.3) * std::cos(23.1 * t);
        obs.times.push_back(t);
        obs.concentrations.push_back(c0 * std::exp(-upsilon * t) * wiggle);
    }
    return obs;
}

} // namespace

TEST_CASE("budget table structure and monotonicity") {
    auto table = budget_table(0.9, 0.9, 3.5, 3.0, {0.1, 0.2, 0.4}, {0.01, 0.05, 0.10});
    CHECK(table.kernel_value > 0.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(table.budgets[i][j] > 0.0);
            if (i > 0) CHECK(table.budgets[i][j] > table.budgets[i - 1][j]); // radius up
            if (j > 0) CHECK(table.budgets[i][j] > table.budgets[i][j - 1]); // lambda up
        }
    CHECK_THROWS_AS(budget_table(0.9, 0.9, 3.5, 3.0, {}, {0.01}), ValidationError);
    CHECK_THROWS_AS(budget_table(0.9, 0.9, 3.5, 3.0, {0.1}, {1.5}), ValidationError);
}

TEST_CASE("budget table worked cell") {
    auto table = budget_table(0.9, 0.9, 3.5, 3.0, {0.2}, {0.01});
    CHECK_THAT(table.budgets[0][0], Catch::Matchers::WithinAbs(0.2991, 5e-3));
}

TEST_CASE("observed deviation radius") {
    ObservationSet obs = synthetic_obs(1.5, 1.0, 0.0);
    CHECK(observed_deviation_radius(obs, 1.0, 1.5) < 1e-12);
    ObservationSet wob = synthetic_obs(1.5, 1.0, 0.3);
    CHECK(observed_deviation_radius(wob, 1.0, 1.5) > 0.05);
}

TEST_CASE("calibration walk reproduces the worked example") {
    // prescribed concentration radius 0.2, lambda=0.01, H=0.9, beta=0.9,
    // known rate 3.5, horizon 3: recommended sigma^2 interval (0, 0.30]
    ObservationSet obs = synthetic_obs(3.5, 1.0, 0.15);
    ProcedureConfig cfg;
    cfg.h_init = 0.9;
    cfg.beta_init = 0.9;
    cfg.lambda = 0.01;
    cfg.upsilon = 3.5;
    cfg.horizon = 3.0;
    cfg.radius_override = 0.2;
    auto report = run_procedure(obs, cfg);
    REQUIRE(report.iterations.size() == 1);
    CHECK(report.iterations[0].action == "accept");
    CHECK(report.recommended_beta == 0.9);
    CHECK(report.recommended_hurst == 0.9);
    CHECK_THAT(report.sigma2_max, Catch::Matchers::WithinAbs(0.2991, 5e-3));
    CHECK_THAT(std::round(report.sigma2_max * 100.0) / 100.0,
               Catch::Matchers::WithinAbs(0.30, 1e-12));
}

TEST_CASE("under-perturbed data trigger a beta increase") {
    ObservationSet obs = synthetic_obs(1.5, 1.0, 0.01);
    ProcedureConfig cfg;
    cfg.h_init = 0.9;
    cfg.beta_init = 0.5;
    cfg.upsilon = 1.5;
    auto report = run_procedure(obs, cfg);
    REQUIRE_FALSE(report.iterations.empty());
    CHECK(report.iterations[0].action == "increase_beta");
    CHECK(report.iterations[0].deviation_ratio < 0.05);
    if (report.iterations.size() > 1) CHECK(report.iterations[1].beta > 0.5);
}

TEST_CASE("wild data trigger a beta decrease") {
    ObservationSet obs = synthetic_obs(1.5, 1.0, 0.9);
    ProcedureConfig cfg;
    cfg.h_init = 0.9;
    cfg.beta_init = 0.1;
    cfg.upsilon = 1.5;
    auto report = run_procedure(obs, cfg);
    REQUIRE_FALSE(report.iterations.empty());
    CHECK(report.iterations[0].action == "decrease_beta");
}

TEST_CASE("deterministic data collapse the budget") {
    ObservationSet obs = synthetic_obs(1.5, 1.0, 0.0);
    ProcedureConfig cfg;
    cfg.beta_init = 0.9;
    cfg.upsilon = 1.5;
    auto report = run_procedure(obs, cfg);
    // ratio ~ 0 leads to beta increases until saturation or a deterministic fit;
    // the budget recommendation must collapse to (essentially) zero
    CHECK(report.sigma2_max < 1e-10);
    bool flagged = false;
    for (const auto& w : report.warnings)
        if (w.find("deterministic") != std::string::npos ||
            w.find("saturated") != std::string::npos)
            flagged = true;
    CHECK(flagged);
}

TEST_CASE("rate is fitted when not supplied") {
    ObservationSet obs = synthetic_obs(2.0, 1.0, 0.15);
    ProcedureConfig cfg;
    cfg.beta_init = 0.9;
    auto report = run_procedure(obs, cfg);
    CHECK(report.upsilon_fitted);
    CHECK_THAT(report.upsilon_used, Catch::Matchers::WithinRel(2.0, 0.15));
}

TEST_CASE("procedure is deterministic") {
    ObservationSet obs = synthetic_obs(1.5, 1.0, 0.2);
    ProcedureConfig cfg;
    cfg.beta_init = 0.7;
    cfg.upsilon = 1.5;
    auto a = run_procedure(obs, cfg);
    auto b = run_procedure(obs, cfg);
    CHECK(a.sigma2_max == b.sigma2_max);
    CHECK(a.recommended_beta == b.recommended_beta);
    CHECK(a.iterations.size() == b.iterations.size());
}
