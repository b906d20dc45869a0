#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "fracpk/gaussian.hpp"
#include "stats_helpers.hpp"

using namespace fracpk;

namespace {
ModelParams params(double upsilon, double sigma, double beta, double hurst, double c0, double T) {
    return ModelParams{upsilon, sigma, beta, hurst, c0, T};
}
} // namespace

TEST_CASE("weighted-integral covariance basics") {
    auto p = params(3.5, 0.5, 0.9, 0.9, 1.0, 3.0);
    CHECK(r_h_theta(0.0, 2.0, p) == 0.0);
    const double a = r_h_theta(1.0, 2.5, p);
    const double b = r_h_theta(2.5, 1.0, p);
    CHECK_THAT(a, Catch::Matchers::WithinRel(b, 1e-9));
    CHECK(a > 0.0);
    CHECK(r_h_theta(1.0, 3.0, p) > a); // monotone in the second argument
}

TEST_CASE("covariance kernel frozen oracles") {
    // frozen from an independent implementation (brute-force double quadrature
    // and Monte Carlo cross-checked)
    auto p9 = params(3.5, 0.5, 0.9, 0.9, 1.0, 3.0);
    CHECK_THAT(r_h_theta(3.0, 3.0, p9), Catch::Matchers::WithinRel(0.228714, 2e-4));
    auto p6 = params(3.5, 0.5, 0.9, 0.6, 1.0, 3.0);
    CHECK_THAT(r_h_theta(3.0, 3.0, p6), Catch::Matchers::WithinRel(0.124386, 2e-4));
}

TEST_CASE("small-rate limit reduces to the plain fBm covariance") {
    // as upsilon -> 0 the weight tends to the constant (1-beta)
    auto p = params(1e-8, 1.0, 0.3, 0.8, 1.0, 3.0);
    const double scale = (1.0 - p.beta) * (1.0 - p.beta);
    for (auto [s, t] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {2.0, 3.0}}) {
        CHECK_THAT(r_h_theta(s, t, p),
                   Catch::Matchers::WithinRel(scale * fbm_covariance(s, t, HurstParam(0.8)), 1e-5));
    }
}

TEST_CASE("damped and undamped kernels agree where both are finite") {
    auto p = params(1.5, 0.5, 0.2, 0.75, 1.0, 3.0);
    const double a = p.drift_rate();
    for (auto [s, t] : {std::pair{0.5, 1.0}, {1.0, 3.0}, {2.0, 2.0}}) {
        const double expected = p.sigma * p.sigma * std::exp(-a * (s + t)) * r_h_theta(s, t, p);
        CHECK_THAT(r_x(s, t, p), Catch::Matchers::WithinRel(expected, 1e-8));
    }
}

TEST_CASE("damped kernel survives horizons where the raw kernel overflows") {
    auto p = params(1.5, 0.5, 0.0, 0.9, 1.0, 1000.0);
    CHECK_THROWS_AS(r_h_theta(1000.0, 1000.0, p), NumericError);
    const double v = r_x(1000.0, 1000.0, p);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
    // approaches the stationary level sigma^2 (1-b)^{2-2H} ups^{-2H} H Gamma(2H)
    // from below (the polynomial memory term converges slowly for H near 1)
    const double stat = 0.25 * std::pow(1.5, -1.8) * 0.9 * std::tgamma(1.8);
    CHECK(v > 0.5 * stat);
    CHECK(v < stat * (1.0 + 1e-6));
    CHECK(r_x(4.0, 4.0, p) > r_x(2.0, 2.0, p)); // increasing toward the limit
    // by t = 1000 the variance has settled: doubling the horizon moves nothing
    CHECK_THAT(r_x(2000.0, 2000.0, p), Catch::Matchers::WithinRel(v, 1e-9));
}

TEST_CASE("zero noise collapses the process covariance") {
    auto p = params(1.5, 0.0, 0.2, 0.75, 1.0, 3.0);
    CHECK(r_x(1.0, 2.0, p) == 0.0);
}

TEST_CASE("quadrature failure is reported with the achieved error") {
    auto p = params(3.5, 0.5, 0.9, 0.9, 1.0, 3.0);
    QuadControl ctl{1e-15, 0.0, 0};
    CHECK_THROWS_AS(r_h_theta(3.0, 3.0, p, ctl), NumericError);
    try {
        r_h_theta(3.0, 3.0, p, ctl);
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("error estimate") != std::string::npos);
    }
}

TEST_CASE("finite-dimensional spec is symmetric positive semidefinite") {
    auto p = params(1.5, 0.51, 0.0, 0.9, 1.0, 2.0);
    std::vector<double> times{0.5, 1.0, 1.5, 2.0};
    auto spec = build_gaussian_spec(times, p);
    CHECK(spec.rn.isApprox(spec.rn.transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.rn);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * spec.rn.trace());
    const double a = p.drift_rate();
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK_THAT(spec.vn(i), Catch::Matchers::WithinRel(std::exp(-a * times[i]), 1e-12));
    CHECK_THROWS_AS(build_gaussian_spec({1.0, 0.5}, p), ValidationError);
    CHECK_THROWS_AS(build_gaussian_spec({0.0, 0.5}, p), ValidationError);
}

TEST_CASE("one-point density is the folded normal") {
    auto p = params(1.5, 0.51, 0.0, 0.9, 1.0, 2.0);
    auto spec = build_gaussian_spec({1.0}, p);
    ChiDensity dens(spec, 0.0);
    const double v = spec.vn(0);
    const double r = spec.rn(0, 0);
    for (double x : {0.05, 0.3, 0.8, 1.5}) {
        const double expected = (std::exp(-(x - v) * (x - v) / (2.0 * r)) +
                                 std::exp(-(x + v) * (x + v) / (2.0 * r))) /
                                std::sqrt(2.0 * M_PI * r);
        CHECK_THAT(dens.evaluate({x}).value, Catch::Matchers::WithinRel(expected, 1e-10));
    }
    CHECK(dens.evaluate({-0.1}).value == 0.0);
    CHECK(dens.evaluate({0.0}).value == 0.0);
    CHECK(dens.condition() > 0.0);
}

TEST_CASE("one-point density integrates to one") {
    auto p = params(1.5, 0.51, 0.0, 0.9, 1.0, 2.0);
    auto spec = build_gaussian_spec({1.0}, p);
    ChiDensity dens(spec, 0.0);
    const double hi = spec.vn(0) + 10.0 * std::sqrt(spec.rn(0, 0));
    auto q = integrate_adaptive([&](double x) { return dens.evaluate({x}).value; }, 1e-12, hi,
                                1e-8);
    CHECK_THAT(q.value, Catch::Matchers::WithinAbs(1.0, 1e-3));
}

TEST_CASE("two-point density with beta transform integrates to one") {
    auto p = params(1.5, 0.4, 0.5, 0.8, 1.0, 2.0);
    auto spec = build_gaussian_spec({1.0, 2.0}, p);
    ChiDensity dens(spec, p.beta);
    // integration range in the concentration scale: y = x^{1-beta} covers
    // vn +- 8 sd, so x up to (vn + 8 sd)^2 for beta = 1/2
    const double hi0 = std::pow(spec.vn(0) + 8.0 * std::sqrt(spec.rn(0, 0)), 2.0);
    const double hi1 = std::pow(spec.vn(1) + 8.0 * std::sqrt(spec.rn(1, 1)), 2.0);
    auto inner = [&](double x0) {
        return integrate_adaptive(
                   [&](double x1) { return dens.evaluate({x0, x1}).value; }, 1e-12, hi1, 1e-7)
            .value;
    };
    auto q = integrate_adaptive(inner, 1e-12, hi0, 1e-6);
    CHECK_THAT(q.value, Catch::Matchers::WithinAbs(1.0, 1e-3));
}

TEST_CASE("density dimension and support checks") {
    auto p = params(1.5, 0.4, 0.0, 0.8, 1.0, 2.0);
    auto spec = build_gaussian_spec({1.0, 2.0}, p);
    ChiDensity dens(spec, 0.0);
    CHECK_THROWS_AS(dens.evaluate({1.0}), ValidationError);
    CHECK(dens.evaluate({0.5, -1.0}).value == 0.0);
}

TEST_CASE("tail bound and budget invert each other") {
    auto base = params(1.5, 1.0, 0.0, 0.9, 1.0, 2.0);
    for (double lambda : {0.01, 0.05, 0.10}) {
        for (double x : {0.1, 0.5, 1.0}) {
            const double m = sigma_budget(BudgetQuery{lambda, x, base});
            ModelParams p = base;
            p.sigma = std::sqrt(m);
            auto b = borell_deviation_bound(x, p.horizon, p);
            CHECK_THAT(b.raw, Catch::Matchers::WithinRel(lambda, 1e-8));
        }
    }
}

TEST_CASE("tail bound is clamped to one and vanishes without noise") {
    auto p = params(1.5, 5.0, 0.0, 0.9, 1.0, 2.0);
    auto b = borell_deviation_bound(0.01, 2.0, p);
    CHECK(b.probability == 1.0);
    CHECK(b.raw > 1.0);
    auto p0 = params(1.5, 0.0, 0.0, 0.9, 1.0, 2.0);
    CHECK(borell_deviation_bound(0.5, 2.0, p0).probability == 0.0);
    CHECK_THROWS_AS(borell_deviation_bound(-1.0, 2.0, p), ValidationError);
}

TEST_CASE("budget reproduces the worked calibration cell") {
    // lambda=0.01, concentration radius 0.2, beta=0.9, H=0.9, upsilon=3.5, T=3
    auto p = params(3.5, 1.0, 0.9, 0.9, 1.0, 3.0);
    const double x = std::pow(0.2, 1.0 - p.beta);
    const double m = sigma_budget(BudgetQuery{0.01, x, p});
    CHECK_THAT(m, Catch::Matchers::WithinAbs(0.2991, 5e-3));
    CHECK_THAT(std::round(m * 100.0) / 100.0, Catch::Matchers::WithinAbs(0.30, 1e-12));
}

TEST_CASE("envelope closed form") {
    TimeGrid grid(1.0, 2);
    SamplePath cdet(grid, {1.0, 0.5, 0.25});
    auto env = concentration_envelope(cdet, 0.2, 9.0);
    const double scale = std::pow(2.0, 9.0);
    const double shift = std::pow(0.2, 10.0);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK_THAT(env.values[i],
                   Catch::Matchers::WithinRel(scale * (cdet.values[i] + shift), 1e-14));
    auto flat = concentration_envelope(cdet, 0.3, 0.0);
    CHECK_THAT(flat.values[0], Catch::Matchers::WithinRel(1.3, 1e-14));
}

TEST_CASE("process covariance matches Monte Carlo at a point") {
    // light empirical check of r_x: Var(X_T - x^det_T) from simulated paths
    auto p = params(3.5, 0.5, 0.9, 0.9, 1.0, 2.0);
    const std::size_t n = 512, m = 4000;
    ConcentrationSimulator sim(p, n, FbmGenerator::exact, /*averaged_weights=*/true);
    const double a = p.drift_rate();
    std::vector<double> dev(m);
    for (std::size_t r = 0; r < m; ++r) {
        auto bundle = sim.run(replicate_seed(Seed{1234}, r));
        dev[r] = bundle.x.values.back() - p.x0() * std::exp(-a * 2.0);
    }
    const double emp = testutil::variance(dev);
    const double truth = r_x(2.0, 2.0, p);
    const double se = truth * std::sqrt(2.0 / m);
    CHECK_THAT(emp, Catch::Matchers::WithinAbs(truth, 3.0 * se + 0.02 * truth));
}
