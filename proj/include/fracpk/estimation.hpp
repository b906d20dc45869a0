#pragma once
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fracpk/grid.hpp"
#include "fracpk/model.hpp"

namespace fracpk {

struct EstimationResult {
    double estimate = 0.0;
    std::vector<std::string> warnings;
    std::map<std::string, double> stats; // intermediate quantities for reporting
};

// Observed concentrations on a uniform grid.
struct ObservationSet {
    std::vector<double> times;
    std::vector<double> concentrations;
    double beta = 0.0;

    void validate() const {
        if (times.size() != concentrations.size())
            throw ValidationError("ObservationSet: time/value size mismatch");
        if (times.size() < 2) throw ValidationError("ObservationSet: need at least two points");
        if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("ObservationSet: beta must be in [0,1)");
        const double delta = times[1] - times[0];
        if (!(delta > 0.0)) throw ValidationError("ObservationSet: times must be strictly increasing");
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double d = times[i] - times[i - 1];
            if (!(d > 0.0))
                throw ValidationError("ObservationSet: times must be strictly increasing");
            if (std::fabs(d - delta) > 1e-6 * delta)
                throw ValidationError("ObservationSet: sampling grid is not uniform");
        }
        for (std::size_t i = 0; i < concentrations.size(); ++i)
            if (!(concentrations[i] > 0.0))
                throw ValidationError(
                    "ObservationSet: nonpositive concentration at index " + std::to_string(i) +
                    " (the model excludes data at or beyond the first zero crossing)");
    }

    double delta() const { return times[1] - times[0]; }
};

// x_i = c_i^{1-beta}: maps observed concentrations to the fOU scale.
inline std::vector<double> to_fou_observations(const ObservationSet& obs) {
    obs.validate();
    std::vector<double> x(obs.concentrations.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::pow(obs.concentrations[i], 1.0 - obs.beta);
    return x;
}

// Stationary moment of the fOU limit: E Y^n = 0 for odd n and
//   n! sigma^n (1-beta)^{n-nH} upsilon^{-nH} H^{n/2} Gamma(2H)^{n/2} / (2^{n/2} (n/2)!)
// for even n.
inline double ergodic_moment(int order, const ModelParams& p) {
    p.validate();
    if (order < 1) throw ValidationError("ergodic_moment: order must be >= 1");
    if (order % 2 == 1) return 0.0;
    const int n = order;
    const double H = p.hurst;
    const double logfac = std::lgamma(n + 1.0) - std::lgamma(n / 2 + 1.0);
    const double lg = std::exp(logfac) / std::pow(2.0, n / 2.0);
    return lg * std::pow(p.sigma, n) * std::pow(1.0 - p.beta, n - n * H) *
           std::pow(p.upsilon, -n * H) * std::pow(H * std::tgamma(2.0 * H), n / 2.0);
}

// Second-difference quadratic variations at lags 1 and 2:
//   S_lag = sum_k (x_{k+lag} - 2 x_k + x_{k-lag})^2.
namespace detail {
inline double second_difference_qv(const std::vector<double>& x, std::size_t lag) {
    double s = 0.0;
    for (std::size_t k = lag; k + lag < x.size(); ++k) {
        const double d = x[k + lag] - 2.0 * x[k] + x[k - lag];
        s += d * d;
    }
    return s;
}
} // namespace detail

// Hhat = (1/2) log2( S_2 / S_1 ). Scale- and drift-line-invariant; affine
// sequences make both sums vanish and raise EstimationError.
inline EstimationResult hurst_hat(const std::vector<double>& x) {
    if (x.size() < 5) throw ValidationError("hurst_hat: need at least 5 observations");
    const double s1 = detail::second_difference_qv(x, 1);
    const double s2 = detail::second_difference_qv(x, 2);
    if (s1 == 0.0 || s2 == 0.0)
        throw EstimationError("hurst_hat: degenerate input, quadratic variation vanishes");
    EstimationResult r;
    r.estimate = 0.5 * std::log2(s2 / s1);
    r.stats["qv_lag1"] = s1;
    r.stats["qv_lag2"] = s2;
    if (!(r.estimate > 0.5 && r.estimate < 1.0))
        r.warnings.push_back("Hurst estimate outside the model range (1/2,1)");
    return r;
}

// D(H) = sum_{k,l} a_k a_l |k-l|^{2H} / 2 for the filter (1,-2,1): equals
// -1/2 + 2^{2H-3}, negative on H in (0,1).
inline double filter_denominator_constant(double h) {
    return -0.5 + std::pow(2.0, 2.0 * h - 3.0);
}

// sigma_hat from the lag-1 quadratic variation:
//   sigma_hat = (1/(1-beta)) sqrt( (-1/8) mean(S_1) / (D(Hhat) delta^{2 Hhat}) ).
inline EstimationResult sigma_hat(const std::vector<double>& x, double h_est, double delta,
                                  double beta) {
    if (x.size() < 3) throw ValidationError("sigma_hat: need at least 3 observations");
    if (!(delta > 0.0)) throw ValidationError("sigma_hat: delta must be positive");
    if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("sigma_hat: beta must be in [0,1)");
    if (!(h_est > 0.0 && h_est < 1.0))
        throw EstimationError("sigma_hat: Hurst estimate outside (0,1), variance scale undefined");
    const double s1 = detail::second_difference_qv(x, 1);
    const double count = static_cast<double>(x.size() - 2);
    const double d = filter_denominator_constant(h_est);
    const double ratio = (-0.125) * (s1 / count) / (d * std::pow(delta, 2.0 * h_est));
    if (ratio < 0.0)
        throw EstimationError("sigma_hat: negative variance estimate");
    EstimationResult r;
    r.estimate = std::sqrt(ratio) / (1.0 - beta);
    r.stats["qv_lag1"] = s1;
    r.stats["denominator_constant"] = d;
    if (!(h_est > 0.5 && h_est < 1.0))
        r.warnings.push_back("Hurst estimate outside the model range (1/2,1)");
    return r;
}

namespace detail {
// upsilon from a mean-square level m via the stationary second moment:
//   upsilon_hat = (1/(1-beta)) [ m / (sigma^2 (1-beta)^2 H Gamma(2H)) ]^{-1/(2H)}
inline double invert_mean_square(double m, double h, double sigma, double beta) {
    if (!(m > 0.0)) throw EstimationError("upsilon estimate: mean-square level is zero");
    if (!(sigma > 0.0)) throw EstimationError("upsilon estimate: sigma must be positive");
    const double denom = sigma * sigma * (1.0 - beta) * (1.0 - beta) * h * std::tgamma(2.0 * h);
    return std::pow(m / denom, -1.0 / (2.0 * h)) / (1.0 - beta);
}
} // namespace detail

// Continuous-observation variant: trapezoid of X^2 over [0,T], then moment
// inversion with known (H, sigma).
inline EstimationResult upsilon_hat_known(const SamplePath& x, double h, double sigma,
                                          double beta) {
    if (!(h > 0.5 && h < 1.0)) throw ValidationError("upsilon_hat_known: H must lie in (1/2,1)");
    if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("upsilon_hat_known: beta must be in [0,1)");
    const double delta = x.grid.delta();
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < x.values.size(); ++i)
        integral += 0.5 * (x.values[i] * x.values[i] + x.values[i + 1] * x.values[i + 1]) * delta;
    const double msq = integral / x.grid.horizon();
    EstimationResult r;
    r.estimate = detail::invert_mean_square(msq, h, sigma, beta);
    r.stats["mean_square"] = msq;
    return r;
}

// Fully plug-in variant: Hhat, then sigma_hat, then moment inversion with the
// discrete mean square (1/n) sum_{k<n} x_k^2. Warnings from the plug-in stages
// propagate; degenerate stages raise EstimationError.
inline EstimationResult upsilon_hat_unknown(const std::vector<double>& x, double delta,
                                            double beta) {
    EstimationResult h = hurst_hat(x);
    EstimationResult s = sigma_hat(x, h.estimate, delta, beta);
    const std::size_t n = x.size() - 1;
    double msq = 0.0;
    for (std::size_t k = 0; k < n; ++k) msq += x[k] * x[k];
    msq /= static_cast<double>(n);
    EstimationResult r;
    r.estimate = detail::invert_mean_square(msq, h.estimate, s.estimate, beta);
    r.warnings = h.warnings;
    r.warnings.insert(r.warnings.end(), s.warnings.begin(), s.warnings.end());
    r.stats = h.stats;
    r.stats["hurst"] = h.estimate;
    r.stats["sigma"] = s.estimate;
    r.stats["mean_square"] = msq;
    return r;
}

// Log-linear regression fallback: the noiseless curve satisfies
// log c_t = log C0 - upsilon t, so upsilon_hat = -slope of log c on t.
// Robust but biased by the noise level.
inline EstimationResult regression_upsilon(const ObservationSet& obs) {
    obs.validate();
    const std::size_t n = obs.times.size();
    double mt = 0.0, ml = 0.0;
    std::vector<double> logc(n);
    for (std::size_t i = 0; i < n; ++i) {
        logc[i] = std::log(obs.concentrations[i]);
        mt += obs.times[i];
        ml += logc[i];
    }
    mt /= n;
    ml /= n;
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (obs.times[i] - mt) * (logc[i] - ml);
        var += (obs.times[i] - mt) * (obs.times[i] - mt);
    }
    if (var == 0.0) throw EstimationError("regression_upsilon: degenerate time grid");
    EstimationResult r;
    r.estimate = -cov / var;
    r.stats["intercept"] = ml - (cov / var) * mt;
    return r;
}

} // namespace fracpk
