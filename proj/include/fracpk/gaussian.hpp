#pragma once
#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fracpk/model.hpp"
#include "fracpk/quadrature.hpp"

namespace fracpk {

struct QuadControl {
    double rel_tol = 1e-6;
    double abs_tol = 0.0;
    int max_depth = 40;
};

namespace detail {

// I(x; p, c) = Int_0^x w^{p-1} e^{cw} dw with p in (0,1).
// Power series sum_k c^k x^{p+k} / (k! (p+k)) while |cx| is moderate,
// otherwise the substitution rho = w^p smooths the endpoint and an adaptive
// rule finishes the job.
inline double power_exp_integral(double x, double p, double c, const QuadControl& ctl = {}) {
    if (x <= 0.0) return 0.0;
    const double cx = c * x;
    if (cx > 690.0)
        throw NumericError("power_exp_integral: exponential overflow; use the damped kernel");
    if (std::fabs(cx) <= 30.0) {
        double term = 1.0; // c^k x^k / k!
        double sum = 1.0 / p;
        for (int k = 1; k < 400; ++k) {
            term *= cx / k;
            const double add = term / (p + k);
            sum += add;
            if (std::fabs(add) <= 1e-17 * std::fabs(sum)) break;
        }
        return std::pow(x, p) * sum;
    }
    const double xp = std::pow(x, p);
    auto f = [&](double rho) { return std::exp(c * std::pow(rho, 1.0 / p)); };
    QuadResult q = integrate_adaptive(f, 0.0, xp, ctl.rel_tol * 0.1, 0.0, ctl.max_depth);
    if (!q.converged)
        throw NumericError("power_exp_integral: inner quadrature did not converge");
    return q.value / p;
}

// e^{-ax} Int_0^x w^{p-1} e^{aw} dw for a >= 0; stays bounded for large ax.
inline double power_exp_integral_damped(double x, double p, double a, const QuadControl& ctl = {}) {
    if (x <= 0.0) return 0.0;
    if (a * x <= 30.0) return std::exp(-a * x) * power_exp_integral(x, p, a, ctl);
    const double xp = std::pow(x, p);
    auto f = [&](double rho) { return std::exp(-a * (x - std::pow(rho, 1.0 / p))); };
    QuadResult q = integrate_adaptive(f, 0.0, xp, ctl.rel_tol * 0.1, 0.0, ctl.max_depth);
    if (!q.converged)
        throw NumericError("power_exp_integral_damped: inner quadrature did not converge");
    return q.value / p;
}

} // namespace detail

struct KernelResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

// R_{H,theta}(s,t) = alpha_H (1-beta)^2 Int_0^s Int_0^t |u-v|^{2H-2} e^{a(u+v)} du dv,
// the covariance of the weighted integral B^H(theta). The singular double
// integral is reduced to one dimension: for s <= t,
//   Int = Int_0^s e^{2au} [ P(u) + Q(t-u) ] du,
//   P(x) = Int_0^x w^{2H-2} e^{-aw} dw,  Q(x) = Int_0^x w^{2H-2} e^{aw} dw.
inline KernelResult r_h_theta_detailed(double s, double t, const ModelParams& p,
                                       const QuadControl& ctl = {}) {
    p.validate();
    if (s < 0.0 || t < 0.0) throw ValidationError("r_h_theta: times must be nonnegative");
    if (s == 0.0 || t == 0.0) return {};
    const double lo = std::min(s, t), hi = std::max(s, t);
    const double a = p.drift_rate();
    if (a * (lo + hi) > 600.0)
        throw NumericError("r_h_theta: e^{a(s+t)} overflows; use r_x for long horizons");
    const HurstParam h = p.hurst_param();
    const double pexp = 2.0 * h.value() - 1.0;
    auto f = [&](double u) {
        return std::exp(2.0 * a * u) * (detail::power_exp_integral(u, pexp, -a, ctl) +
                                        detail::power_exp_integral(hi - u, pexp, a, ctl));
    };
    QuadResult q = integrate_adaptive(f, 0.0, lo, ctl.rel_tol, ctl.abs_tol, ctl.max_depth);
    const double scale = h.alpha() * (1.0 - p.beta) * (1.0 - p.beta);
    return {scale * q.value, scale * q.error, q.converged};
}

inline double r_h_theta(double s, double t, const ModelParams& p, const QuadControl& ctl = {}) {
    KernelResult r = r_h_theta_detailed(s, t, p, ctl);
    if (!r.converged) {
        std::ostringstream os;
        os << "r_h_theta(" << s << "," << t << ") quadrature did not converge; "
           << "achieved error estimate " << r.error;
        throw NumericError(os.str());
    }
    return r.value;
}

// Cov(X_s - x^det_s, X_t - x^det_t) = sigma^2 e^{-a(s+t)} R_{H,theta}(s,t),
// evaluated in damped form so large a*t never overflows.
inline KernelResult r_x_detailed(double s, double t, const ModelParams& p,
                                 const QuadControl& ctl = {}) {
    p.validate();
    if (s < 0.0 || t < 0.0) throw ValidationError("r_x: times must be nonnegative");
    if (s == 0.0 || t == 0.0 || p.sigma == 0.0) return {};
    const double lo = std::min(s, t), hi = std::max(s, t);
    const double a = p.drift_rate();
    const HurstParam h = p.hurst_param();
    const double pexp = 2.0 * h.value() - 1.0;
    auto f = [&](double u) {
        const double damp2 = std::exp(-a * (lo + hi - 2.0 * u));
        const double damp1 = std::exp(-a * (lo - u));
        return damp2 * detail::power_exp_integral(u, pexp, -a, ctl) +
               damp1 * detail::power_exp_integral_damped(hi - u, pexp, a, ctl);
    };
    // every term carries at least e^{-a(lo-u)} damping against bounded
    // integral factors, so the region u < lo - 400/a contributes below
    // e^{-400} relative and can be dropped outright
    const double u_min = a > 0.0 ? std::max(0.0, lo - 400.0 / a) : 0.0;
    QuadResult q = integrate_adaptive(f, u_min, lo, ctl.rel_tol, ctl.abs_tol, ctl.max_depth);
    const double scale =
        p.sigma * p.sigma * h.alpha() * (1.0 - p.beta) * (1.0 - p.beta);
    return {scale * q.value, scale * q.error, q.converged};
}

inline double r_x(double s, double t, const ModelParams& p, const QuadControl& ctl = {}) {
    KernelResult r = r_x_detailed(s, t, p, ctl);
    if (!r.converged) {
        std::ostringstream os;
        os << "r_x(" << s << "," << t << ") quadrature did not converge; "
           << "achieved error estimate " << r.error;
        throw NumericError(os.str());
    }
    return r.value;
}

// Finite-dimensional Gaussian description of (X_{t_1},...,X_{t_n}):
// mean vector vn_i = C0^{1-beta} e^{-a t_i} and covariance rn from r_x.
struct GaussianSpec {
    std::vector<double> times;
    Eigen::MatrixXd rn;
    Eigen::MatrixXd rn_errors; // per-entry quadrature error estimates
    Eigen::VectorXd vn;
    std::vector<std::string> warnings;
};

inline GaussianSpec build_gaussian_spec(const std::vector<double>& times, const ModelParams& p,
                                        const QuadControl& ctl = {}) {
    p.validate();
    if (times.empty()) throw ValidationError("build_gaussian_spec: empty time set");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0))
            throw ValidationError("build_gaussian_spec: times must be positive");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw ValidationError("build_gaussian_spec: times must be strictly increasing");
    }
    const std::size_t n = times.size();
    GaussianSpec spec;
    spec.times = times;
    spec.rn.resize(n, n);
    spec.rn_errors.setZero(n, n);
    spec.vn.resize(n);
    const double a = p.drift_rate();
    const double x0 = p.x0();
    for (std::size_t i = 0; i < n; ++i) {
        spec.vn(i) = x0 * std::exp(-a * times[i]);
        for (std::size_t j = 0; j <= i; ++j) {
            KernelResult r = r_x_detailed(times[i], times[j], p, ctl);
            spec.rn(i, j) = r.value;
            spec.rn(j, i) = r.value;
            spec.rn_errors(i, j) = r.error;
            spec.rn_errors(j, i) = r.error;
            if (!r.converged) {
                std::ostringstream os;
                os << "covariance entry (" << i << "," << j << ") not converged, error estimate "
                   << r.error;
                spec.warnings.push_back(os.str());
            }
        }
    }
    return spec;
}

struct DensityResult {
    double value = 0.0;
    double condition = 0.0; // spectral condition estimate of the covariance
};

// Density of the observed concentrations (|X_{t_1}|^{gamma+1},...,|X_{t_n}|^{gamma+1})
// on the positive orthant. With y_i = x_i^{1-beta},
//   chi_n(x) = (1-beta)^n prod_i x_i^{-beta}
//              * sum over sign vectors eps of phi_{vn,rn}(eps . y),
// i.e. the Gaussian density folded over all 2^n sign choices (a folded normal
// at n=1). Factorizes the covariance once; evaluation enumerates the 2^n
// terms, so n is capped at 20.
class ChiDensity {
public:
    ChiDensity(GaussianSpec spec, double beta) : spec_(std::move(spec)), beta_(beta) {
        if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("ChiDensity: beta must be in [0,1)");
        const std::size_t n = spec_.times.size();
        if (n > 20) throw NumericError("ChiDensity: sign enumeration capped at n=20");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec_.rn);
        const double emax = es.eigenvalues().maxCoeff();
        const double emin = es.eigenvalues().minCoeff();
        condition_ = (emin > 0.0) ? emax / emin : std::numeric_limits<double>::infinity();
        Eigen::LLT<Eigen::MatrixXd> llt(spec_.rn);
        if (llt.info() != Eigen::Success) {
            std::ostringstream os;
            os << "ChiDensity: covariance matrix is singular (condition estimate " << condition_
               << ")";
            throw NumericError(os.str());
        }
        chol_ = llt.matrixL();
        double logdet = 0.0;
        for (std::size_t i = 0; i < n; ++i) logdet += std::log(chol_(i, i));
        lognorm_ = -0.5 * n * std::log(2.0 * M_PI) - logdet;
    }

    double condition() const { return condition_; }
    const GaussianSpec& spec() const { return spec_; }

    DensityResult evaluate(const std::vector<double>& xs) const {
        const std::size_t n = spec_.times.size();
        if (xs.size() != n) throw ValidationError("ChiDensity: point dimension mismatch");
        for (double x : xs)
            if (x <= 0.0) return {0.0, condition_};
        Eigen::VectorXd y(n);
        double logjac = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y(i) = std::pow(xs[i], 1.0 - beta_);
            logjac += std::log(1.0 - beta_) - beta_ * std::log(xs[i]);
        }
        double sum = 0.0;
        const std::size_t combos = std::size_t{1} << n;
        Eigen::VectorXd d(n);
        for (std::size_t mask = 0; mask < combos; ++mask) {
            for (std::size_t i = 0; i < n; ++i)
                d(i) = ((mask >> i) & 1 ? -y(i) : y(i)) - spec_.vn(i);
            Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>().solve(d);
            sum += std::exp(-0.5 * w.squaredNorm());
        }
        return {std::exp(lognorm_ + logjac) * sum, condition_};
    }

private:
    GaussianSpec spec_;
    double beta_;
    Eigen::MatrixXd chol_;
    double lognorm_ = 0.0;
    double condition_ = 0.0;
};

inline DensityResult density_chi_n(const std::vector<double>& xs, const GaussianSpec& spec,
                                   double beta) {
    return ChiDensity(spec, beta).evaluate(xs);
}

// Gaussian tail bound for the horizon deviation:
//   P( sup-type deviation of X from x^det exceeds x ) <= 2 exp(-x^2 / (2 sigma^2 R_{H,theta}(T,T)))
// clamped to 1; the raw (unclamped) value is kept for inversion checks.
struct BorellBound {
    double probability = 0.0;
    double raw = 0.0;
};

inline BorellBound borell_deviation_bound(double x, double horizon, const ModelParams& p,
                                          const QuadControl& ctl = {}) {
    p.validate();
    if (!(x > 0.0)) throw ValidationError("borell_deviation_bound: radius must be positive");
    if (!(horizon > 0.0)) throw ValidationError("borell_deviation_bound: horizon must be positive");
    if (p.sigma == 0.0) return {0.0, 0.0};
    const double r = r_h_theta(horizon, horizon, p, ctl);
    const double raw = 2.0 * std::exp(-x * x / (2.0 * p.sigma * p.sigma * r));
    return {std::min(1.0, raw), raw};
}

// Largest sigma^2 that keeps the tail bound at level lambda for deviation
// radius x (in the transformed scale) over [0, T]:
//   M(lambda, x, H) = x^2 / (2 R_{H,theta}(T,T) log(2/lambda)).
struct BudgetQuery {
    double lambda;  // tolerated exceedance probability, in (0,1)
    double x;       // deviation radius in the transformed scale, > 0
    ModelParams params; // sigma ignored; horizon used as T
};

inline double sigma_budget(const BudgetQuery& q, const QuadControl& ctl = {}) {
    if (!(q.lambda > 0.0 && q.lambda < 1.0))
        throw ValidationError("sigma_budget: lambda must lie in (0,1)");
    if (!(q.x > 0.0)) throw ValidationError("sigma_budget: radius must be positive");
    ModelParams p = q.params;
    p.sigma = 1.0;
    p.validate();
    const double r = r_h_theta(p.horizon, p.horizon, p, ctl);
    return q.x * q.x / (2.0 * r * std::log(2.0 / q.lambda));
}

// Pathwise envelope implied by a transformed-scale deviation radius x:
//   C_t <= 2^gamma ( c^det_t + x^{gamma+1} ).
inline SamplePath concentration_envelope(const SamplePath& c_det, double x, double gamma) {
    if (!(x >= 0.0)) throw ValidationError("concentration_envelope: radius must be nonnegative");
    if (!(gamma >= 0.0)) throw ValidationError("concentration_envelope: gamma must be nonnegative");
    std::vector<double> out(c_det.values.size());
    const double scale = std::pow(2.0, gamma);
    const double shift = std::pow(x, gamma + 1.0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * (c_det.values[i] + shift);
    return SamplePath(c_det.grid, std::move(out));
}

} // namespace fracpk
