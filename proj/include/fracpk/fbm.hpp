#pragma once
#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fracpk/grid.hpp"
#include "fracpk/random.hpp"

namespace fracpk {

// Hurst exponent. The sampler accepts the full range (0,1]; the concentration
// model requires the long-memory range (1/2,1), which callers opt into.
class HurstParam {
public:
    explicit HurstParam(double h, bool model_range = false) : value_(h) {
        if (!(h > 0.0 && h <= 1.0))
            throw ValidationError("Hurst exponent must lie in (0,1]");
        if (model_range && !(h > 0.5 && h < 1.0))
            throw ValidationError("model requires Hurst exponent in (1/2,1)");
    }
    double value() const { return value_; }
    // alpha_H = H(2H-1), the kernel constant of the fBm covariance density
    double alpha() const { return value_ * (2.0 * value_ - 1.0); }

private:
    double value_;
};

// Cov(B_s, B_t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2
inline double fbm_covariance(double s, double t, HurstParam H) {
    if (s < 0.0 || t < 0.0) throw ValidationError("fbm_covariance: times must be nonnegative");
    const double h2 = 2.0 * H.value();
    return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::fabs(t - s), h2));
}

// Volterra (Riemann-Liouville type) generator: a causal moving average of the
// white-noise increments with kernel weights
//   w_k = k^{H+1/2} - (k-1)^{H+1/2},
// scaled so that Var B_t ~ t^{2H} (the raw kernel gives t^{2H}/(2H); the
// sqrt(2H) factor is 1 at H=1/2, where the scheme reduces to a Brownian path).
// Weights are precomputed once per (H, grid); sampling costs O(n^2).
class VolterraFbmGenerator {
public:
    VolterraFbmGenerator(HurstParam H, TimeGrid grid) : hurst_(H), grid_(grid), weights_(grid.steps() + 1) {
        const double hp = H.value() + 0.5;
        const double delta = grid.delta();
        // prefactor: sqrt(2H) * delta^{H-1/2} / (H+1/2), folded into the weights,
        // plus the sqrt(delta) of the Brownian increments
        const double pref = std::sqrt(2.0 * H.value()) * std::pow(delta, H.value() - 0.5) / hp *
                            std::sqrt(delta);
        weights_[0] = 0.0;
        for (std::size_t k = 1; k < weights_.size(); ++k) {
            const double dk = static_cast<double>(k);
            weights_[k] = pref * (std::pow(dk, hp) - std::pow(dk - 1.0, hp));
        }
    }

    const TimeGrid& grid() const { return grid_; }
    HurstParam hurst() const { return hurst_; }

    SamplePath sample(Seed seed) const {
        const std::size_t n = grid_.steps();
        std::vector<double> xi(n);
        for (std::size_t j = 0; j < n; ++j) xi[j] = gaussian_at(seed, j);
        std::vector<double> b(n + 1, 0.0);
        // B[j+k] += xi[j] * w[k]; both arrays walked contiguously
        for (std::size_t j = 0; j < n; ++j) {
            const double z = xi[j];
            double* out = b.data() + j + 1;
            const double* w = weights_.data() + 1;
            const std::size_t len = n - j;
            for (std::size_t k = 0; k < len; ++k) out[k] += z * w[k];
        }
        return SamplePath(grid_, std::move(b));
    }

private:
    HurstParam hurst_;
    TimeGrid grid_;
    std::vector<double> weights_;
};

// Exact generator: Cholesky factor of the grid covariance matrix, reused
// across seeds. A tiny diagonal jitter (1e-12 * max diagonal, escalated up to
// three times by x10) absorbs rounding-level indefiniteness; anything worse
// raises NumericError.
class ExactFbmSampler {
public:
    ExactFbmSampler(HurstParam H, TimeGrid grid) : hurst_(H), grid_(grid) {
        const std::size_t n = grid.steps();
        Eigen::MatrixXd R(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = fbm_covariance(grid[i + 1], grid[j + 1], H);
                R(i, j) = v;
                R(j, i) = v;
            }
        factorize(R);
    }

    const TimeGrid& grid() const { return grid_; }
    HurstParam hurst() const { return hurst_; }
    int jitter_escalations() const { return jitter_escalations_; }
    const Eigen::MatrixXd& cholesky_factor() const { return chol_; }

    SamplePath sample(Seed seed) const {
        const std::size_t n = grid_.steps();
        Eigen::VectorXd z(n);
        for (std::size_t j = 0; j < n; ++j) z(j) = gaussian_at(seed, j);
        Eigen::VectorXd path = chol_.triangularView<Eigen::Lower>() * z;
        std::vector<double> b(n + 1);
        b[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) b[i + 1] = path(i);
        return SamplePath(grid_, std::move(b));
    }

private:
    void factorize(const Eigen::MatrixXd& R) {
        double jitter = 1e-12 * R.diagonal().maxCoeff();
        for (int attempt = 0; attempt <= 3; ++attempt) {
            Eigen::MatrixXd A = R;
            if (attempt > 0) {
                A.diagonal().array() += jitter;
                jitter *= 10.0;
                ++jitter_escalations_;
            }
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            if (llt.info() == Eigen::Success) {
                chol_ = llt.matrixL();
                return;
            }
        }
        throw NumericError("ExactFbmSampler: covariance matrix is not positive definite "
                           "after jitter escalation (n=" + std::to_string(R.rows()) + ")");
    }

    HurstParam hurst_;
    TimeGrid grid_;
    Eigen::MatrixXd chol_;
    int jitter_escalations_ = 0;
};

} // namespace fracpk
