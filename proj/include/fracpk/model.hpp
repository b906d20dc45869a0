#pragma once
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "fracpk/fbm.hpp"
#include "fracpk/grid.hpp"

namespace fracpk {

// One-compartment IV-bolus model with state-dependent fractional noise:
//   C_t = |C0^{1-beta} + sigma * B^H_t(theta)|^{gamma+1} * e^{-upsilon t},
// gamma = beta/(1-beta). The transformed process
//   X_t = (C0^{1-beta} + sigma * B^H_t(theta)) * e^{-upsilon(1-beta)t}
// is a fractional Ornstein-Uhlenbeck path with rate a = upsilon(1-beta) and
// theta_t = (1-beta) e^{at}.
struct ModelParams {
    double upsilon;   // elimination rate, > 0
    double sigma;     // noise scale, >= 0
    double beta;      // volatility exponent, in [0,1)
    double hurst;     // Hurst exponent, in (1/2,1)
    double c0;        // initial concentration, > 0
    double horizon;   // simulation horizon T, > 0

    void validate() const {
        if (!(upsilon > 0.0)) throw ValidationError("upsilon must be positive");
        if (!(sigma >= 0.0)) throw ValidationError("sigma must be nonnegative");
        if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("beta must lie in [0,1)");
        HurstParam h(hurst, /*model_range=*/true);
        (void)h;
        if (!(c0 > 0.0)) throw ValidationError("c0 must be positive");
        if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    }

    double gamma() const { return beta / (1.0 - beta); }
    double drift_rate() const { return upsilon * (1.0 - beta); } // a
    double x0() const { return std::pow(c0, 1.0 - beta); }
    HurstParam hurst_param() const { return HurstParam(hurst, true); }
};

// theta_t = (1-beta) e^{upsilon(1-beta) t}
inline double theta_weight(double t, const ModelParams& p) {
    if (t < 0.0) throw ValidationError("theta_weight: t must be nonnegative");
    return (1.0 - p.beta) * std::exp(p.drift_rate() * t);
}

// Left-point Riemann-Stieltjes sums against an arbitrary weight sequence:
//   out[i] = sum_{j<i} w[j] * (bh[j+1] - bh[j])
inline SamplePath weighted_increment_sum(const SamplePath& bh, const std::vector<double>& weights) {
    if (weights.size() < bh.grid.steps())
        throw ValidationError("weighted_increment_sum: not enough weights");
    std::vector<double> out(bh.values.size());
    out[0] = 0.0;
    for (std::size_t i = 0; i < bh.grid.steps(); ++i)
        out[i + 1] = out[i] + weights[i] * (bh.values[i + 1] - bh.values[i]);
    return SamplePath(bh.grid, std::move(out));
}

// B^H_t(theta) approximated by left-point sums of theta against the fBm path.
inline SamplePath weighted_wiener_integral(const SamplePath& bh, const ModelParams& p) {
    p.validate();
    std::vector<double> w(bh.grid.steps());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = theta_weight(bh.grid[j], p);
    return weighted_increment_sum(bh, w);
}

// Same integral with panel-averaged weights
//   wbar_j = (1-beta)(e^{a t_{j+1}} - e^{a t_j}) / (a delta).
// The left-point rule lags the exponentially growing theta by O(a*delta/2)
// relative per step; the averaged rule removes that bias and is the right
// choice for long horizons.
inline SamplePath weighted_wiener_integral_averaged(const SamplePath& bh, const ModelParams& p) {
    p.validate();
    const double a = p.drift_rate();
    const double delta = bh.grid.delta();
    std::vector<double> w(bh.grid.steps());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double t = bh.grid[j];
        w[j] = (1.0 - p.beta) * std::exp(a * t) * std::expm1(a * delta) / (a * delta);
    }
    return weighted_increment_sum(bh, w);
}

enum class FbmGenerator { volterra, exact };

inline std::string to_string(FbmGenerator g) {
    return g == FbmGenerator::volterra ? "volterra" : "exact";
}

struct ProcessBundle {
    TimeGrid grid;
    SamplePath bh;        // driving fBm
    SamplePath bh_theta;  // B^H(theta)
    SamplePath x;         // fOU path
    SamplePath c;         // concentration
    std::optional<std::size_t> tau0_index; // first index with nonpositive core, if any
    ModelParams params;
    Seed seed;
    FbmGenerator generator;
};

// First grid index at which C0^{1-beta} + sigma*B^H(theta) drops to <= 0,
// together with the grid time; nullopt if the core stays positive.
inline std::optional<std::pair<std::size_t, double>> detect_tau0(const SamplePath& bh_theta,
                                                                 const ModelParams& p) {
    const double x0 = p.x0();
    for (std::size_t i = 0; i < bh_theta.values.size(); ++i)
        if (x0 + p.sigma * bh_theta.values[i] <= 0.0)
            return std::make_pair(i, bh_theta.grid[i]);
    return std::nullopt;
}

inline std::optional<std::pair<std::size_t, double>> detect_tau0(const ProcessBundle& b) {
    return detect_tau0(b.bh_theta, b.params);
}

// Deterministic (sigma = 0) solution: returns (x^det, c^det) with
// c^det_t = C0 e^{-upsilon t}.
inline std::pair<SamplePath, SamplePath> deterministic_solution(const ModelParams& p,
                                                                const TimeGrid& grid) {
    p.validate();
    std::vector<double> x(grid.size()), c(grid.size());
    const double a = p.drift_rate();
    const double x0 = p.x0();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        x[i] = x0 * std::exp(-a * grid[i]);
        c[i] = p.c0 * std::exp(-p.upsilon * grid[i]);
    }
    return {SamplePath(grid, std::move(x)), SamplePath(grid, std::move(c))};
}

// Drives the pathwise solution from a prebuilt fBm generator so the Cholesky
// factor (or Volterra weights) are shared across replicates.
class ConcentrationSimulator {
public:
    ConcentrationSimulator(ModelParams params, std::size_t steps,
                           FbmGenerator generator = FbmGenerator::exact,
                           bool averaged_weights = false)
        : params_(params), generator_(generator), averaged_(averaged_weights),
          grid_(params.horizon, steps) {
        params_.validate();
        const HurstParam h = params_.hurst_param();
        if (generator == FbmGenerator::volterra)
            engine_.emplace<VolterraFbmGenerator>(h, grid_);
        else
            engine_.emplace<ExactFbmSampler>(h, grid_);
    }

    const TimeGrid& grid() const { return grid_; }

    ProcessBundle run(Seed seed) const {
        SamplePath bh = std::visit(
            [&](const auto& g) -> SamplePath {
                if constexpr (std::is_same_v<std::decay_t<decltype(g)>, std::monostate>)
                    throw NumericError("ConcentrationSimulator: engine not initialized");
                else
                    return g.sample(seed);
            },
            engine_);
        SamplePath bh_theta = averaged_ ? weighted_wiener_integral_averaged(bh, params_)
                                        : weighted_wiener_integral(bh, params_);
        const double a = params_.drift_rate();
        const double x0 = params_.x0();
        const double gp1 = params_.gamma() + 1.0;
        std::vector<double> x(grid_.size()), c(grid_.size());
        std::optional<std::size_t> tau0;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const double core = x0 + params_.sigma * bh_theta.values[i];
            if (!tau0 && core <= 0.0) tau0 = i;
            x[i] = core * std::exp(-a * grid_[i]);
            c[i] = std::pow(std::fabs(x[i]), gp1);
        }
        return ProcessBundle{grid_,
                             std::move(bh),
                             std::move(bh_theta),
                             SamplePath(grid_, std::move(x)),
                             SamplePath(grid_, std::move(c)),
                             tau0,
                             params_,
                             seed,
                             generator_};
    }

private:
    ModelParams params_;
    FbmGenerator generator_;
    bool averaged_;
    TimeGrid grid_;
    std::variant<std::monostate, VolterraFbmGenerator, ExactFbmSampler> engine_;
};

inline ProcessBundle simulate_concentration(const ModelParams& p, std::size_t steps, Seed seed,
                                            FbmGenerator generator = FbmGenerator::exact) {
    return ConcentrationSimulator(p, steps, generator).run(seed);
}

} // namespace fracpk
