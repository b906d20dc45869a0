#pragma once
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "fracpk/errors.hpp"

namespace fracpk {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // conservative absolute error estimate
    bool converged = true;
    std::size_t evaluations = 0;
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] via Newton iteration on P_n.
struct GaussRule {
    std::vector<double> nodes, weights;

    explicit GaussRule(int n) : nodes(n), weights(n) {
        const double eps = 1e-15;
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double z1 = z;
                z = z1 - p1 / pp;
                if (std::fabs(z - z1) < eps) break;
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
    }

    static const GaussRule& order(int n) {
        static std::map<int, GaussRule> cache;
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, GaussRule(n)).first;
        return it->second;
    }

    template <class F>
    double apply(F&& f, double a, double b) const {
        const double c = 0.5 * (b - a), mid = 0.5 * (a + b);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + c * nodes[i]);
        return c * s;
    }
};

template <class F>
void adapt_step(F& f, const GaussRule& rule, double a, double b, double coarse, double tol,
                int depth, QuadResult& out) {
    const double m = 0.5 * (a + b);
    const double left = rule.apply(f, a, m);
    const double right = rule.apply(f, m, b);
    out.evaluations += 2 * rule.nodes.size();
    const double fine = left + right;
    const double err = std::fabs(fine - coarse);
    if (err <= tol || depth <= 0) {
        out.value += fine;
        out.error += err;
        if (err > tol) out.converged = false;
        return;
    }
    adapt_step(f, rule, a, m, left, 0.5 * tol, depth - 1, out);
    adapt_step(f, rule, m, b, right, 0.5 * tol, depth - 1, out);
}

} // namespace detail

// Adaptive Gauss-Legendre on [a,b]. Bisects until the coarse/fine panel
// difference meets max(abs_tol, rel_tol*|I|); error estimates accumulate into
// QuadResult::error and converged reports whether every panel met its budget.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-6,
                              double abs_tol = 0.0, int max_depth = 40, int order = 16) {
    QuadResult out;
    if (a == b) return out;
    const auto& rule = detail::GaussRule::order(order);
    const double whole = rule.apply(f, a, b);
    out.evaluations += rule.nodes.size();
    const double tol = std::max(abs_tol, rel_tol * std::fabs(whole));
    detail::adapt_step(f, rule, a, b, whole, tol > 0.0 ? tol : 1e-300, max_depth, out);
    return out;
}

} // namespace fracpk
