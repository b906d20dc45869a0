#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

#include "fracpk/errors.hpp"

namespace fracpk {

// Uniform grid t_i = i*T/n, i = 0..n.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
        if (!(horizon > 0.0)) throw ValidationError("TimeGrid: horizon must be positive");
        if (steps == 0) throw ValidationError("TimeGrid: need at least one step");
    }

    // Accepts an explicit time vector, which must be 0 = t_0 < ... < t_n and
    // uniform within rel_tol.
    static TimeGrid from_times(const std::vector<double>& times, double rel_tol = 1e-6) {
        if (times.size() < 2) throw ValidationError("TimeGrid: need at least two time points");
        if (times.front() != 0.0) throw ValidationError("TimeGrid: grid must start at t=0");
        const double delta = times[1] - times[0];
        if (!(delta > 0.0)) throw ValidationError("TimeGrid: times must be strictly increasing");
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double d = times[i] - times[i - 1];
            if (!(d > 0.0)) throw ValidationError("TimeGrid: times must be strictly increasing");
            if (std::fabs(d - delta) > rel_tol * delta)
                throw ValidationError("TimeGrid: grid spacing is not uniform");
        }
        return TimeGrid(times.back(), times.size() - 1);
    }

    double horizon() const { return horizon_; }
    std::size_t steps() const { return steps_; }
    std::size_t size() const { return steps_ + 1; } // number of points incl. t=0
    double delta() const { return horizon_ / static_cast<double>(steps_); }
    double operator[](std::size_t i) const { return static_cast<double>(i) * horizon_ / static_cast<double>(steps_); }

    std::vector<double> times() const {
        std::vector<double> t(size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = (*this)[i];
        return t;
    }

    bool operator==(const TimeGrid& o) const { return horizon_ == o.horizon_ && steps_ == o.steps_; }

private:
    double horizon_;
    std::size_t steps_;
};

struct SamplePath {
    TimeGrid grid;
    std::vector<double> values; // values[i] at grid[i], size grid.size()

    SamplePath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size())
            throw ValidationError("SamplePath: value count does not match grid");
    }
};

} // namespace fracpk
