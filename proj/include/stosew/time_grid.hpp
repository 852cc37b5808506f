#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace stosew {

/// Uniform grid t_i = t0 + i*(t1-t0)/n_steps, i = 0..n_steps.
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double start, double end, std::size_t steps) : t0(start), t1(end), n_steps(steps) {
        if (t0 < 0.0) throw std::invalid_argument("TimeGrid: t0 must be >= 0");
        if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: t1 must exceed t0");
        if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    }

    double dt() const { return (t1 - t0) / double(n_steps); }
    double time(std::size_t i) const { return t0 + double(i) * dt(); }
    std::size_t n_points() const { return n_steps + 1; }

    /// Maps a time to its grid index; throws when t is off the grid.
    std::size_t index_of(double t, double rel_tol = 1e-9) const {
        double x = (t - t0) / dt();
        double r = std::round(x);
        if (r < 0 || r > double(n_steps) || std::abs(x - r) > rel_tol * std::max(1.0, std::abs(x)) + 1e-12)
            throw std::invalid_argument("TimeGrid: time is not a grid point");
        return static_cast<std::size_t>(r);
    }
};

} // namespace stosew
