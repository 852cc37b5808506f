#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stosew/quadrature.hpp"
#include "stosew/rate.hpp"
#include "stosew/time_grid.hpp"

namespace stosew {

/// One path sampled on a uniform grid with a declared Holder exponent.
struct HolderPath {
    TimeGrid grid;
    std::vector<double> values; // one per grid point
    double declared_tau = 1.0;

    HolderPath() = default;
    HolderPath(TimeGrid g, std::vector<double> v, double tau)
        : grid(g), values(std::move(v)), declared_tau(tau) {
        if (values.size() != grid.n_points())
            throw std::invalid_argument("HolderPath: size mismatch");
    }

    /// Empirical Holder seminorm over dyadic gap classes (O(n log n)).
    double empirical_seminorm() const {
        double best = 0.0;
        std::size_t n = grid.n_steps;
        for (std::size_t gap = 1; gap <= n; gap *= 2) {
            double dt = double(gap) * grid.dt();
            double denom = std::pow(dt, declared_tau);
            for (std::size_t i = 0; i + gap <= n; ++i)
                best = std::max(best, std::abs(values[i + gap] - values[i]) / denom);
        }
        return best;
    }

    /// Empirical exponent: log-log fit of max-increment against the gap.
    double empirical_exponent() const {
        std::vector<double> scales, incs;
        std::size_t n = grid.n_steps;
        for (std::size_t gap = 1; gap <= n / 4; gap *= 2) {
            double worst = 0.0;
            for (std::size_t i = 0; i + gap <= n; ++i)
                worst = std::max(worst, std::abs(values[i + gap] - values[i]));
            if (worst > 0.0) {
                scales.push_back(double(gap) * grid.dt());
                incs.push_back(worst);
            }
        }
        if (scales.size() < 2) return declared_tau;
        return fit_loglog(scales, incs).slope;
    }

    /// True when the empirical exponent strays more than 0.1 from the
    /// declared one.
    bool exponent_warning() const { return std::abs(empirical_exponent() - declared_tau) > 0.1; }
};

struct YoungValue {
    double value = 0.0;
    double error_estimate = 0.0; // last dyadic refinement difference
};

/// Young integral int_s^t y dv as the limit of left-point Riemann-Stieltjes
/// sums over dyadic refinements; requires declared exponents summing > 1.
inline YoungValue young_integral(const HolderPath& y, const HolderPath& v, double s, double t) {
    if (y.declared_tau + v.declared_tau <= 1.0)
        throw std::invalid_argument("young_integral: exponent sum must exceed 1");
    if (y.grid.n_steps != v.grid.n_steps)
        throw std::invalid_argument("young_integral: grids must match");
    std::size_t is = y.grid.index_of(s), it = y.grid.index_of(t);
    std::size_t span = it - is;
    if (span == 0) return {0.0, 0.0};

    auto level_sum = [&](std::size_t stride) {
        double acc = 0.0;
        for (std::size_t i = is; i + stride <= it; i += stride)
            acc += y.values[i] * (v.values[i + stride] - v.values[i]);
        return acc;
    };

    // coarsest stride = largest power of two dividing the span
    std::size_t stride = 1;
    while (stride * 2 <= span && span % (stride * 2) == 0) stride *= 2;
    double prev = level_sum(stride), last = prev;
    while (stride > 1) {
        stride /= 2;
        prev = last;
        last = level_sum(stride);
    }
    return {last, std::abs(last - prev)};
}

/// Left-point Young scheme for the linear flow equation
///   dY^{ij} = sum_k Y^{ik} dV^{kj},  Y_0 = I_d,
/// on the grid of V. V is a d*d array of paths, row-major (k,j).
inline std::vector<double> solve_linear_young(const std::vector<HolderPath>& V, std::size_t d) {
    if (V.size() != d * d) throw std::invalid_argument("solve_linear_young: V must be d*d paths");
    for (const auto& path : V)
        if (path.declared_tau <= 0.5)
            throw std::invalid_argument("solve_linear_young: need Holder exponent > 1/2");
    std::size_t np = V[0].grid.n_points();
    std::vector<double> y(np * d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) y[k * d + k] = 1.0;
    std::vector<double> cur(d * d), inc(d * d);
    for (std::size_t k = 0; k < d * d; ++k) cur[k] = y[k];
    for (std::size_t i = 0; i + 1 < np; ++i) {
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) {
                double acc = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    double dv = V[k * d + b].values[i + 1] - V[k * d + b].values[i];
                    acc += cur[a * d + k] * dv;
                }
                inc[a * d + b] = acc;
            }
        double norm = 0.0;
        for (std::size_t k = 0; k < d * d; ++k) {
            cur[k] += inc[k];
            norm = std::max(norm, std::abs(cur[k]));
        }
        if (norm > 1e12) throw std::runtime_error("solve_linear_young: blow-up detected");
        for (std::size_t k = 0; k < d * d; ++k) y[(i + 1) * d * d + k] = cur[k];
    }
    return y;
}

} // namespace stosew
