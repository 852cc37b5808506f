#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "stosew/germ.hpp"

namespace stosew {

/// One residual R = A_{s1,s2} + A_{s2,s3} + A_{s3,s4} - A_{s1,s4} with
/// s1 <= s2 <= s3 <= s4 inside one dyadic cell.
struct AllocationQuad {
    double s1, s2, s3, s4;
};

/// Rearranges a partition's Riemann-sum defect into dyadic-level residuals:
/// sum_i A_{t_i,t_{i+1}} - A_{t_0,t_N} = sum_n sum_i R^n_i for every germ.
/// Points are assigned to dyadic cells of [t_0, t_N] by their binary digits,
/// which keeps the cell splitting exactly nested across levels.
inline std::vector<std::vector<AllocationQuad>> dyadic_allocate(const std::vector<double>& pts) {
    if (pts.size() < 2) return {};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (!(pts[i] < pts[i + 1]))
            throw std::invalid_argument("dyadic_allocate: points must be strictly increasing");
    double s = pts.front(), t = pts.back();
    double span = t - s;
    std::size_t n = pts.size();
    std::vector<double> frac(n);
    for (std::size_t i = 0; i < n; ++i) frac[i] = (pts[i] - s) / span;

    auto cell_of = [&](double x, unsigned level) -> std::size_t {
        double scaled = std::ldexp(x, int(level)); // x * 2^level, exact scaling
        auto c = static_cast<std::size_t>(scaled);
        std::size_t last = (std::size_t(1) << level) - 1;
        return c > last ? last : c;
    };

    std::vector<std::vector<AllocationQuad>> levels;
    bool resolved = false;
    for (unsigned level = 0; level < 64 && !resolved; ++level) {
        // group consecutive points by their level-(n+1) child cell
        std::vector<AllocationQuad> quads;
        bool any_pair_together = false;
        std::size_t i = 0;
        while (i < n) {
            std::size_t parent = cell_of(frac[i], level);
            std::size_t j = i;
            while (j + 1 < n && cell_of(frac[j + 1], level) == parent) ++j;
            if (j > i) any_pair_together = true;
            // split the parent group into its two children
            std::size_t left_cell = 2 * parent;
            std::size_t k = i;
            while (k <= j && cell_of(frac[k], level + 1) == left_cell) ++k;
            if (k > i && k <= j && !(k - 1 == i && k == j)) {
                // both children nonempty (two singletons give R = 0):
                // the quadruple is (min,max) of each child
                quads.push_back({pts[i], pts[k - 1], pts[k], pts[j]});
            }
            i = j + 1;
        }
        levels.push_back(std::move(quads));
        if (!any_pair_together) resolved = true; // every cell holds <= 1 point from here on
    }
    if (!resolved) throw std::runtime_error("dyadic_allocate: points too close to separate");
    while (!levels.empty() && levels.back().empty()) levels.pop_back();
    return levels;
}

/// Evaluates sum_n sum_i R^n_i for one germ and path.
inline std::vector<double> allocation_sum(const Germ& germ, std::size_t path,
                                          const std::vector<std::vector<AllocationQuad>>& levels) {
    std::vector<double> acc(germ.dim, 0.0), tmp(germ.dim);
    auto add = [&](double a, double b, double sign) {
        if (a == b) return; // A_{x,x} = 0
        germ.eval(path, germ.grid.index_of(a), germ.grid.index_of(b), tmp);
        for (std::size_t k = 0; k < germ.dim; ++k) acc[k] += sign * tmp[k];
    };
    for (const auto& lvl : levels)
        for (const auto& q : lvl) {
            add(q.s1, q.s2, 1.0);
            add(q.s2, q.s3, 1.0);
            add(q.s3, q.s4, 1.0);
            add(q.s1, q.s4, -1.0);
        }
    return acc;
}

} // namespace stosew
