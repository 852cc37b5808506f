#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "stosew/parallel.hpp"
#include "stosew/partition.hpp"
#include "stosew/stats.hpp"
#include "stosew/time_grid.hpp"

namespace stosew {

/// Two-parameter increment process A_{s,t} evaluated per path on grid
/// indices. eval may only read path data with index <= j, which makes
/// adaptedness hold by construction. cond_eval, when present, is the exact
/// rule (k,i,j) -> E^{F_{t_k}} A_{t_i,t_j} for k <= i <= j.
struct Germ {
    std::size_t dim = 1;
    TimeGrid grid;
    std::function<void(std::size_t path, std::size_t i, std::size_t j, std::span<double> out)> eval;
    std::function<void(std::size_t path, std::size_t k, std::size_t i, std::size_t j,
                       std::span<double> out)>
        cond_eval;

    bool has_cond() const { return static_cast<bool>(cond_eval); }
};

/// delta A_{s,u,t} = A_{s,t} - A_{s,u} - A_{u,t}.
inline std::vector<double> delta(const Germ& germ, std::size_t path, double s, double u, double t) {
    if (!(s <= u && u <= t)) throw std::invalid_argument("delta: need s <= u <= t");
    std::size_t is = germ.grid.index_of(s), iu = germ.grid.index_of(u), it = germ.grid.index_of(t);
    std::vector<double> out(germ.dim), tmp(germ.dim);
    germ.eval(path, is, it, out);
    germ.eval(path, is, iu, tmp);
    for (std::size_t k = 0; k < germ.dim; ++k) out[k] -= tmp[k];
    germ.eval(path, iu, it, tmp);
    for (std::size_t k = 0; k < germ.dim; ++k) out[k] -= tmp[k];
    return out;
}

inline void delta_idx(const Germ& germ, std::size_t path, std::size_t is, std::size_t iu,
                      std::size_t it, std::span<double> out, std::span<double> tmp) {
    germ.eval(path, is, it, out);
    germ.eval(path, is, iu, tmp);
    for (std::size_t k = 0; k < germ.dim; ++k) out[k] -= tmp[k];
    germ.eval(path, iu, it, tmp);
    for (std::size_t k = 0; k < germ.dim; ++k) out[k] -= tmp[k];
}

/// E^{F_s} delta A_{s,u,t} from the exact conditional rule.
inline void cond_delta_idx(const Germ& germ, std::size_t path, std::size_t is, std::size_t iu,
                           std::size_t it, std::span<double> out, std::span<double> tmp) {
    germ.cond_eval(path, is, is, it, out);
    germ.cond_eval(path, is, is, iu, tmp);
    for (std::size_t k = 0; k < germ.dim; ++k) out[k] -= tmp[k];
    germ.cond_eval(path, is, iu, it, tmp);
    for (std::size_t k = 0; k < germ.dim; ++k) out[k] -= tmp[k];
}

/// Riemann sum over a partition whose points lie on the germ's grid.
inline std::vector<double> riemann_sum(const Germ& germ, const Partition& partition,
                                       std::size_t path) {
    auto idx = partition.to_indices(germ.grid);
    std::vector<double> acc(germ.dim, 0.0), tmp(germ.dim);
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        germ.eval(path, idx[i], idx[i + 1], tmp);
        for (std::size_t k = 0; k < germ.dim; ++k) acc[k] += tmp[k];
    }
    return acc;
}

/// Riemann sum over the level-n dyadic partition of [s,t].
inline std::vector<double> dyadic_refine(const Germ& germ, double s, double t, unsigned level,
                                         std::size_t path) {
    std::size_t is = germ.grid.index_of(s), it = germ.grid.index_of(t);
    std::size_t cells = std::size_t(1) << level;
    if ((it - is) % cells != 0)
        throw std::invalid_argument("dyadic_refine: grid resolution of [s,t] exceeded");
    std::size_t stride = (it - is) / cells;
    std::vector<double> acc(germ.dim, 0.0), tmp(germ.dim);
    for (std::size_t c = 0; c < cells; ++c) {
        germ.eval(path, is + c * stride, is + (c + 1) * stride, tmp);
        for (std::size_t k = 0; k < germ.dim; ++k) acc[k] += tmp[k];
    }
    return acc;
}

/// Per-path values of A^pi, M^pi, J^pi for one partition.
struct DoobSums {
    Samples a; // full Riemann sum
    Samples m; // martingale part: sum of (A - E^{F} A)
    Samples j; // predictable part: sum of E^{F} A
};

/// Doob decomposition of the Riemann sum; needs the exact conditional rule.
inline DoobSums doob_split(const Germ& germ, const Partition& partition, std::size_t n_paths) {
    if (!germ.has_cond()) throw std::invalid_argument("doob_split: germ has no cond_eval");
    auto idx = partition.to_indices(germ.grid);
    DoobSums out{Samples(n_paths, germ.dim), Samples(n_paths, germ.dim), Samples(n_paths, germ.dim)};
    parallel_for(n_paths, [&](std::size_t p) {
        std::vector<double> tmp(germ.dim), cnd(germ.dim);
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            germ.eval(p, idx[i], idx[i + 1], tmp);
            germ.cond_eval(p, idx[i], idx[i], idx[i + 1], cnd);
            for (std::size_t k = 0; k < germ.dim; ++k) {
                out.a.data[p * germ.dim + k] += tmp[k];
                out.j.data[p * germ.dim + k] += cnd[k];
                out.m.data[p * germ.dim + k] += tmp[k] - cnd[k];
            }
        }
    });
    return out;
}

} // namespace stosew
