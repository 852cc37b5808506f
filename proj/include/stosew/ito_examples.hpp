#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "stosew/germ.hpp"
#include "stosew/poisson.hpp"
#include "stosew/rate.hpp"
#include "stosew/sewing.hpp"

namespace stosew {

/// Materialized W(t_i) values, (path, point, comp) row-major.
inline std::shared_ptr<std::vector<double>> brownian_values(const PathBundle& b) {
    if (!b.has_increments()) throw std::invalid_argument("brownian_values: no increments");
    auto vals = std::make_shared<std::vector<double>>(b.n_paths * b.grid.n_points() * b.dim, 0.0);
    std::size_t np = b.grid.n_points();
    parallel_for(b.n_paths, [&](std::size_t p) {
        for (std::size_t k = 0; k < b.dim; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < b.grid.n_steps; ++i) {
                acc += b.dw(p, i, k);
                (*vals)[(p * np + i + 1) * b.dim + k] = acc;
            }
        }
    });
    return vals;
}

/// Jump counts N(t_i), (path, point) row-major.
inline std::shared_ptr<std::vector<std::uint32_t>> poisson_counts(const PathBundle& b) {
    if (!b.has_jumps()) throw std::invalid_argument("poisson_counts: no jump times");
    std::size_t np = b.grid.n_points();
    auto counts = std::make_shared<std::vector<std::uint32_t>>(b.n_paths * np, 0);
    parallel_for(b.n_paths, [&](std::size_t p) {
        const auto& js = b.poisson_jumps[p];
        std::size_t c = 0;
        for (std::size_t i = 0; i < np; ++i) {
            double t = b.grid.time(i);
            while (c < js.size() && js[c] <= t) ++c;
            (*counts)[p * np + i] = static_cast<std::uint32_t>(c);
        }
    });
    return counts;
}

/// Additive germ A_{s,t} = g(t) - g(s); deterministic, so the conditional
/// rule returns the value itself.
inline Germ additive_germ(const TimeGrid& grid, std::function<double(double)> g) {
    Germ germ;
    germ.dim = 1;
    germ.grid = grid;
    auto gp = std::make_shared<std::function<double(double)>>(std::move(g));
    germ.eval = [grid, gp](std::size_t, std::size_t i, std::size_t j, std::span<double> out) {
        out[0] = (*gp)(grid.time(j)) - (*gp)(grid.time(i));
    };
    germ.cond_eval = [grid, gp](std::size_t, std::size_t, std::size_t i, std::size_t j,
                                std::span<double> out) {
        out[0] = (*gp)(grid.time(j)) - (*gp)(grid.time(i));
    };
    return germ;
}

/// Ito germ A_{s,t} = f(W_s) (W_t - W_s), scalar driving path.
/// E^{F_k} A_{i,j} = 0 for every k <= i by increment independence.
inline Germ ito_germ(const PathBundle& bundle, std::function<double(double)> f) {
    if (bundle.dim != 1) throw std::invalid_argument("ito_germ: scalar bundles only");
    Germ germ;
    germ.dim = 1;
    germ.grid = bundle.grid;
    auto w = brownian_values(bundle);
    std::size_t np = bundle.grid.n_points();
    auto fp = std::make_shared<std::function<double(double)>>(std::move(f));
    germ.eval = [w, np, fp](std::size_t p, std::size_t i, std::size_t j, std::span<double> out) {
        out[0] = (*fp)((*w)[p * np + i]) * ((*w)[p * np + j] - (*w)[p * np + i]);
    };
    germ.cond_eval = [](std::size_t, std::size_t, std::size_t, std::size_t, std::span<double> out) {
        out[0] = 0.0;
    };
    return germ;
}

/// Quadratic-variation germ A_{s,t} = dM (x) dM for Brownian M in d dims;
/// output has d*d components. E^{F_k} A_{i,j} = (t_j - t_i) I_d.
inline Germ qv_brownian_germ(const PathBundle& bundle) {
    Germ germ;
    std::size_t d = bundle.dim;
    germ.dim = d * d;
    germ.grid = bundle.grid;
    auto w = brownian_values(bundle);
    std::size_t np = bundle.grid.n_points();
    double dt = bundle.grid.dt();
    germ.eval = [w, np, d](std::size_t p, std::size_t i, std::size_t j, std::span<double> out) {
        for (std::size_t a = 0; a < d; ++a) {
            double da = (*w)[(p * np + j) * d + a] - (*w)[(p * np + i) * d + a];
            for (std::size_t b = 0; b < d; ++b) {
                double db = (*w)[(p * np + j) * d + b] - (*w)[(p * np + i) * d + b];
                out[a * d + b] = da * db;
            }
        }
    };
    germ.cond_eval = [d, dt](std::size_t, std::size_t, std::size_t i, std::size_t j,
                             std::span<double> out) {
        double g = double(j - i) * dt;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) out[a * d + b] = (a == b) ? g : 0.0;
    };
    return germ;
}

/// QV germ of the compensated Poisson martingale Nbar = N - lambda t.
/// E^{F_k} A_{i,j} = lambda (t_j - t_i).
inline Germ qv_poisson_germ(const PathBundle& bundle) {
    Germ germ;
    germ.dim = 1;
    germ.grid = bundle.grid;
    auto counts = poisson_counts(bundle);
    std::size_t np = bundle.grid.n_points();
    double lam = bundle.poisson_intensity;
    double dt = bundle.grid.dt();
    germ.eval = [counts, np, lam, dt](std::size_t p, std::size_t i, std::size_t j,
                                      std::span<double> out) {
        double dn = double((*counts)[p * np + j]) - double((*counts)[p * np + i]);
        double m = dn - lam * double(j - i) * dt;
        out[0] = m * m;
    };
    germ.cond_eval = [lam, dt](std::size_t, std::size_t, std::size_t i, std::size_t j,
                               std::span<double> out) { out[0] = lam * double(j - i) * dt; };
    return germ;
}

/// Compensated Poisson increment germ A_{s,t} = N_t - N_s - lambda (t-s);
/// delta A = 0 and E^{F_s} A = 0.
inline Germ poisson_compensated_germ(const PathBundle& bundle) {
    Germ germ;
    germ.dim = 1;
    germ.grid = bundle.grid;
    auto counts = poisson_counts(bundle);
    std::size_t np = bundle.grid.n_points();
    double lam = bundle.poisson_intensity;
    double dt = bundle.grid.dt();
    germ.eval = [counts, np, lam, dt](std::size_t p, std::size_t i, std::size_t j,
                                      std::span<double> out) {
        double dn = double((*counts)[p * np + j]) - double((*counts)[p * np + i]);
        out[0] = dn - lam * double(j - i) * dt;
    };
    germ.cond_eval = [](std::size_t, std::size_t, std::size_t, std::size_t, std::span<double> out) {
        out[0] = 0.0;
    };
    return germ;
}

/// Ito integral int_0^t f(W_s) dW_s as a sewing limit.
inline SewingResult ito_integral(std::function<double(double)> f, const PathBundle& bundle,
                                 double t, unsigned max_level, double m) {
    auto germ = ito_germ(bundle, std::move(f));
    return sewing_limit(germ, t, max_level, bundle.n_paths, m);
}

/// |x|^tau clipped to [-R, R] (constant outside), finite C^tau norm.
inline std::function<double(double)> clipped_power(double tau, double R) {
    return [tau, R](double x) { return std::pow(std::min(std::abs(x), R), tau); };
}

/// Lacunary cosine sum sum_k 2^(-k tau) cos(2^k x). Unlike the clipped
/// power, whose roughness sits at a single point, this is Holder-tau at
/// every point down to scale 2^-depth, so rate fits actually see tau.
inline std::function<double(double)> lacunary_holder(double tau, int depth) {
    return [tau, depth](double x) {
        double acc = 0.0;
        for (int k = 0; k <= depth; ++k) acc += std::pow(2.0, -tau * k) * std::cos(std::ldexp(x, k));
        return acc;
    };
}

enum class QvSource { brownian, compensated_poisson };

struct QvResult {
    SewingResult sewing;
    DoobSums doob; // split at the finest dyadic partition
};

/// Quadratic variation at t via the sewing limit, with its Doob split.
inline QvResult quadratic_variation(const PathBundle& bundle, QvSource source, double t,
                                    unsigned max_level, double m = 2.0) {
    Germ germ = (source == QvSource::brownian) ? qv_brownian_germ(bundle) : qv_poisson_germ(bundle);
    QvResult out{sewing_limit(germ, t, max_level, bundle.n_paths, m), {}};
    out.doob = doob_split(germ, Partition::dyadic(germ.grid.t0, t, max_level), bundle.n_paths);
    return out;
}

/// L_m norms of the compensated Poisson increment across gaps, per moment
/// order; exhibits the m >= 2 threshold (slope 1/m < 1/2 fails for m < 2).
struct PoissonCounterexample {
    std::vector<double> m_orders;
    std::vector<RateReport> reports; // one per m, scales = gaps
};

inline PoissonCounterexample poisson_counterexample(double intensity,
                                                    const std::vector<double>& m_list,
                                                    const std::vector<double>& gap_scales,
                                                    std::size_t n_paths, std::uint64_t seed) {
    if (gap_scales.size() < 4)
        throw std::invalid_argument("poisson_counterexample: need >= 4 gaps");
    double max_gap = 0.0;
    for (double g : gap_scales) max_gap = std::max(max_gap, g);
    std::size_t n_gaps = gap_scales.size();
    // accumulate sum |A|^m per (m, gap) in chunks of paths
    std::vector<std::vector<double>> acc(m_list.size(), std::vector<double>(n_gaps, 0.0));
    const std::size_t chunk = 65536;
    TimeGrid window(0.0, max_gap, 1);
    for (std::size_t done = 0; done < n_paths; done += chunk) {
        std::size_t batch = std::min(chunk, n_paths - done);
        PathBundle b;
        b.grid = window;
        b.n_paths = batch;
        b.poisson_intensity = intensity;
        b.poisson_jumps.assign(batch, {});
        parallel_for(batch, [&](std::size_t p) {
            auto rng = path_rng(seed, done + p, /*tag=*/0x504f4953);
            std::exponential_distribution<double> expo(intensity);
            double t = 0.0;
            for (;;) {
                t += expo(rng);
                if (t > max_gap) break;
                b.poisson_jumps[p].push_back(t);
            }
        });
        for (std::size_t p = 0; p < batch; ++p) {
            for (std::size_t g = 0; g < n_gaps; ++g) {
                double a = double(b.jump_count(p, gap_scales[g])) - intensity * gap_scales[g];
                for (std::size_t mi = 0; mi < m_list.size(); ++mi)
                    acc[mi][g] += std::pow(std::abs(a), m_list[mi]);
            }
        }
    }
    PoissonCounterexample out;
    out.m_orders = m_list;
    for (std::size_t mi = 0; mi < m_list.size(); ++mi) {
        RateReport rep;
        rep.m = m_list[mi];
        rep.label = "poisson_gap_lm";
        rep.scales = gap_scales;
        for (std::size_t g = 0; g < n_gaps; ++g)
            rep.lm_values.push_back(std::pow(acc[mi][g] / double(n_paths), 1.0 / m_list[mi]));
        rep.fit();
        out.reports.push_back(std::move(rep));
    }
    return out;
}

/// A C^3 test function with its first three derivatives and a declared
/// bound on the third.
struct C3Function {
    std::function<double(double)> f, f1, f2, f3;
    double third_bound = 0.0;
};

struct ItoFormulaReport {
    double residual_l2 = 0.0;      // || f(W_T)-f(W_0) - I[A1] - I[A4] ||_{L2}
    double residual_mean = 0.0;
    double residual_stderr = 0.0;
    RateReport a3_decay;           // Riemann-sum L2 norms of the Taylor tail
    RateReport a5_decay;           // Riemann-sum L2 norms of A2 - A4
    bool derivative_bound_warning = false;
};

/// Term-by-term change-of-variable decomposition for scalar Brownian paths:
/// checks f(W_T) - f(W_0) against the sewing limits of the first-order and
/// bracket germs and tracks the vanishing remainders.
inline ItoFormulaReport ito_formula_check(const C3Function& fn, const PathBundle& bundle,
                                          unsigned max_level, double m = 2.0) {
    if (bundle.dim != 1) throw std::invalid_argument("ito_formula_check: scalar bundles only");
    auto w = brownian_values(bundle);
    std::size_t np = bundle.grid.n_points();
    const TimeGrid grid = bundle.grid;
    double dt = grid.dt();

    auto wval = [w, np](std::size_t p, std::size_t i) { return (*w)[p * np + i]; };

    Germ a1;
    a1.dim = 1;
    a1.grid = grid;
    a1.eval = [wval, &fn](std::size_t p, std::size_t i, std::size_t j, std::span<double> out) {
        out[0] = fn.f1(wval(p, i)) * (wval(p, j) - wval(p, i));
    };
    Germ a4;
    a4.dim = 1;
    a4.grid = grid;
    a4.eval = [wval, &fn, dt](std::size_t p, std::size_t i, std::size_t j, std::span<double> out) {
        out[0] = 0.5 * fn.f2(wval(p, i)) * double(j - i) * dt;
    };
    Germ a3;
    a3.dim = 1;
    a3.grid = grid;
    a3.eval = [wval, &fn](std::size_t p, std::size_t i, std::size_t j, std::span<double> out) {
        double ws = wval(p, i), d = wval(p, j) - ws;
        out[0] = fn.f(ws + d) - fn.f(ws) - fn.f1(ws) * d - 0.5 * fn.f2(ws) * d * d;
    };
    Germ a5;
    a5.dim = 1;
    a5.grid = grid;
    a5.eval = [wval, &fn, dt](std::size_t p, std::size_t i, std::size_t j, std::span<double> out) {
        double d = wval(p, j) - wval(p, i);
        out[0] = 0.5 * fn.f2(wval(p, i)) * (d * d - double(j - i) * dt);
    };

    double T = grid.t1;
    auto r1 = sewing_limit(a1, T, max_level, bundle.n_paths, m);
    auto r4 = sewing_limit(a4, T, max_level, bundle.n_paths, m);

    ItoFormulaReport rep;
    Samples resid(bundle.n_paths, 1);
    for (std::size_t p = 0; p < bundle.n_paths; ++p) {
        double lhs = fn.f(wval(p, np - 1)) - fn.f(wval(p, 0));
        resid.data[p] = lhs - r1.limit.data[p] - r4.limit.data[p];
    }
    rep.residual_l2 = estimate_lm(resid, 2.0);
    rep.residual_mean = mean_scalar(resid.data);
    rep.residual_stderr = stderr_scalar(resid.data);

    auto decay_of = [&](const Germ& g, const char* label) {
        RateReport r;
        r.m = m;
        r.label = label;
        Samples sums(bundle.n_paths, 1);
        for (unsigned n = 2; n <= max_level; ++n) {
            std::size_t cells = std::size_t(1) << n;
            std::size_t stride = grid.n_steps / cells;
            if (stride == 0) break;
            parallel_for(bundle.n_paths, [&](std::size_t p) {
                double acc = 0.0;
                double tmp[1];
                for (std::size_t c = 0; c < cells; ++c) {
                    g.eval(p, c * stride, (c + 1) * stride, std::span<double>(tmp, 1));
                    acc += tmp[0];
                }
                sums.data[p] = acc;
            });
            r.scales.push_back(T * std::ldexp(1.0, -int(n)));
            r.lm_values.push_back(estimate_lm(sums, m));
        }
        bool all_zero = true;
        for (double v : r.lm_values)
            if (v > 1e-14) all_zero = false;
        if (all_zero) {
            r.fitted_exponent = 0.0;
            r.converged = true;
        } else {
            r.fit();
        }
        return r;
    };
    rep.a3_decay = decay_of(a3, "a3_riemann_norm");
    rep.a5_decay = decay_of(a5, "a5_riemann_norm");

    if (fn.third_bound > 0.0) {
        double maxd3 = 0.0;
        for (std::size_t p = 0; p < bundle.n_paths; ++p)
            for (std::size_t i = 0; i < np; ++i)
                maxd3 = std::max(maxd3, std::abs(fn.f3(wval(p, i))));
        rep.derivative_bound_warning = maxd3 > fn.third_bound;
    }
    return rep;
}

} // namespace stosew
