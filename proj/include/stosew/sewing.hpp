#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stosew/germ.hpp"
#include "stosew/rate.hpp"
#include "stosew/stats.hpp"

namespace stosew {

struct SewingResult {
    Samples limit;     // finest-level dyadic Riemann sums, per path
    RateReport report; // ||A^n - A^max||_{L_m} against mesh 2^-n (t-S)
};

/// Monte Carlo sewing limit over dyadic partitions of [grid.t0, t]. The
/// limit is the finest computed level; the rate fit drops that level's own
/// nearest difference to avoid self-comparison bias.
inline SewingResult sewing_limit(const Germ& germ, double t, unsigned max_level,
                                 std::size_t n_paths, double m) {
    if (m < 2.0) throw std::invalid_argument("sewing_limit: m must be >= 2");
    if (max_level < 5) throw std::invalid_argument("sewing_limit: need max_level >= 5 for a fit");
    double s = germ.grid.t0;
    std::size_t is = germ.grid.index_of(s), it = germ.grid.index_of(t);
    if ((it - is) % (std::size_t(1) << max_level) != 0)
        throw std::invalid_argument("sewing_limit: grid resolution exceeded at max_level");

    std::vector<Samples> per_level(max_level + 1);
    for (auto& sm : per_level) sm = Samples(n_paths, germ.dim);
    parallel_for(n_paths, [&](std::size_t p) {
        std::vector<double> tmp(germ.dim);
        for (unsigned n = 0; n <= max_level; ++n) {
            std::size_t cells = std::size_t(1) << n;
            std::size_t stride = (it - is) / cells;
            double* acc = per_level[n].data.data() + p * germ.dim;
            for (std::size_t c = 0; c < cells; ++c) {
                germ.eval(p, is + c * stride, is + (c + 1) * stride, tmp);
                for (std::size_t k = 0; k < germ.dim; ++k) acc[k] += tmp[k];
            }
        }
    });

    SewingResult out;
    out.limit = std::move(per_level[max_level]);
    RateReport& rep = out.report;
    rep.m = m;
    rep.label = "dyadic_error";
    Samples diff(n_paths, germ.dim);
    // differences against the finest level; drop level max_level-1 from the fit
    std::vector<double> fit_scales, fit_values;
    for (unsigned n = 0; n + 1 <= max_level; ++n) {
        for (std::size_t i = 0; i < diff.data.size(); ++i)
            diff.data[i] = per_level[n].data[i] - out.limit.data[i];
        double scale = (t - s) * std::ldexp(1.0, -int(n));
        double lm = estimate_lm(diff, m);
        rep.scales.push_back(scale);
        rep.lm_values.push_back(lm);
        if (n + 2 <= max_level) {
            fit_scales.push_back(scale);
            fit_values.push_back(lm);
        }
    }
    bool all_zero = true;
    for (double v : rep.lm_values)
        if (v != 0.0) all_zero = false;
    if (all_zero) {
        rep.fitted_exponent = 0.0;
        rep.stderr = 0.0;
        rep.converged = true;
    } else {
        if (fit_scales.size() < 4) throw std::invalid_argument("sewing_limit: need >= 4 fit scales");
        auto f = fit_loglog(fit_scales, fit_values);
        rep.fitted_exponent = f.slope;
        rep.stderr = f.slope_stderr;
        rep.converged = true;
        std::size_t n = rep.lm_values.size();
        for (std::size_t i = n >= 3 ? n - 3 : 0; i + 1 < n; ++i)
            if (rep.lm_values[i + 1] > rep.lm_values[i]) rep.converged = false;
    }
    return out;
}

/// Fitted constants of the two sewing conditions. eps1/gamma1 come from
/// ||E^{F_s} delta A|| against the gap (baseline exponent 1), eps2/gamma2
/// from ||delta A|| (baseline 1/2); u is the midpoint of [s,t].
struct ConditionFit {
    std::optional<double> eps1; // absent when the conditional part vanishes
    std::optional<double> gamma1;
    double eps2 = 0.0;
    double gamma2 = 0.0;
    bool cond_exact_zero = false;
    bool delta_exact_zero = false;
};

inline ConditionFit fit_conditions(const Germ& germ, double m, const std::vector<double>& gap_scales,
                                   std::size_t n_paths, double s_anchor = 0.0,
                                   double u_placement = 0.5) {
    if (gap_scales.size() < 4) throw std::invalid_argument("fit_conditions: need >= 4 gap scales");
    if (!(u_placement > 0.0 && u_placement < 1.0))
        throw std::invalid_argument("fit_conditions: u placement must be in (0,1)");
    std::size_t n_gaps = gap_scales.size();
    std::vector<double> delta_lm(n_gaps, 0.0), cond_lm(n_gaps, 0.0);
    bool has_cond = germ.has_cond();
    for (std::size_t g = 0; g < n_gaps; ++g) {
        double h = gap_scales[g];
        std::size_t is = germ.grid.index_of(s_anchor);
        std::size_t it = germ.grid.index_of(s_anchor + h);
        std::size_t iu = is + std::size_t(std::llround(double(it - is) * u_placement));
        iu = std::min(std::max(iu, is), it);
        Samples d(n_paths, germ.dim), c(n_paths, germ.dim);
        parallel_for(n_paths, [&](std::size_t p) {
            std::vector<double> out(germ.dim), tmp(germ.dim);
            delta_idx(germ, p, is, iu, it, out, tmp);
            for (std::size_t k = 0; k < germ.dim; ++k) d.data[p * germ.dim + k] = out[k];
            if (has_cond) {
                cond_delta_idx(germ, p, is, iu, it, out, tmp);
                for (std::size_t k = 0; k < germ.dim; ++k) c.data[p * germ.dim + k] = out[k];
            }
        });
        delta_lm[g] = estimate_lm(d, m);
        if (has_cond) cond_lm[g] = estimate_lm(c, m);
    }

    ConditionFit fit;
    double dmax = 0.0, cmax = 0.0;
    for (double v : delta_lm) dmax = std::max(dmax, v);
    for (double v : cond_lm) cmax = std::max(cmax, v);
    if (dmax < 1e-13) {
        fit.delta_exact_zero = true;
        fit.eps2 = 0.0;
        fit.gamma2 = 0.0;
    } else {
        auto f = fit_loglog(gap_scales, delta_lm);
        fit.eps2 = f.slope - 0.5;
        fit.gamma2 = std::exp(f.intercept);
    }
    if (has_cond) {
        if (cmax < 1e-13) {
            fit.cond_exact_zero = true;
            fit.gamma1 = 0.0;
        } else {
            auto f = fit_loglog(gap_scales, cond_lm);
            fit.eps1 = f.slope - 1.0;
            fit.gamma1 = std::exp(f.intercept);
        }
    }
    return fit;
}

} // namespace stosew
