#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "stosew/fbm.hpp"
#include "stosew/germ.hpp"
#include "stosew/grid_field.hpp"
#include "stosew/heat.hpp"
#include "stosew/rate.hpp"
#include "stosew/sewing.hpp"

namespace stosew {

/// Averaged-drift germ along a Volterra fBm bundle (scalar field, d = 1):
///   A^x_{s,t}[f] = int_s^t [P_{sigma^2(s,r)} f_r](E^{F_s} B_r + x) dr
/// with the discrete conditional variances of the scheme itself, so the
/// exact rule E^{F_k} A_{a,b} = int_a^b [P_{sigma^2(k,r)} f_r](E^{F_k} B_r + x) dr
/// holds in the discrete model and E^{F_s} delta A = 0.
class AveragedGerm {
public:
    AveragedGerm(std::shared_ptr<const PathBundle> bundle, std::shared_ptr<const FbmModel> model,
                 std::shared_ptr<const HeatLadder> ladder, double x_offset)
        : bundle_(std::move(bundle)), model_(std::move(model)), ladder_(std::move(ladder)),
          x_(x_offset) {
        if (bundle_->dim != 1) throw std::invalid_argument("AveragedGerm: scalar bundles only");
        if (!bundle_->has_increments())
            throw std::invalid_argument("AveragedGerm: bundle must retain Brownian increments");
    }

    const TimeGrid& grid() const { return bundle_->grid; }
    double offset() const { return x_; }

    /// E^{F_{t_k}} B(t_r) by direct summation over the retained increments.
    double cond_mean(std::size_t path, std::size_t k, std::size_t r) const {
        double v = 0.0;
        for (std::size_t j = 0; j < k; ++j) v += model_->kbar(r, j) * bundle_->dw(path, j, 0);
        return v;
    }

    /// Composite trapezoid of r -> P_{sigma^2(k,r)} f_r (E^{F_k} B_r + x)
    /// over grid nodes in [t_a, t_b]; the same rule at every scale.
    double integrate(std::size_t path, std::size_t k, std::size_t a, std::size_t b) const {
        if (a == b) return 0.0;
        double dt = grid().dt();
        double acc = 0.0;
        for (std::size_t r = a; r <= b; ++r) {
            double w = (r == a || r == b) ? 0.5 : 1.0;
            double sig2 = (r == k) ? 0.0 : model_->sigma2_disc(k, r, r);
            double point = cond_mean(path, k, r) + x_;
            acc += w * ladder_->value(sig2, point);
        }
        return acc * dt;
    }

    Germ germ() const {
        Germ g;
        g.dim = 1;
        g.grid = grid();
        const AveragedGerm* self = this;
        g.eval = [self](std::size_t p, std::size_t i, std::size_t j, std::span<double> out) {
            out[0] = self->integrate(p, i, i, j);
        };
        g.cond_eval = [self](std::size_t p, std::size_t k, std::size_t i, std::size_t j,
                             std::span<double> out) { out[0] = self->integrate(p, k, i, j); };
        return g;
    }

private:
    std::shared_ptr<const PathBundle> bundle_;
    std::shared_ptr<const FbmModel> model_;
    std::shared_ptr<const HeatLadder> ladder_;
    double x_;
};

/// Builds the sigma ladder for a field over a bundle's gap range.
inline std::shared_ptr<HeatLadder> make_ladder(const GridField& f, const FbmModel& model) {
    const TimeGrid& grid = model.grid();
    double sig_min = model.sigma2_disc(0, 1, 1) * 0.49; // below one-cell conditional variance
    double sig_max = std::pow(grid.t1, 2.0 * model.hurst()) * 1.01;
    return std::make_shared<HeatLadder>(f, sig_min, sig_max);
}

/// Limit process of the averaged germ at every grid time (finest Riemann
/// sums accumulated cell by cell), one row per path.
inline std::vector<double> averaged_limit_path(const AveragedGerm& germ, std::size_t n_paths) {
    const TimeGrid& grid = germ.grid();
    std::size_t np = grid.n_points();
    std::vector<double> out(n_paths * np, 0.0);
    parallel_for(n_paths, [&](std::size_t p) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < np; ++i) {
            acc += germ.integrate(p, i, i, i + 1);
            out[p * np + i + 1] = acc;
        }
    });
    return out;
}

/// Direct pathwise integral int f(B_r + x) dr by the same trapezoid rule,
/// no smoothing; the comparison target for bounded f.
inline std::vector<double> pathwise_integral_path(const PathBundle& bundle, const GridField& f,
                                                  double x_offset) {
    std::size_t np = bundle.grid.n_points();
    double dt = bundle.grid.dt();
    std::vector<double> out(bundle.n_paths * np, 0.0);
    parallel_for(bundle.n_paths, [&](std::size_t p) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < np; ++i) {
            double fa = f.sample(bundle.fbm(p, i, 0) + x_offset);
            double fb = f.sample(bundle.fbm(p, i + 1, 0) + x_offset);
            acc += 0.5 * (fa + fb) * dt;
            out[p * np + i + 1] = acc;
        }
    });
    return out;
}

struct AveragedFieldResult {
    std::vector<double> x_offsets;
    std::vector<std::vector<double>> limits; // [x][path * n_points + i]
    RateReport time_rate;      // ||A_{s,s+g}|| against g at x_offsets[0]
    RateReport space_rate;     // ||A^x - A^y|| against |x-y| at a fixed (s,t)
    RateReport diff_time_rate; // ||A^x - A^y|| against the gap at fixed |x-y|
};

/// Sewing limits of the averaged germ on a tensor of (t, x) values plus the
/// joint-Holder rate fits.
inline AveragedFieldResult averaged_field(const GridField& f, std::shared_ptr<const PathBundle> bundle,
                                          std::shared_ptr<const FbmModel> model,
                                          const std::vector<double>& x_offsets,
                                          const std::vector<double>& gap_scales, double m,
                                          double gamma_H_flag) {
    if (gamma_H_flag <= 0.5)
        throw std::invalid_argument("averaged_field: gamma_H(nu,q) <= 1/2, refusing");
    if (x_offsets.size() < 2) throw std::invalid_argument("averaged_field: need >= 2 offsets");
    auto ladder = make_ladder(f, *model);
    AveragedFieldResult out;
    out.x_offsets = x_offsets;
    std::size_t n_paths = bundle->n_paths;
    std::size_t np = bundle->grid.n_points();
    for (double x : x_offsets) {
        AveragedGerm germ(bundle, model, ladder, x);
        out.limits.push_back(averaged_limit_path(germ, n_paths));
    }

    const TimeGrid& grid = bundle->grid;
    double s_anchor = 0.25 * (grid.t1 - grid.t0);
    auto increment_norm = [&](const std::vector<double>& path_vals, double s, double g) {
        std::size_t is = grid.index_of(s), it = grid.index_of(s + g);
        Samples d(n_paths, 1);
        for (std::size_t p = 0; p < n_paths; ++p)
            d.data[p] = path_vals[p * np + it] - path_vals[p * np + is];
        return estimate_lm(d, m);
    };

    out.time_rate.m = m;
    out.time_rate.label = "averaged_time_gap";
    for (double g : gap_scales) {
        out.time_rate.scales.push_back(g);
        out.time_rate.lm_values.push_back(increment_norm(out.limits[0], s_anchor, g));
    }
    out.time_rate.fit();

    // spatial differences at a fixed window; the widest gap keeps the
    // offsets well below the conditional-deviation scale
    double g_fix = gap_scales.front();
    out.space_rate.m = m;
    out.space_rate.label = "averaged_space_diff";
    std::size_t is = grid.index_of(s_anchor), it = grid.index_of(s_anchor + g_fix);
    for (std::size_t xi = 1; xi < x_offsets.size(); ++xi) {
        Samples d(n_paths, 1);
        for (std::size_t p = 0; p < n_paths; ++p)
            d.data[p] = (out.limits[xi][p * np + it] - out.limits[xi][p * np + is]) -
                        (out.limits[0][p * np + it] - out.limits[0][p * np + is]);
        out.space_rate.scales.push_back(std::abs(x_offsets[xi] - x_offsets[0]));
        out.space_rate.lm_values.push_back(estimate_lm(d, m));
    }
    if (out.space_rate.scales.size() >= 4)
        out.space_rate.fit();
    else {
        auto fit = fit_loglog(out.space_rate.scales, out.space_rate.lm_values);
        out.space_rate.fitted_exponent = fit.slope;
        out.space_rate.stderr = fit.slope_stderr;
    }

    // gap exponent of the spatial difference at the farthest offset pair
    out.diff_time_rate.m = m;
    out.diff_time_rate.label = "averaged_diff_time_gap";
    std::size_t xi = x_offsets.size() - 1;
    for (double g : gap_scales) {
        std::size_t ia = grid.index_of(s_anchor), ib = grid.index_of(s_anchor + g);
        Samples d(n_paths, 1);
        for (std::size_t p = 0; p < n_paths; ++p)
            d.data[p] = (out.limits[xi][p * np + ib] - out.limits[xi][p * np + ia]) -
                        (out.limits[0][p * np + ib] - out.limits[0][p * np + ia]);
        out.diff_time_rate.scales.push_back(g);
        out.diff_time_rate.lm_values.push_back(estimate_lm(d, m));
    }
    out.diff_time_rate.fit();
    return out;
}

struct GradientExchangeReport {
    std::vector<double> h_values;
    std::vector<double> residual_l2; // || FD of field - field of grad f ||_{L2} at (t,x)
    double fitted_order = 0.0;       // expected about 2 from central differences
};

/// Central finite difference in x of the averaged field against the
/// averaged field of the spectral gradient of f.
inline GradientExchangeReport gradient_exchange_check(const GridField& f,
                                                      std::shared_ptr<const PathBundle> bundle,
                                                      std::shared_ptr<const FbmModel> model,
                                                      double t, double x,
                                                      const std::vector<double>& h_values) {
    auto ladder = make_ladder(f, *model);
    GridField gradf = heat_gradient(0.0, f, 0);
    auto grad_ladder = make_ladder(gradf, *model);
    std::size_t n_paths = bundle->n_paths;
    std::size_t it = bundle->grid.index_of(t);
    std::size_t np = bundle->grid.n_points();

    AveragedGerm grad_germ(bundle, model, grad_ladder, x);
    auto grad_limit = averaged_limit_path(grad_germ, n_paths);

    GradientExchangeReport rep;
    rep.h_values = h_values;
    for (double h : h_values) {
        AveragedGerm plus(bundle, model, ladder, x + h);
        AveragedGerm minus(bundle, model, ladder, x - h);
        auto lp = averaged_limit_path(plus, n_paths);
        auto lm = averaged_limit_path(minus, n_paths);
        Samples resid(n_paths, 1);
        for (std::size_t p = 0; p < n_paths; ++p) {
            double fd = (lp[p * np + it] - lm[p * np + it]) / (2.0 * h);
            resid.data[p] = fd - grad_limit[p * np + it];
        }
        rep.residual_l2.push_back(estimate_lm(resid, 2.0));
    }
    bool all_zero = true;
    for (double v : rep.residual_l2)
        if (v > 1e-14) all_zero = false;
    if (!all_zero && h_values.size() >= 2) {
        auto fit = fit_loglog(rep.h_values, rep.residual_l2);
        rep.fitted_order = fit.slope;
    }
    return rep;
}

} // namespace stosew
