#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stosew/sde.hpp"
#include "stosew/stats.hpp"

namespace stosew {

struct GirsanovResult {
    std::vector<double> xi;       // per-path xi_T
    std::vector<double> ito_term; // per-path int v . dW
    std::vector<double> v_sq;     // per-path int |v|^2 ds
    double xi_mean = 0.0;
    double xi_stderr = 0.0;
    bool all_finite = true;
};

/// Exponential-martingale weights that remove a bounded drift:
///   v_s = s^(H-1/2)/Gamma(1/2-H) int_0^s (s-r)^(-1/2-H) r^(1/2-H) b(r,X_r) dr
///   xi_T = exp(-int v.dW - 1/2 int |v|^2 ds).
/// The (s-r) singular factor is integrated exactly per cell; the smooth part
/// r^(1/2-H) b(r, X_r) is frozen at the cell midpoint (left X value).
inline GirsanovResult girsanov_weights(const DriftSpec& b, const SdePaths& paths,
                                       const PathBundle& bundle, double hurst) {
    if (hurst <= 0.0 || hurst >= 0.5)
        throw std::domain_error("girsanov_weights: H must be in (0,1/2)");
    if (!bundle.has_increments())
        throw std::invalid_argument("girsanov_weights: bundle lacks Brownian increments");
    const TimeGrid& grid = paths.grid;
    std::size_t n = grid.n_steps, np = grid.n_points(), d = paths.dim;
    double dt = grid.dt();
    double pre = 1.0 / std::tgamma(0.5 - hurst);
    double pw = 0.5 - hurst;

    GirsanovResult out;
    out.xi.assign(paths.n_paths, 0.0);
    out.ito_term.assign(paths.n_paths, 0.0);
    out.v_sq.assign(paths.n_paths, 0.0);

    std::vector<char> finite_flags(paths.n_paths, 1);
    parallel_for(paths.n_paths, [&](std::size_t p) {
        std::vector<double> bval(d), xr(d);
        // g_j = mid^(1/2-H) * b(t_j, X_j), frozen per cell
        std::vector<double> gvals(n * d);
        for (std::size_t j = 0; j < n; ++j) {
            double mid = 0.5 * (grid.time(j) + grid.time(j + 1));
            for (std::size_t k = 0; k < d; ++k) xr[k] = paths.X(p, j, k);
            if (b.kind == DriftSpec::Kind::grid) {
                for (std::size_t k = 0; k < b.fields.size(); ++k) {
                    const GridField& f = b.fields[k].at(grid.time(j));
                    bval[k] = f.dim == 1 ? f.sample(xr[0]) : f.sample(xr[0], xr[1]);
                }
            } else if (b.fn) {
                b.fn(grid.time(j), xr, bval);
            } else {
                std::fill(bval.begin(), bval.end(), 0.0);
            }
            if (b.truncation > 0.0)
                for (auto& v : bval)
                    v = std::max(-b.truncation, std::min(b.truncation, v));
            for (std::size_t k = 0; k < d; ++k) gvals[j * d + k] = std::pow(mid, pw) * bval[k];
        }
        double ito = 0.0, vsq = 0.0;
        std::vector<double> v(d);
        for (std::size_t i = 1; i < np; ++i) {
            double s = grid.time(i);
            for (std::size_t k = 0; k < d; ++k) v[k] = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                double a = grid.time(j), bb = grid.time(j + 1);
                // exact cell integral of (s-r)^(-1/2-H)
                double cell = (std::pow(s - a, pw) - std::pow(s - bb, pw)) / pw;
                for (std::size_t k = 0; k < d; ++k) v[k] += cell * gvals[j * d + k];
            }
            double spre = pre * std::pow(s, hurst - 0.5);
            for (std::size_t k = 0; k < d; ++k) v[k] *= spre;
            // left-point Ito sum paired with the matching |v|^2 dt term, so
            // the discrete exponential is a true martingale
            if (i < np - 1) {
                double n2 = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    ito += v[k] * bundle.dw(p, i, k);
                    n2 += v[k] * v[k];
                }
                vsq += n2 * dt;
                if (!std::isfinite(n2)) finite_flags[p] = 0;
            }
        }
        out.ito_term[p] = ito;
        out.v_sq[p] = vsq;
        out.xi[p] = std::exp(-ito - 0.5 * vsq);
    });
    for (char f : finite_flags)
        if (!f) out.all_finite = false;
    out.xi_mean = mean_scalar(out.xi);
    out.xi_stderr = stderr_scalar(out.xi);
    return out;
}

} // namespace stosew
