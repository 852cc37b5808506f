#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stosew/sde.hpp"
#include "stosew/stats.hpp"
#include "stosew/young.hpp"

namespace stosew {

/// Smooth drift with its spatial gradient, both closed form.
struct FlowDrift {
    std::size_t d = 1;
    std::function<void(double t, std::span<const double> x, std::span<double> out)> b;
    // gradient entries (k,j) = d_k b^j, row-major, d*d components
    std::function<void(double t, std::span<const double> x, std::span<double> out)> grad_b;
};

/// V^{kj}_t: sewing limit of the heat-propagator germ with f = d_k b^j
/// along one path of X, i.e. the rigorous version of int d_k b^j(r, X_r) dr.
/// The propagator is applied by Gauss-Hermite smoothing with variance r - s.
struct FlowV {
    std::size_t d = 1;
    TimeGrid grid;
    // per path: d*d paths of values, layout [path][(k*d+j) * n_points + i]
    std::vector<std::vector<double>> values;

    std::vector<HolderPath> paths_for(std::size_t p, double declared_tau) const {
        std::vector<HolderPath> out;
        std::size_t np = grid.n_points();
        for (std::size_t kj = 0; kj < d * d; ++kj) {
            std::vector<double> v(values[p].begin() + kj * np, values[p].begin() + (kj + 1) * np);
            out.emplace_back(grid, std::move(v), declared_tau);
        }
        return out;
    }
};

inline FlowV build_V(const FlowDrift& drift, const SdePaths& x_paths) {
    std::size_t d = drift.d;
    const TimeGrid& grid = x_paths.grid;
    std::size_t np = grid.n_points();
    double dt = grid.dt();
    const auto& gh = GaussHermite20::get();

    FlowV out;
    out.d = d;
    out.grid = grid;
    out.values.assign(x_paths.n_paths, std::vector<double>(d * d * np, 0.0));

    parallel_for(x_paths.n_paths, [&](std::size_t p) {
        std::vector<double> xi(d), shifted(d), g0(d * d), g1(d * d), gtmp(d * d);
        auto& vp = out.values[p];
        for (std::size_t i = 0; i + 1 < np; ++i) {
            double t = grid.time(i);
            for (std::size_t k = 0; k < d; ++k) xi[k] = x_paths.X(p, i, k);
            // node r = t_i: sigma = 0
            drift.grad_b(t, xi, g0);
            // node r = t_{i+1}: sigma = dt, smooth axis by axis
            std::fill(g1.begin(), g1.end(), 0.0);
            double sd = std::sqrt(dt);
            if (d == 1) {
                for (std::size_t q = 0; q < gh.z.size(); ++q) {
                    shifted[0] = xi[0] + sd * gh.z[q];
                    drift.grad_b(grid.time(i + 1), shifted, gtmp);
                    g1[0] += gh.w[q] * gtmp[0];
                }
            } else {
                // isotropic smoothing via a sparse product rule: average the
                // per-axis GH sweeps (exact to O(sigma), same order as the
                // one-step freezing already present)
                for (std::size_t axis = 0; axis < d; ++axis) {
                    for (std::size_t q = 0; q < gh.z.size(); ++q) {
                        for (std::size_t k = 0; k < d; ++k) shifted[k] = xi[k];
                        shifted[axis] = xi[axis] + sd * gh.z[q];
                        drift.grad_b(grid.time(i + 1), shifted, gtmp);
                        for (std::size_t kj = 0; kj < d * d; ++kj)
                            g1[kj] += gh.w[q] * gtmp[kj] / double(d);
                    }
                }
            }
            for (std::size_t kj = 0; kj < d * d; ++kj) {
                double inc = 0.5 * (g0[kj] + g1[kj]) * dt;
                vp[kj * np + i + 1] = vp[kj * np + i] + inc;
            }
        }
    });
    return out;
}

/// Empirical Holder exponent of V across paths (L2 increments over gaps).
inline RateReport flow_v_holder_rate(const FlowV& v, const std::vector<double>& gaps) {
    RateReport rep;
    rep.m = 2.0;
    rep.label = "flow_v_holder";
    std::size_t np = v.grid.n_points();
    double s_anchor = 0.25 * (v.grid.t1 - v.grid.t0);
    std::size_t n_paths = v.values.size();
    for (double g : gaps) {
        std::size_t ia = v.grid.index_of(s_anchor), ib = v.grid.index_of(s_anchor + g);
        Samples d(n_paths, v.d * v.d);
        for (std::size_t p = 0; p < n_paths; ++p)
            for (std::size_t kj = 0; kj < v.d * v.d; ++kj)
                d.data[p * v.d * v.d + kj] = v.values[p][kj * np + ib] - v.values[p][kj * np + ia];
        rep.scales.push_back(g);
        rep.lm_values.push_back(estimate_lm(d, 2.0));
    }
    rep.fit();
    return rep;
}

struct DivisionIdentityReport {
    double lhs_l2 = 0.0;
    double rhs_l2 = 0.0;
    double residual_l2 = 0.0;
    double relative_residual = 0.0;
};

/// Checks int f(X) dr - int f(Xbar) dr = int (psi - psibar) . dV with
/// V_t = int_0^t int_0^1 grad f(B_r + theta psi_r + (1-theta) psibar_r) dtheta dr,
/// the theta integral by 8-node Gauss-Legendre, the Young integral left-point.
inline DivisionIdentityReport division_identity_check(
    const std::function<double(std::span<const double>)>& f,
    const std::function<void(std::span<const double>, std::span<double>)>& grad_f,
    const SdePaths& sol, const SdePaths& sol_bar, const PathBundle& bundle) {
    const TimeGrid& grid = sol.grid;
    std::size_t np = grid.n_points(), d = sol.dim;
    double dt = grid.dt();
    const auto& gl = GaussLegendre::n8();

    Samples lhs(sol.n_paths, 1), rhs(sol.n_paths, 1), resid(sol.n_paths, 1);
    parallel_for(sol.n_paths, [&](std::size_t p) {
        std::vector<double> xa(d), xb(d), point(d), grad(d), vprev(d, 0.0), vcur(d, 0.0);
        double l = 0.0, r = 0.0;
        for (std::size_t i = 0; i + 1 < np; ++i) {
            // lhs: trapezoid of f(X) - f(Xbar)
            auto fdiff = [&](std::size_t idx) {
                for (std::size_t k = 0; k < d; ++k) xa[k] = sol.X(p, idx, k);
                for (std::size_t k = 0; k < d; ++k) xb[k] = sol_bar.X(p, idx, k);
                return f(xa) - f(xb);
            };
            l += 0.5 * (fdiff(i) + fdiff(i + 1)) * dt;

            // dV over [t_i, t_{i+1}] with the theta-averaged gradient at t_i
            std::vector<double> dv(d, 0.0);
            for (int q = 0; q < 8; ++q) {
                double th = gl.node[q];
                for (std::size_t k = 0; k < d; ++k)
                    point[k] = bundle.fbm(p, i, k) + th * sol.Psi(p, i, k) +
                               (1.0 - th) * sol_bar.Psi(p, i, k);
                grad_f(point, grad);
                for (std::size_t k = 0; k < d; ++k) dv[k] += gl.weight[q] * grad[k] * dt;
            }
            // left-point Young increment (psi_i - psibar_i) . dV
            for (std::size_t k = 0; k < d; ++k)
                r += (sol.Psi(p, i, k) - sol_bar.Psi(p, i, k)) * dv[k];
        }
        lhs.data[p] = l;
        rhs.data[p] = r;
        resid.data[p] = l - r;
    });

    DivisionIdentityReport rep;
    rep.lhs_l2 = estimate_lm(lhs, 2.0);
    rep.rhs_l2 = estimate_lm(rhs, 2.0);
    rep.residual_l2 = estimate_lm(resid, 2.0);
    rep.relative_residual = rep.residual_l2 / std::max(rep.lhs_l2, 1e-300);
    return rep;
}

} // namespace stosew
