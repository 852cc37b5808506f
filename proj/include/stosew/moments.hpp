#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stosew/fbm.hpp"
#include "stosew/quadrature.hpp"
#include "stosew/stats.hpp"

namespace stosew {

struct MomentBoundReport {
    std::vector<int> orders;
    std::vector<double> moments;       // MC estimates of E (int h dt)^n
    std::vector<double> moment_stderr;
    std::vector<double> bound_shape;   // n! T^(n k) / Gamma(n k + 1)
    std::vector<double> implied_const; // c_n = (m_n / bound_shape_n)^(1/n)
    double worst_const_ratio = 0.0;    // max over n of c_{n+1}/c_n
    bool shape_ok = true;              // implied constants do not grow > 20% per order
    bool heavy_tail_warning = false;
    double first_moment_quadrature = 0.0; // int_0^T P_{sigma^2(0,t)} h (x0) dt
};

/// Moments of I = int_0^T h(t, B^H_t) dt for a nonnegative h, compared in
/// shape against n! C^n ||h||^n T^(n k)/Gamma(n k + 1), k = 1 - H d/p - 1/q.
/// The unknown constant C is exposed per order as
///   c_n = (m_n Gamma(n k + 1) / (n! T^(n k)))^(1/n);
/// the bound holds with a single C iff the c_n stay bounded, so the check
/// asserts c_{n+1} <= 1.2 c_n (ratio test within 20%).
inline MomentBoundReport moment_bound_check(const std::function<double(double, double)>& h,
                                            const PathBundle& bundle, const FbmModel& model,
                                            const std::vector<int>& n_list, double k_exponent) {
    if (k_exponent <= 0.0)
        throw std::invalid_argument("moment_bound_check: need H d/p + 1/q < 1");
    const TimeGrid& grid = bundle.grid;
    std::size_t np = grid.n_points();
    double dt = grid.dt();
    double T = grid.t1;

    std::vector<double> integrals(bundle.n_paths, 0.0);
    parallel_for(bundle.n_paths, [&](std::size_t p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            double w = (i == 0 || i + 1 == np) ? 0.5 : 1.0;
            acc += w * h(grid.time(i), bundle.fbm(p, i, 0)) * dt;
        }
        integrals[p] = acc;
    });

    MomentBoundReport rep;
    rep.orders = n_list;
    for (int n : n_list) {
        Samples powed(bundle.n_paths, 1);
        for (std::size_t p = 0; p < bundle.n_paths; ++p)
            powed.data[p] = std::pow(integrals[p], n);
        rep.moments.push_back(mean_scalar(powed.data));
        rep.moment_stderr.push_back(stderr_scalar(powed.data));
        rep.bound_shape.push_back(std::tgamma(double(n) + 1.0) * std::pow(T, double(n) * k_exponent) /
                                  std::tgamma(double(n) * k_exponent + 1.0));
        if (n >= 6 && bundle.n_paths < 10000) rep.heavy_tail_warning = true;
    }

    // per-order implied constants and their growth
    for (std::size_t i = 0; i < rep.moments.size(); ++i) {
        double n = double(rep.orders[i]);
        rep.implied_const.push_back(std::pow(rep.moments[i] / rep.bound_shape[i], 1.0 / n));
    }
    for (std::size_t i = 0; i + 1 < rep.implied_const.size(); ++i) {
        double ratio = rep.implied_const[i + 1] / rep.implied_const[i];
        rep.worst_const_ratio = std::max(rep.worst_const_ratio, ratio);
        if (ratio > 1.2) rep.shape_ok = false;
    }

    // first-moment oracle: E I = int_0^T [P_{sigma^2(0,t)} h(t,.)](0) dt with
    // the Gaussian smoothing done by adaptive quadrature
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            double w = (i == 0 || i + 1 == np) ? 0.5 : 1.0;
            double t = grid.time(i);
            double sig2 = i == 0 ? 0.0 : model.sigma2_disc(0, i, i);
            double v;
            if (sig2 == 0.0) {
                v = h(t, 0.0);
            } else {
                double sd = std::sqrt(sig2);
                auto f = [&](double z) {
                    return h(t, sd * z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
                };
                v = integrate_adaptive_rel(f, -8.0, 8.0, 1e-9);
            }
            acc += w * v * dt;
        }
        rep.first_moment_quadrature = acc;
    }
    return rep;
}

} // namespace stosew
