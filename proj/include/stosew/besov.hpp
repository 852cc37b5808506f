#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stosew/grid_field.hpp"

namespace stosew {

namespace besov_detail {

// cubic B-spline bump rescaled to support [-1,1]
inline double bspline(double u) {
    double x = 2.0 * std::abs(u);
    if (x >= 2.0) return 0.0;
    double v = (2.0 - x);
    double out = v * v * v;
    if (x < 1.0) {
        double w = (1.0 - x);
        out -= 4.0 * w * w * w;
    }
    return out / 6.0;
}

inline double bspline_d1(double u) {
    double s = u < 0 ? -1.0 : 1.0;
    double x = 2.0 * std::abs(u);
    if (x >= 2.0) return 0.0;
    double out = -3.0 * (2.0 - x) * (2.0 - x);
    if (x < 1.0) out += 12.0 * (1.0 - x) * (1.0 - x);
    return s * 2.0 * out / 6.0;
}

inline double bspline_d2(double u) {
    double x = 2.0 * std::abs(u);
    if (x >= 2.0) return 0.0;
    double out = 6.0 * (2.0 - x);
    if (x < 1.0) out -= 24.0 * (1.0 - x);
    return 4.0 * out / 6.0;
}

} // namespace besov_detail

/// Lower-bound estimator of the Besov-Holder norm sup lambda^(-gamma)
/// |g(phi^lambda_x)| over a fixed finite probe family: the B-spline bump and
/// its first r normalized derivatives, lambda in powers of two down to four
/// grid cells, centers on a coarse lattice.
inline double besov_norm(const GridField& g, double gamma, int r,
                         std::vector<double> lambda_levels = {}, std::size_t centers_per_axis = 32) {
    if (gamma > 0.0) throw std::invalid_argument("besov_norm: gamma must be <= 0");
    if (r <= int(-gamma) - 1) throw std::invalid_argument("besov_norm: need r > |gamma|");
    double h = g.spacing();
    double lambda_floor = 4.0 * h;
    if (lambda_levels.empty()) {
        for (double lam = 1.0; lam >= lambda_floor; lam *= 0.5) lambda_levels.push_back(lam);
        if (lambda_levels.empty()) lambda_levels.push_back(1.0);
    } else {
        for (double lam : lambda_levels)
            if (lam < lambda_floor)
                throw std::invalid_argument("besov_norm: lambda below grid resolution");
    }

    // normalized probes: C^2_b norm <= 1 on the unit ball
    struct Probe {
        double (*f)(double);
        double norm;
    };
    using namespace besov_detail;
    // norms of the scaled B-spline family estimated by a fine scan
    static const double n0 = [] {
        double m = 0;
        for (int i = -2000; i <= 2000; ++i) {
            double u = i / 2000.0;
            m = std::max({m, std::abs(bspline(u)), std::abs(bspline_d1(u)), std::abs(bspline_d2(u))});
        }
        return m;
    }();
    static const double n1 = [] {
        double m = 0;
        for (int i = -2000; i <= 2000; ++i) {
            double u = i / 2000.0;
            m = std::max({m, std::abs(bspline_d1(u)), std::abs(bspline_d2(u))});
        }
        return m; // the third derivative is bounded by the second's variation
    }();
    std::vector<Probe> probes = {{&bspline, n0}};
    if (r >= 1) probes.push_back({&bspline_d1, std::max(n0, n1)});
    if (r >= 2) probes.push_back({&bspline_d2, std::max(n0, n1)});

    std::size_t n = g.n_cells;
    std::size_t stride = std::max<std::size_t>(1, n / centers_per_axis);
    double best = 0.0;
    double hd = std::pow(h, g.dim);

    for (double lam : lambda_levels) {
        long reach = long(std::ceil(lam / h)) + 1;
        double weight = std::pow(lam, -gamma);
        for (const auto& pa : probes) {
            if (g.dim == 1) {
                for (std::size_t c = 0; c < n; c += stride) {
                    double x = g.coord(c);
                    double acc = 0.0;
                    for (long o = -reach; o <= reach; ++o) {
                        long idx = (long(c) + o) % long(n);
                        if (idx < 0) idx += long(n);
                        double y = x + double(o) * h;
                        acc += g.values[std::size_t(idx)] * pa.f((y - x) / lam) / pa.norm;
                    }
                    acc *= hd / lam; // lambda^-d scaling of the probe
                    best = std::max(best, weight * std::abs(acc));
                }
            } else {
                for (std::size_t ci = 0; ci < n; ci += stride)
                    for (std::size_t cj = 0; cj < n; cj += stride) {
                        double acc = 0.0;
                        for (long oi = -reach; oi <= reach; ++oi) {
                            long ii = (long(ci) + oi) % long(n);
                            if (ii < 0) ii += long(n);
                            double pu = pa.f(double(oi) * h / lam) / pa.norm;
                            if (pu == 0.0) continue;
                            for (long oj = -reach; oj <= reach; ++oj) {
                                long jj = (long(cj) + oj) % long(n);
                                if (jj < 0) jj += long(n);
                                acc += g.at(std::size_t(ii), std::size_t(jj)) * pu *
                                       bspline(double(oj) * h / lam) / n0;
                            }
                        }
                        acc *= hd / (lam * lam);
                        best = std::max(best, weight * std::abs(acc));
                    }
            }
        }
    }
    return best;
}

} // namespace stosew
