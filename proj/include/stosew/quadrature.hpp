#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace stosew {

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson on [a,b]; tol is an absolute tolerance target.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    if (!(b > a)) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Relative-tolerance wrapper: a coarse pass sets the absolute scale.
template <class F>
double integrate_adaptive_rel(const F& f, double a, double b, double rel_tol = 1e-10) {
    if (!(b > a)) return 0.0;
    double scale = 0.0;
    int n0 = 32;
    double h = (b - a) / n0;
    for (int i = 0; i < n0; ++i) scale += std::abs(f(a + (i + 0.5) * h)) * h;
    if (scale == 0.0) scale = 1.0;
    return integrate_adaptive(f, a, b, rel_tol * scale);
}

/// Gauss-Legendre nodes/weights on [0,1], n in {4, 8, 16}.
struct GaussLegendre {
    static const GaussLegendre& n8() {
        static const GaussLegendre g{
            {0.01985507175123188, 0.10166676129318664, 0.2372337950418355, 0.40828267875217505,
             0.59171732124782495, 0.7627662049581645, 0.89833323870681336, 0.98014492824876812},
            {0.05061426814518813, 0.11119051722668724, 0.15685332293894364, 0.18134189168918099,
             0.18134189168918099, 0.15685332293894364, 0.11119051722668724, 0.05061426814518813}};
        return g;
    }
    double node[8];
    double weight[8];
};

} // namespace stosew
