#pragma once

#include <limits>

namespace stosew {

/// Regularity exponents of the singular-drift theory; p, q, or infinity
/// (use std::numeric_limits<double>::infinity(), 1/inf = 0).
struct Exponents {
    double tau_H = 0.0;   // 1 - H d/p - 1/q
    double gamma_H = 0.0; // 1 + H nu - 1/q
    bool weak_ok = false;   // H d/p + 1/q < 1/2        (tau > 1/2)
    bool strong_ok = false; // H d/p + 1/q < 1/2 - H    (tau > 1/2 + H)
    bool nuq_ok = false;    // gamma > 1/2
};

inline double inv_or_zero(double p) {
    return (p == std::numeric_limits<double>::infinity()) ? 0.0 : 1.0 / p;
}

inline Exponents exponents(double H, int d, double p, double q, double nu) {
    Exponents e;
    double ip = inv_or_zero(p), iq = inv_or_zero(q);
    e.tau_H = 1.0 - H * double(d) * ip - iq;
    e.gamma_H = 1.0 + H * nu - iq;
    e.weak_ok = H * double(d) * ip + iq < 0.5;
    e.strong_ok = H * double(d) * ip + iq < 0.5 - H;
    e.nuq_ok = e.gamma_H > 0.5;
    return e;
}

} // namespace stosew
