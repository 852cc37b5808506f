#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace stosew {

/// Per-path vector samples, row-major (n_paths x dim).
struct Samples {
    std::size_t n_paths = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    Samples() = default;
    Samples(std::size_t paths, std::size_t d) : n_paths(paths), dim(d), data(paths * d, 0.0) {}

    std::span<double> path(std::size_t p) { return {data.data() + p * dim, dim}; }
    std::span<const double> path(std::size_t p) const { return {data.data() + p * dim, dim}; }
};

/// L_m norm estimate over paths: (mean |v|^m)^(1/m), Euclidean norm in dim.
inline double estimate_lm(const Samples& s, double m) {
    if (m < 1.0) throw std::invalid_argument("estimate_lm: m must be >= 1");
    if (s.n_paths == 0) throw std::invalid_argument("estimate_lm: empty sample");
    double acc = 0.0;
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        double sq = 0.0;
        for (std::size_t k = 0; k < s.dim; ++k) {
            double v = s.data[p * s.dim + k];
            sq += v * v;
        }
        acc += std::pow(sq, 0.5 * m);
    }
    return std::pow(acc / double(s.n_paths), 1.0 / m);
}

/// Componentwise mean over paths.
inline std::vector<double> mean_components(const Samples& s) {
    std::vector<double> mu(s.dim, 0.0);
    for (std::size_t p = 0; p < s.n_paths; ++p)
        for (std::size_t k = 0; k < s.dim; ++k) mu[k] += s.data[p * s.dim + k];
    for (auto& v : mu) v /= double(s.n_paths);
    return mu;
}

/// Componentwise standard error of the mean.
inline std::vector<double> stderr_components(const Samples& s) {
    auto mu = mean_components(s);
    std::vector<double> var(s.dim, 0.0);
    for (std::size_t p = 0; p < s.n_paths; ++p)
        for (std::size_t k = 0; k < s.dim; ++k) {
            double d = s.data[p * s.dim + k] - mu[k];
            var[k] += d * d;
        }
    for (auto& v : var) v = std::sqrt(v / double(s.n_paths - 1) / double(s.n_paths));
    return var;
}

inline double mean_scalar(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / double(v.size());
}

inline double stderr_scalar(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mu = mean_scalar(v);
    double var = 0.0;
    for (double x : v) var += (x - mu) * (x - mu);
    return std::sqrt(var / double(v.size() - 1) / double(v.size()));
}

} // namespace stosew
