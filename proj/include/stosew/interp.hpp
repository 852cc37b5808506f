#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stosew {

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes) on a uniform
/// grid. Queries outside [x0, x0+(n-1)h] clamp to the endpoint values.
class UniformPchip {
public:
    UniformPchip() = default;
    UniformPchip(double x0, double h, std::vector<double> y) : x0_(x0), h_(h), y_(std::move(y)) {
        std::size_t n = y_.size();
        if (n < 2) throw std::invalid_argument("UniformPchip: need >= 2 nodes");
        d_.assign(n, 0.0);
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / h_;
        d_[0] = delta[0];
        d_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0)
                d_[i] = 0.0;
            else
                d_[i] = 2.0 * delta[i - 1] * delta[i] / (delta[i - 1] + delta[i]); // harmonic mean
        }
    }

    double operator()(double x) const {
        std::size_t n = y_.size();
        double u = (x - x0_) / h_;
        if (u <= 0.0) return y_.front();
        if (u >= double(n - 1)) return y_.back();
        std::size_t i = static_cast<std::size_t>(u);
        double t = u - double(i);
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        double h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t);
        double h11 = t * t * (t - 1);
        return h00 * y_[i] + h_ * h10 * d_[i] + h01 * y_[i + 1] + h_ * h11 * d_[i + 1];
    }

private:
    double x0_ = 0.0, h_ = 1.0;
    std::vector<double> y_, d_;
};

} // namespace stosew
