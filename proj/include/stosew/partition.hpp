#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "stosew/time_grid.hpp"

namespace stosew {

/// Strictly increasing time points with declared endpoints.
struct Partition {
    std::vector<double> points;

    Partition() = default;
    explicit Partition(std::vector<double> pts) : points(std::move(pts)) {
        if (points.size() < 2) throw std::invalid_argument("Partition: need >= 2 points");
        for (std::size_t i = 0; i + 1 < points.size(); ++i)
            if (!(points[i] < points[i + 1]))
                throw std::invalid_argument("Partition: points must be strictly increasing");
    }

    double S() const { return points.front(); }
    double T() const { return points.back(); }
    std::size_t n_intervals() const { return points.size() - 1; }

    double mesh() const {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < points.size(); ++i)
            m = std::max(m, points[i + 1] - points[i]);
        return m;
    }

    static Partition dyadic(double s, double t, unsigned level) {
        std::size_t n = std::size_t(1) << level;
        std::vector<double> pts(n + 1);
        for (std::size_t i = 0; i <= n; ++i) pts[i] = s + (t - s) * double(i) / double(n);
        pts.back() = t;
        return Partition(std::move(pts));
    }

    /// Grid indices of the points; throws when any point is off the grid.
    std::vector<std::size_t> to_indices(const TimeGrid& grid) const {
        std::vector<std::size_t> idx(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) idx[i] = grid.index_of(points[i]);
        return idx;
    }
};

} // namespace stosew
