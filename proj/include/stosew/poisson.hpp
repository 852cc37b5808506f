#pragma once

#include <cstdint>
#include <stdexcept>

#include "stosew/parallel.hpp"
#include "stosew/path_bundle.hpp"
#include "stosew/rng.hpp"

namespace stosew {

/// Poisson point process on [t0, t1]: jump times from exponential spacings.
inline PathBundle sample_poisson(double intensity, const TimeGrid& grid, std::size_t n_paths,
                                 std::uint64_t seed) {
    if (intensity < 0.0) throw std::invalid_argument("sample_poisson: intensity must be >= 0");
    PathBundle b;
    b.grid = grid;
    b.dim = 1;
    b.n_paths = n_paths;
    b.poisson_intensity = intensity;
    b.poisson_jumps.assign(n_paths, {});
    if (intensity == 0.0) return b;
    parallel_for(n_paths, [&](std::size_t p) {
        auto rng = path_rng(seed, p, /*tag=*/0x504f4953);
        std::exponential_distribution<double> expo(intensity);
        double t = grid.t0;
        auto& js = b.poisson_jumps[p];
        for (;;) {
            t += expo(rng);
            if (t > grid.t1) break;
            js.push_back(t);
        }
    });
    return b;
}

} // namespace stosew
