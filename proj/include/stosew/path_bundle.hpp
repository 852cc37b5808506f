#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stosew/time_grid.hpp"

namespace stosew {

/// Simulated driving noise on a grid. Increments are row-major
/// (path, step, component); values are (path, point, component).
struct PathBundle {
    TimeGrid grid;
    std::size_t dim = 1;
    std::size_t n_paths = 0;

    // Gaussian increments dW_i ~ N(0, dt I_d); size n_paths * n_steps * dim.
    std::vector<double> w_increments;
    // Optional fBm values B^H(t_i); size n_paths * (n_steps+1) * dim.
    std::vector<double> fbm_values;
    std::optional<double> hurst;
    // Optional per-path sorted jump times in [t0, t1].
    std::vector<std::vector<double>> poisson_jumps;
    double poisson_intensity = 0.0;

    bool has_increments() const { return !w_increments.empty(); }
    bool has_fbm() const { return !fbm_values.empty(); }
    bool has_jumps() const { return !poisson_jumps.empty(); }

    double dw(std::size_t path, std::size_t step, std::size_t k) const {
        return w_increments[(path * grid.n_steps + step) * dim + k];
    }
    double fbm(std::size_t path, std::size_t point, std::size_t k) const {
        return fbm_values[(path * grid.n_points() + point) * dim + k];
    }
    std::span<const double> fbm_at(std::size_t path, std::size_t point) const {
        return {fbm_values.data() + (path * grid.n_points() + point) * dim, dim};
    }

    /// Brownian value W(t_i) accumulated from increments.
    double brownian(std::size_t path, std::size_t point, std::size_t k) const {
        double w = 0.0;
        for (std::size_t j = 0; j < point; ++j) w += dw(path, j, k);
        return w;
    }

    std::size_t jump_count(std::size_t path, double t) const {
        const auto& js = poisson_jumps[path];
        std::size_t c = 0;
        while (c < js.size() && js[c] <= t) ++c;
        return c;
    }

    /// Flat little-endian binary layout for caching.
    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("PathBundle: cannot open " + path);
        const char magic[8] = {'S', 'T', 'W', 'B', 'N', 'D', 'L', '1'};
        os.write(magic, 8);
        auto w64 = [&](std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); };
        auto wf = [&](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
        w64(dim);
        w64(grid.n_steps);
        w64(n_paths);
        wf(grid.t0);
        wf(grid.t1);
        wf(hurst ? *hurst : std::nan(""));
        w64(w_increments.size());
        os.write(reinterpret_cast<const char*>(w_increments.data()), w_increments.size() * 8);
        w64(fbm_values.size());
        os.write(reinterpret_cast<const char*>(fbm_values.data()), fbm_values.size() * 8);
    }

    static PathBundle load(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw std::runtime_error("PathBundle: cannot open " + path);
        char magic[8];
        is.read(magic, 8);
        if (std::memcmp(magic, "STWBNDL1", 8) != 0) throw std::runtime_error("PathBundle: bad magic");
        auto r64 = [&] { std::uint64_t v; is.read(reinterpret_cast<char*>(&v), 8); return v; };
        auto rf = [&] { double v; is.read(reinterpret_cast<char*>(&v), 8); return v; };
        PathBundle b;
        b.dim = r64();
        std::size_t n_steps = r64();
        b.n_paths = r64();
        double t0 = rf(), t1 = rf(), h = rf();
        b.grid = TimeGrid(t0, t1, n_steps);
        if (!std::isnan(h)) b.hurst = h;
        b.w_increments.resize(r64());
        is.read(reinterpret_cast<char*>(b.w_increments.data()), b.w_increments.size() * 8);
        b.fbm_values.resize(r64());
        is.read(reinterpret_cast<char*>(b.fbm_values.data()), b.fbm_values.size() * 8);
        if (!is) throw std::runtime_error("PathBundle: truncated file");
        return b;
    }
};

} // namespace stosew
