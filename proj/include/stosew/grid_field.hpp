#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stosew {

enum class FieldClass { bounded_continuous, lp, besov };

/// Spatial discretization of a function/distribution on the periodic box
/// [-L, L)^dim, dim in {1,2}, n_cells per axis a power of two.
struct GridField {
    int dim = 1;
    double half_width = 1.0; // L
    std::size_t n_cells = 0;
    std::vector<double> values; // row-major for dim = 2
    FieldClass declared_class = FieldClass::bounded_continuous;
    double class_p = 0.0;  // for lp
    double class_nu = 0.0; // for besov

    GridField() = default;
    GridField(int d, double L, std::size_t n) : dim(d), half_width(L), n_cells(n) {
        if (d != 1 && d != 2) throw std::invalid_argument("GridField: dim must be 1 or 2");
        if (n == 0 || (n & (n - 1)) != 0)
            throw std::invalid_argument("GridField: n_cells must be a power of two");
        values.assign(d == 1 ? n : n * n, 0.0);
    }

    double spacing() const { return 2.0 * half_width / double(n_cells); }
    double coord(std::size_t i) const { return -half_width + double(i) * spacing(); }

    double& at(std::size_t i) { return values[i]; }
    double& at(std::size_t i, std::size_t j) { return values[i * n_cells + j]; }
    double at(std::size_t i) const { return values[i]; }
    double at(std::size_t i, std::size_t j) const { return values[i * n_cells + j]; }

    /// Periodic linear interpolation (bilinear for dim = 2).
    double sample(double x, double y = 0.0) const {
        double h = spacing();
        auto wrap = [this](std::size_t i) { return i & (n_cells - 1); };
        double u = (x + half_width) / h;
        double fu = std::floor(u);
        long long iu = std::llround(fu) % (long long)n_cells;
        if (iu < 0) iu += (long long)n_cells;
        std::size_t i0 = std::size_t(iu);
        double tu = u - fu;
        if (dim == 1) {
            return (1.0 - tu) * values[i0] + tu * values[wrap(i0 + 1)];
        }
        double v = (y + half_width) / h;
        double fv = std::floor(v);
        long long jv = std::llround(fv);
        jv %= (long long)n_cells;
        if (jv < 0) jv += (long long)n_cells;
        std::size_t j0 = std::size_t(jv);
        double tv = v - fv;
        double a = (1.0 - tu) * at(i0, j0) + tu * at(wrap(i0 + 1), j0);
        double b = (1.0 - tu) * at(i0, wrap(j0 + 1)) + tu * at(wrap(i0 + 1), wrap(j0 + 1));
        return (1.0 - tv) * a + tv * b;
    }

    /// Periodic Catmull-Rom interpolation; preferred for smooth fields where
    /// the O(h^2) bias of linear interpolation matters. dim = 1 only.
    double sample_cubic(double x) const {
        if (dim != 1) throw std::invalid_argument("sample_cubic: dim 1 only");
        double h = spacing();
        double u = (x + half_width) / h;
        double fu = std::floor(u);
        long long iu = std::llround(fu) % (long long)n_cells;
        if (iu < 0) iu += (long long)n_cells;
        std::size_t i1 = std::size_t(iu);
        double t = u - fu;
        auto wrap = [this](long long i) {
            i %= (long long)n_cells;
            if (i < 0) i += (long long)n_cells;
            return std::size_t(i);
        };
        double p0 = values[wrap((long long)i1 - 1)];
        double p1 = values[i1];
        double p2 = values[wrap((long long)i1 + 1)];
        double p3 = values[wrap((long long)i1 + 2)];
        return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                              t * (3.0 * (p1 - p2) + p3 - p0)));
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s / double(values.size());
    }

    /// Discrete L^p norm (h^d sum |f|^p)^(1/p).
    double lp_norm(double p) const {
        double hd = std::pow(spacing(), dim);
        double s = 0.0;
        for (double v : values) s += std::pow(std::abs(v), p);
        return std::pow(hd * s, 1.0 / p);
    }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("GridField: cannot open " + path);
        const char magic[8] = {'S', 'T', 'W', 'F', 'L', 'D', '0', '1'};
        os.write(magic, 8);
        std::uint64_t d = dim, n = n_cells;
        os.write(reinterpret_cast<const char*>(&d), 8);
        os.write(reinterpret_cast<const char*>(&n), 8);
        os.write(reinterpret_cast<const char*>(&half_width), 8);
        os.write(reinterpret_cast<const char*>(values.data()), values.size() * 8);
    }

    static GridField load(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw std::runtime_error("GridField: cannot open " + path);
        char magic[8];
        is.read(magic, 8);
        if (std::memcmp(magic, "STWFLD01", 8) != 0) throw std::runtime_error("GridField: bad magic");
        std::uint64_t d, n;
        double L;
        is.read(reinterpret_cast<char*>(&d), 8);
        is.read(reinterpret_cast<char*>(&n), 8);
        is.read(reinterpret_cast<char*>(&L), 8);
        GridField f(int(d), L, std::size_t(n));
        is.read(reinterpret_cast<char*>(f.values.data()), f.values.size() * 8);
        if (!is) throw std::runtime_error("GridField: truncated file");
        return f;
    }

    /// One value per line for 1-d fields.
    static GridField from_csv(const std::string& path, double L) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("GridField: cannot open " + path);
        std::vector<double> vals;
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            vals.push_back(std::stod(line));
        }
        std::size_t n = vals.size();
        if (n == 0 || (n & (n - 1)) != 0)
            throw std::runtime_error("GridField: csv length must be a power of two");
        GridField f(1, L, n);
        f.values = std::move(vals);
        return f;
    }
};

/// Piecewise-constant-in-time family of fields f_r.
struct SpaceTimeField {
    std::vector<double> times;      // slice start times, increasing; empty = static
    std::vector<GridField> slices;  // at least one

    explicit SpaceTimeField(GridField f) { slices.push_back(std::move(f)); }
    SpaceTimeField(std::vector<double> ts, std::vector<GridField> fs)
        : times(std::move(ts)), slices(std::move(fs)) {
        if (slices.empty()) throw std::invalid_argument("SpaceTimeField: need a slice");
        if (!times.empty() && times.size() != slices.size())
            throw std::invalid_argument("SpaceTimeField: times/slices mismatch");
    }

    const GridField& at(double r) const {
        if (times.empty() || slices.size() == 1) return slices.front();
        std::size_t k = 0;
        while (k + 1 < times.size() && times[k + 1] <= r) ++k;
        return slices[k];
    }
};

} // namespace stosew
