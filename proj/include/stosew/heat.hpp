#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "stosew/fft.hpp"
#include "stosew/grid_field.hpp"

namespace stosew {

/// Heat semigroup P_sigma on the periodic box: spectral multiplication by
/// exp(-sigma |xi|^2 / 2). sigma = 0 is the identity; the mean is preserved.
class HeatOp {
public:
    HeatOp(double sigma, int dim, double half_width, std::size_t n_cells)
        : sigma_(sigma), dim_(dim), half_width_(half_width), n_cells_(n_cells) {
        if (sigma < 0.0) throw std::invalid_argument("HeatOp: sigma must be >= 0");
    }

    double sigma() const { return sigma_; }

    GridField apply(const GridField& f) const {
        check(f);
        if (sigma_ == 0.0) return f;
        GridField out = f;
        spectral_multiply(out, [this](double xi2) { return std::exp(-0.5 * sigma_ * xi2); });
        return out;
    }

    /// Spectral gradient component: d/dx_axis of P_sigma f.
    GridField gradient(const GridField& f, int axis = 0) const {
        check(f);
        GridField out = f;
        spectral_multiply_complex(out, axis);
        return out;
    }

    static double frequency(std::size_t k, std::size_t n, double L) {
        // wavenumbers 2 pi k / (2L), signed
        long long kk = (long long)k;
        if (kk > (long long)(n / 2)) kk -= (long long)n;
        return M_PI * double(kk) / L;
    }

private:
    void check(const GridField& f) const {
        if (f.dim != dim_ || f.n_cells != n_cells_ || f.half_width != half_width_)
            throw std::invalid_argument("HeatOp: grid mismatch");
    }

    template <class Mult>
    void spectral_multiply(GridField& f, const Mult& mult) const {
        std::size_t n = n_cells_;
        if (dim_ == 1) {
            std::vector<std::complex<double>> a(n);
            for (std::size_t i = 0; i < n; ++i) a[i] = f.values[i];
            fft_inplace(a, false);
            for (std::size_t k = 0; k < n; ++k) {
                double xi = frequency(k, n, half_width_);
                a[k] *= mult(xi * xi);
            }
            fft_inplace(a, true);
            for (std::size_t i = 0; i < n; ++i) f.values[i] = a[i].real();
        } else {
            std::vector<std::complex<double>> a(n * n);
            for (std::size_t i = 0; i < n * n; ++i) a[i] = f.values[i];
            fft2(a, n, false);
            for (std::size_t ki = 0; ki < n; ++ki) {
                double xi = frequency(ki, n, half_width_);
                for (std::size_t kj = 0; kj < n; ++kj) {
                    double xj = frequency(kj, n, half_width_);
                    a[ki * n + kj] *= mult(xi * xi + xj * xj);
                }
            }
            fft2(a, n, true);
            for (std::size_t i = 0; i < n * n; ++i) f.values[i] = a[i].real();
        }
    }

    void spectral_multiply_complex(GridField& f, int axis) const {
        std::size_t n = n_cells_;
        double s = sigma_;
        if (dim_ == 1) {
            std::vector<std::complex<double>> a(n);
            for (std::size_t i = 0; i < n; ++i) a[i] = f.values[i];
            fft_inplace(a, false);
            for (std::size_t k = 0; k < n; ++k) {
                double xi = frequency(k, n, half_width_);
                if (2 * k == n) xi = 0.0; // Nyquist mode has no odd derivative
                a[k] *= std::complex<double>(0.0, xi) * std::exp(-0.5 * s * xi * xi);
            }
            fft_inplace(a, true);
            for (std::size_t i = 0; i < n; ++i) f.values[i] = a[i].real();
        } else {
            std::vector<std::complex<double>> a(n * n);
            for (std::size_t i = 0; i < n * n; ++i) a[i] = f.values[i];
            fft2(a, n, false);
            for (std::size_t ki = 0; ki < n; ++ki) {
                double xi = frequency(ki, n, half_width_);
                for (std::size_t kj = 0; kj < n; ++kj) {
                    double xj = frequency(kj, n, half_width_);
                    double xa = axis == 0 ? xi : xj;
                    if (axis == 0 && 2 * ki == n) xa = 0.0;
                    if (axis == 1 && 2 * kj == n) xa = 0.0;
                    a[ki * n + kj] *=
                        std::complex<double>(0.0, xa) * std::exp(-0.5 * s * (xi * xi + xj * xj));
                }
            }
            fft2(a, n, true);
            for (std::size_t i = 0; i < n * n; ++i) f.values[i] = a[i].real();
        }
    }

    static void fft2(std::vector<std::complex<double>>& a, std::size_t n, bool inverse) {
        std::vector<std::complex<double>> row(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) row[j] = a[i * n + j];
            fft_inplace(row, inverse);
            for (std::size_t j = 0; j < n; ++j) a[i * n + j] = row[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) row[i] = a[i * n + j];
            fft_inplace(row, inverse);
            for (std::size_t i = 0; i < n; ++i) a[i * n + j] = row[i];
        }
    }

    double sigma_;
    int dim_;
    double half_width_;
    std::size_t n_cells_;
};

inline GridField heat_apply(double sigma, const GridField& f) {
    return HeatOp(sigma, f.dim, f.half_width, f.n_cells).apply(f);
}

inline GridField heat_gradient(double sigma, const GridField& f, int axis = 0) {
    return HeatOp(sigma, f.dim, f.half_width, f.n_cells).gradient(f, axis);
}

/// Geometric ladder of smoothed fields with log-linear interpolation in
/// sigma; one FFT per level, cheap pointwise queries afterwards.
class HeatLadder {
public:
    HeatLadder(const GridField& f, double sigma_min, double sigma_max, std::size_t levels = 96)
        : base_(f) {
        if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
            throw std::invalid_argument("HeatLadder: need 0 < sigma_min < sigma_max");
        log_min_ = std::log(sigma_min);
        log_step_ = (std::log(sigma_max) - log_min_) / double(levels - 1);
        fields_.reserve(levels);
        for (std::size_t l = 0; l < levels; ++l) {
            double s = std::exp(log_min_ + log_step_ * double(l));
            fields_.push_back(heat_apply(s, f));
        }
    }

    /// P_sigma f at a point; sigma below the ladder floor falls back to the
    /// unsmoothed field, sigma above the top clamps. Smoothed fields are
    /// read with cubic interpolation (1-d) to keep the spatial bias far
    /// below the Monte Carlo scale.
    double value(double sigma, double x, double y = 0.0) const {
        if (sigma <= 0.0) return base_.sample(x, y);
        double u = (std::log(sigma) - log_min_) / log_step_;
        if (u <= 0.0) {
            // blend to the raw field below the floor
            double t = sigma / std::exp(log_min_);
            return (1.0 - t) * base_.sample(x, y) + t * read(fields_.front(), x, y);
        }
        std::size_t l = std::size_t(u);
        if (l + 1 >= fields_.size()) return read(fields_.back(), x, y);
        double t = u - double(l);
        return (1.0 - t) * read(fields_[l], x, y) + t * read(fields_[l + 1], x, y);
    }

private:
    static double read(const GridField& f, double x, double y) {
        return f.dim == 1 ? f.sample_cubic(x) : f.sample(x, y);
    }

    GridField base_;
    double log_min_ = 0.0, log_step_ = 1.0;
    std::vector<GridField> fields_;
};

} // namespace stosew
