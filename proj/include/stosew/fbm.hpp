#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "stosew/interp.hpp"
#include "stosew/parallel.hpp"
#include "stosew/path_bundle.hpp"
#include "stosew/quadrature.hpp"
#include "stosew/rng.hpp"
#include "stosew/stats.hpp"
#include "stosew/time_grid.hpp"

namespace stosew {

/// Scalar factor of the fBm covariance block: (t^2H + s^2H - |t-s|^2H)/2.
inline double fbm_covariance(double hurst, double s, double t) {
    if (hurst <= 0.0 || hurst >= 1.0) throw std::domain_error("fbm_covariance: H must be in (0,1)");
    if (s < 0.0 || t < 0.0) throw std::domain_error("fbm_covariance: times must be >= 0");
    double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

namespace fbm_detail {

inline double c_H(double H) {
    return std::sqrt(2.0 * H * std::tgamma(1.5 - H) /
                     (std::tgamma(H + 0.5) * std::tgamma(2.0 - 2.0 * H)));
}

// G(z) = int_1^z y^(H-3/2) (y-1)^(H-1/2) dy. Near y = 1 the substitution
// y = 1 + v^2 removes the endpoint singularity; the tail beyond y = 2 is
// integrated in u = log y, where the integrand decays exponentially.
inline double G_quadrature(double H, double z, double rel_tol = 1e-10) {
    if (z <= 1.0) return 0.0;
    double head_end = std::min(z, 2.0);
    double vmax = std::sqrt(head_end - 1.0);
    auto f = [H](double v) { return 2.0 * std::pow(1.0 + v * v, H - 1.5) * std::pow(v, 2.0 * H); };
    double total = integrate_adaptive_rel(f, 0.0, vmax, rel_tol);
    if (z > 2.0) {
        auto g = [H](double u) {
            double y = std::exp(u);
            return std::pow(y, 2.0 * H - 1.0) * std::pow(1.0 - 1.0 / y, H - 0.5);
        };
        total += integrate_adaptive_rel(g, std::log(2.0), std::log(z), rel_tol);
    }
    return total;
}

inline double G_infinity(double H, double rel_tol = 1e-11) {
    // tail beyond z decays like z^(2H-2); 1e12 leaves a negligible remainder
    return G_quadrature(H, 1e12, rel_tol);
}

} // namespace fbm_detail

/// Volterra kernel K_H(t,s) of the fBm representation, 0 < s < t.
/// The inner integral is evaluated by adaptive quadrature at 1e-10 relative
/// tolerance with an endpoint substitution.
inline double kernel_KH(double hurst, double t, double s) {
    if (hurst <= 0.0 || hurst > 0.5) throw std::domain_error("kernel_KH: H must be in (0,1/2]");
    if (s <= 0.0 || s >= t) throw std::domain_error("kernel_KH: need 0 < s < t");
    if (hurst == 0.5) return 1.0;
    double c = fbm_detail::c_H(hurst);
    double lead = std::pow(t / s, hurst - 0.5) * std::pow(t - s, hurst - 0.5);
    double g = fbm_detail::G_quadrature(hurst, t / s);
    return c * (lead + (0.5 - hurst) * std::pow(s, hurst - 0.5) * g);
}

/// Tabulated kernel quantities for one H. K_H(t,s) factors through the
/// one-variable function G(t/s), so a single log-spaced table makes kernel
/// evaluations cheap enough for O(n^2) weight matrices.
class FbmKernel {
public:
    explicit FbmKernel(double hurst, std::size_t table_size = 4096) : H_(hurst) {
        if (H_ <= 0.0 || H_ > 0.5) throw std::domain_error("FbmKernel: H must be in (0,1/2]");
        cH_ = (H_ == 0.5) ? 1.0 : fbm_detail::c_H(H_);
        if (H_ == 0.5) return;
        Ginf_ = fbm_detail::G_infinity(H_);
        // store Ghat(z) = G(z) * (z-1)^-(H+1/2) on a uniform log(z-1) grid;
        // Ghat is smooth at both ends (-> 1/(H+1/2) at z=1, -> 0 at infinity)
        lo_ = std::log(1e-7);
        hi_ = std::log(1e9);
        double step = (hi_ - lo_) / double(table_size - 1);
        std::vector<double> vals(table_size);
        for (std::size_t i = 0; i < table_size; ++i) {
            double z = 1.0 + std::exp(lo_ + step * double(i));
            vals[i] = fbm_detail::G_quadrature(H_, z) * std::pow(z - 1.0, -(H_ + 0.5));
        }
        ghat_ = UniformPchip(lo_, step, std::move(vals));
    }

    double hurst() const { return H_; }
    double c() const { return cH_; }
    double G_inf() const { return Ginf_; }

    double G(double z) const {
        if (H_ == 0.5 || z <= 1.0) return 0.0;
        double lz = std::log(z - 1.0);
        if (lz >= hi_) return Ginf_;
        return ghat_(lz) * std::pow(z - 1.0, H_ + 0.5);
    }

    double K(double t, double s) const {
        if (H_ == 0.5) return 1.0;
        double lead = std::pow(t / s, H_ - 0.5) * std::pow(t - s, H_ - 0.5);
        return cH_ * (lead + (0.5 - H_) * std::pow(s, H_ - 0.5) * G(t / s));
    }

    /// Cell average of K(t, .) over [a,b], b <= t: the singular factor
    /// (t-s)^(H-1/2) is integrated exactly, the smooth factors are frozen at
    /// the cell midpoint.
    double K_cell(double t, double a, double b) const {
        if (H_ == 0.5) return 1.0;
        double m = 0.5 * (a + b);
        double p = H_ + 0.5;
        double lead_avg = (std::pow(t - a, p) - std::pow(t - b, p)) / (p * (b - a));
        double lead = std::pow(t / m, H_ - 0.5) * lead_avg;
        return cH_ * (lead + (0.5 - H_) * std::pow(m, H_ - 0.5) * G(t / m));
    }

    /// Quadrature cell average for cells near s = 0, where the s^(H-1/2)
    /// factor is itself singular and midpoint freezing is too crude. The
    /// s = 0 endpoint is absorbed by the u = s^(H+1/2) substitution.
    double K_cell_quadrature(double t, double a, double b, double rel_tol = 1e-8) const {
        if (H_ == 0.5) return 1.0;
        if (a > 0.0) {
            auto f = [&](double s) { return K(t, s); };
            return integrate_adaptive_rel(f, a, b, rel_tol) / (b - a);
        }
        double p = H_ + 0.5;
        auto f = [&](double u) {
            double s = std::pow(u, 1.0 / p);
            if (s <= 0.0) return cH_ * (0.5 - H_) * Ginf_ / p;
            return K(t, s) * std::pow(s, 0.5 - H_) / p;
        };
        return integrate_adaptive_rel(f, 0.0, std::pow(b, p), rel_tol) / (b - a);
    }

    /// Cell second moment (1/(b-a)) int_a^b K(t,s)^2 ds with the singular
    /// (t-s) powers integrated exactly and the smooth factors frozen at the
    /// midpoint. Root-mean-square weights built from this keep the scheme's
    /// one-step and cumulative variances quadrature-exact, which cell means
    /// cannot do for small H (Jensen gap at the singular cells).
    double K2_cell(double t, double a, double b) const {
        if (H_ == 0.5) return 1.0;
        double m = 0.5 * (a + b), w = b - a;
        double twoH = 2.0 * H_, p = H_ + 0.5;
        double g = G(t / m);
        double lead2 = cH_ * cH_ * std::pow(t / m, twoH - 1.0) *
                       (std::pow(t - a, twoH) - std::pow(t - b, twoH)) / (twoH * w);
        double bterm = cH_ * (0.5 - H_) * std::pow(m, H_ - 0.5) * g;
        double cross = 2.0 * cH_ * std::pow(t / m, H_ - 0.5) * bterm *
                       (std::pow(t - a, p) - std::pow(t - b, p)) / (p * w);
        return lead2 + cross + bterm * bterm;
    }

    /// Quadrature version of K2_cell for cells under the s -> 0 singularity.
    double K2_cell_quadrature(double t, double a, double b, double rel_tol = 1e-8) const {
        if (H_ == 0.5) return 1.0;
        if (a > 0.0) {
            auto f = [&](double s) { double k = K(t, s); return k * k; };
            return integrate_adaptive_rel(f, a, b, rel_tol) / (b - a);
        }
        double twoH = 2.0 * H_;
        double q0 = cH_ * (0.5 - H_) * Ginf_;
        auto f = [&](double u) {
            double s = std::pow(u, 1.0 / twoH);
            if (s <= 0.0) return q0 * q0 * std::pow(t, twoH - 1.0) / twoH;
            double k = K(t, s);
            return k * k * std::pow(s, 1.0 - twoH) / twoH;
        };
        return integrate_adaptive_rel(f, 0.0, std::pow(b, twoH), rel_tol) / (b - a);
    }

    /// sigma_H^2(s,t) = int_s^t K(t,r)^2 dr by adaptive quadrature with
    /// endpoint substitutions absorbing the r -> t (and r -> 0) singularities.
    double sigma2(double s, double t, double rel_tol = 1e-9) const {
        if (s < 0.0 || s > t) throw std::domain_error("sigma2: need 0 <= s <= t");
        if (s == t) return 0.0;
        if (H_ == 0.5) return t - s;
        double mid = 0.5 * (s + t);
        double total = 0.0;
        // right part: y = (t-r)^(2H) absorbs the (t-r)^(2H-1) singularity
        {
            double twoH = 2.0 * H_;
            auto f = [&](double y) {
                double r = t - std::pow(y, 1.0 / twoH);
                if (r >= t) return cH_ * cH_ / twoH;
                double k = K(t, r);
                return k * k * std::pow(t - r, 1.0 - twoH) / twoH;
            };
            total += integrate_adaptive_rel(f, 0.0, std::pow(t - mid, twoH), rel_tol);
        }
        // left part: smooth unless s == 0, where y = r^(2H) absorbs r^(2H-1)
        if (s > 0.0) {
            auto f = [&](double r) { double k = K(t, r); return k * k; };
            total += integrate_adaptive_rel(f, s, mid, rel_tol);
        } else {
            double twoH = 2.0 * H_;
            double q0 = cH_ * (0.5 - H_) * Ginf_;
            auto f = [&](double y) {
                double r = std::pow(y, 1.0 / twoH);
                if (r <= 0.0) return q0 * q0 * std::pow(t, 2.0 * H_ - 1.0) / twoH;
                double k = K(t, r);
                return k * k * std::pow(r, 1.0 - twoH) / twoH;
            };
            total += integrate_adaptive_rel(f, 0.0, std::pow(mid, twoH), rel_tol);
        }
        return total;
    }

private:
    double H_;
    double cH_ = 1.0;
    double Ginf_ = 0.0;
    double lo_ = 0.0, hi_ = 1.0;
    UniformPchip ghat_;
};

/// Conditional standard deviation sigma_H(s,t) of fBm given its past at s.
inline double sigma_H(double hurst, double s, double t) {
    if (hurst <= 0.0 || hurst > 0.5) throw std::domain_error("sigma_H: H must be in (0,1/2]");
    FbmKernel k(hurst);
    return std::sqrt(k.sigma2(s, t));
}

/// Grid-level fBm model: cell-averaged Volterra weights, their square prefix
/// sums (the discrete conditional variances), and on demand the covariance
/// Cholesky factor for exact sampling.
class FbmModel {
public:
    FbmModel(double hurst, const TimeGrid& grid) : H_(hurst), grid_(grid), kernel_(hurst) {
        if (grid_.t0 != 0.0) throw std::invalid_argument("FbmModel: grid must start at 0");
    }

    double hurst() const { return H_; }
    const TimeGrid& grid() const { return grid_; }
    const FbmKernel& kernel() const { return kernel_; }

    /// Volterra weight w(t_i, cell_j), j < i: the root mean square of
    /// K(t_i, .) over the cell, so every (conditional) variance of the
    /// scheme equals the corresponding integral of K^2 exactly.
    double kbar(std::size_t i, std::size_t j) const {
        ensure_weights();
        return kbar_[row_off_[i] + j];
    }

    /// Discrete conditional variance sum_{a<=j<b} kbar(i,j)^2 dt, for the
    /// value at t_i conditioned between grid indices a and b (a <= b <= i).
    double sigma2_disc(std::size_t a, std::size_t b, std::size_t i) const {
        ensure_prefix2();
        return prefix2_[row_off_[i] + i + b] - prefix2_[row_off_[i] + i + a];
    }

    /// Scheme variance at t_i (equals sigma2_disc(0, i, i)).
    double scheme_variance(std::size_t i) const {
        double dt = grid_.dt();
        double v = 0.0;
        ensure_weights();
        for (std::size_t j = 0; j < i; ++j) {
            double w = kbar_[row_off_[i] + j];
            v += w * w * dt;
        }
        return v;
    }

    /// Scheme covariance between values at t_a and t_b.
    double scheme_covariance(std::size_t a, std::size_t b) const {
        ensure_weights();
        double dt = grid_.dt();
        std::size_t m = std::min(a, b);
        double v = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            v += kbar_[row_off_[a] + j] * kbar_[row_off_[b] + j] * dt;
        return v;
    }

    /// Lower-triangular factor of the exact covariance over grid points with
    /// t > 0. Jitter of 1e-12 * max diagonal is applied once if needed.
    const std::vector<double>& cholesky() const {
        if (!chol_.empty()) return chol_;
        std::size_t n = grid_.n_steps; // points t_1..t_n
        std::vector<double> c(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                c[i * n + j] = fbm_covariance(H_, grid_.time(i + 1), grid_.time(j + 1));
        if (!try_cholesky(c, n)) {
            double max_diag = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                max_diag = std::max(max_diag, fbm_covariance(H_, grid_.time(i + 1), grid_.time(i + 1)));
            for (std::size_t i = 0; i < n; ++i)
                c[i * n + i] = fbm_covariance(H_, grid_.time(i + 1), grid_.time(i + 1)) + 1e-12 * max_diag;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < i; ++j)
                    c[i * n + j] = fbm_covariance(H_, grid_.time(i + 1), grid_.time(j + 1));
            if (!try_cholesky(c, n))
                throw std::runtime_error("FbmModel: covariance factorization failed after regularization");
        }
        chol_ = std::move(c);
        return chol_;
    }

private:
    static bool try_cholesky(std::vector<double>& a, std::size_t n) {
        // in-place lower Cholesky; upper part is overwritten with zeros
        std::vector<double> m = a;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = m[i * n + j];
                for (std::size_t k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
                if (i == j) {
                    if (s <= 0.0) return false;
                    m[i * n + i] = std::sqrt(s);
                } else {
                    m[i * n + j] = s / m[j * n + j];
                }
            }
            for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = 0.0;
        }
        a = std::move(m);
        return true;
    }

    void ensure_weights() const {
        if (!kbar_.empty()) return;
        std::size_t n = grid_.n_steps;
        row_off_.assign(n + 1, 0);
        for (std::size_t i = 1; i <= n; ++i) row_off_[i] = row_off_[i - 1] + (i - 1);
        kbar_.assign(row_off_[n] + n, 0.0);
        // the first few cells sit under the s -> 0 singularity of the kernel
        // and get the quadrature second moment; elsewhere the frozen-factor
        // scheme is accurate and cheap
        const std::size_t n_exact = 16;
        parallel_for(n, [&](std::size_t ii) {
            std::size_t i = ii + 1;
            double ti = grid_.time(i);
            for (std::size_t j = 0; j < i; ++j) {
                double a = grid_.time(j), b = grid_.time(j + 1);
                double m2 = (j < n_exact && j + 1 < i) ? kernel_.K2_cell_quadrature(ti, a, b)
                                                       : kernel_.K2_cell(ti, a, b);
                kbar_[row_off_[i] + j] = std::sqrt(m2);
            }
        });
    }

    void ensure_prefix2() const {
        if (!prefix2_.empty()) return;
        ensure_weights();
        std::size_t n = grid_.n_steps;
        double dt = grid_.dt();
        // row i holds i+1 prefix values, offset row_off_[i] + i
        prefix2_.assign(row_off_[n] + n + n + 1, 0.0);
        for (std::size_t i = 1; i <= n; ++i) {
            double acc = 0.0;
            prefix2_[row_off_[i] + i] = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                double w = kbar_[row_off_[i] + j];
                acc += w * w * dt;
                prefix2_[row_off_[i] + i + j + 1] = acc;
            }
        }
    }

    double H_;
    TimeGrid grid_;
    FbmKernel kernel_;
    mutable std::vector<std::size_t> row_off_;
    mutable std::vector<double> kbar_;
    mutable std::vector<double> prefix2_;
    mutable std::vector<double> chol_;
};

/// Brownian increments dW_i ~ N(0, dt I_d), one RNG stream per path.
inline PathBundle sample_brownian(const TimeGrid& grid, std::size_t dim, std::size_t n_paths,
                                  std::uint64_t seed) {
    if (n_paths < 1) throw std::invalid_argument("sample_brownian: n_paths must be >= 1");
    PathBundle b;
    b.grid = grid;
    b.dim = dim;
    b.n_paths = n_paths;
    b.w_increments.assign(n_paths * grid.n_steps * dim, 0.0);
    double sdt = std::sqrt(grid.dt());
    parallel_for(n_paths, [&](std::size_t p) {
        auto rng = path_rng(seed, p);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double* out = b.w_increments.data() + p * grid.n_steps * dim;
        for (std::size_t i = 0; i < grid.n_steps * dim; ++i) out[i] = sdt * gauss(rng);
    });
    return b;
}

/// Exact fBm law on the grid points via covariance Cholesky factorization.
inline PathBundle sample_fbm_cholesky(double hurst, const TimeGrid& grid, std::size_t dim,
                                      std::size_t n_paths, std::uint64_t seed) {
    if (hurst <= 0.0 || hurst >= 1.0) throw std::domain_error("sample_fbm_cholesky: H in (0,1)");
    PathBundle b;
    b.grid = grid;
    b.dim = dim;
    b.n_paths = n_paths;
    b.hurst = hurst;
    std::size_t np = grid.n_points();
    b.fbm_values.assign(n_paths * np * dim, 0.0);

    std::size_t n = grid.n_steps;
    std::vector<double> chol(n * n);
    {
        // direct covariance factorization (independent of the Volterra route)
        std::vector<double> c(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                c[i * n + j] = fbm_covariance(hurst, grid.time(i + 1), grid.time(j + 1));
        bool ok = [&] {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    double s = c[i * n + j];
                    for (std::size_t k = 0; k < j; ++k) s -= c[i * n + k] * c[j * n + k];
                    if (i == j) {
                        if (s <= 0.0) return false;
                        c[i * n + i] = std::sqrt(s);
                    } else
                        c[i * n + j] = s / c[j * n + j];
                }
            return true;
        }();
        if (!ok) {
            double max_diag = std::pow(grid.t1, 2.0 * hurst);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j <= i; ++j)
                    c[i * n + j] = fbm_covariance(hurst, grid.time(i + 1), grid.time(j + 1)) +
                                   (i == j ? 1e-12 * max_diag : 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    double s = c[i * n + j];
                    for (std::size_t k = 0; k < j; ++k) s -= c[i * n + k] * c[j * n + k];
                    if (i == j) {
                        if (s <= 0.0)
                            throw std::runtime_error("sample_fbm_cholesky: factorization failed");
                        c[i * n + i] = std::sqrt(s);
                    } else
                        c[i * n + j] = s / c[j * n + j];
                }
        }
        chol = std::move(c);
    }

    parallel_for(n_paths, [&](std::size_t p) {
        auto rng = path_rng(seed, p);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> z(n);
        for (std::size_t k = 0; k < dim; ++k) {
            for (std::size_t i = 0; i < n; ++i) z[i] = gauss(rng);
            for (std::size_t i = 0; i < n; ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j <= i; ++j) v += chol[i * n + j] * z[j];
                b.fbm_values[(p * np + i + 1) * dim + k] = v;
            }
        }
    });
    return b;
}

/// Volterra-route fBm: deterministic linear map of Brownian increments with
/// cell-averaged kernel weights. Increments are retained so conditional
/// means stay computable.
inline PathBundle sample_fbm_volterra(double hurst, const TimeGrid& grid, std::size_t dim,
                                      std::size_t n_paths, std::uint64_t seed,
                                      const FbmModel* model = nullptr) {
    if (hurst <= 0.0 || hurst > 0.5)
        throw std::domain_error("sample_fbm_volterra: H must be in (0,1/2]");
    std::unique_ptr<FbmModel> own;
    if (!model) {
        own = std::make_unique<FbmModel>(hurst, grid);
        model = own.get();
    }
    PathBundle b = sample_brownian(grid, dim, n_paths, seed);
    b.hurst = hurst;
    std::size_t np = grid.n_points(), n = grid.n_steps;
    b.fbm_values.assign(n_paths * np * dim, 0.0);
    model->kbar(1, 0); // force weight construction before the parallel region
    parallel_for(n_paths, [&](std::size_t p) {
        for (std::size_t k = 0; k < dim; ++k) {
            for (std::size_t i = 1; i <= n; ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j < i; ++j) v += model->kbar(i, j) * b.dw(p, j, k);
                b.fbm_values[(p * np + i) * dim + k] = v;
            }
        }
    });
    return b;
}

/// E^{F_s} B^H_t for a Volterra bundle: sum of weights over cells before s.
inline Samples conditional_mean_fbm(const PathBundle& bundle, const FbmModel& model, double s,
                                    double t) {
    if (!bundle.has_increments())
        throw std::invalid_argument("conditional_mean_fbm: bundle lacks Brownian increments");
    std::size_t is = bundle.grid.index_of(s), it = bundle.grid.index_of(t);
    if (is > it) throw std::invalid_argument("conditional_mean_fbm: need s <= t");
    Samples out(bundle.n_paths, bundle.dim);
    parallel_for(bundle.n_paths, [&](std::size_t p) {
        for (std::size_t k = 0; k < bundle.dim; ++k) {
            double v = 0.0;
            for (std::size_t j = 0; j < is; ++j) v += model.kbar(it, j) * bundle.dw(p, j, k);
            out.data[p * bundle.dim + k] = v;
        }
    });
    return out;
}

} // namespace stosew
