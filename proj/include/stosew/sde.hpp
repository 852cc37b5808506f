#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "stosew/exponents.hpp"
#include "stosew/fbm.hpp"
#include "stosew/grid_field.hpp"
#include "stosew/heat.hpp"
#include "stosew/rate.hpp"

namespace stosew {

/// Gauss-Hermite smoothing of a callable: P_sigma b(x) = E b(x + sqrt(sigma) Z),
/// 20 nodes; adequate for bounded piecewise-smooth drifts.
class GaussHermite20 {
public:
    static const GaussHermite20& get() {
        static GaussHermite20 g;
        return g;
    }
    // probabilist nodes z_i and weights summing to 1
    std::vector<double> z, w;

private:
    GaussHermite20() {
        // physicists' Gauss-Hermite (n=20) rescaled: z = sqrt(2) x, w/sqrt(pi)
        const double xs[10] = {0.2453407083009012, 0.7374737285453944, 1.2340762153953230,
                               1.7385377121165862, 2.2549740020892757, 2.7888060584281305,
                               3.3478545673832163, 3.9447640401156252, 4.6036824495507442,
                               5.3874808900112328};
        const double ws[10] = {4.622436696006101e-01, 2.866755053628341e-01, 1.090172060200233e-01,
                               2.481052088746361e-02, 3.243773342237862e-03, 2.283386360163540e-04,
                               7.802556478532063e-06, 1.086069370769282e-07, 4.399340992273181e-10,
                               2.229393645534151e-13};
        const double sqrt_pi = std::sqrt(M_PI);
        for (int i = 9; i >= 0; --i) {
            z.push_back(-std::sqrt(2.0) * xs[i]);
            w.push_back(ws[i] / sqrt_pi);
        }
        for (int i = 0; i < 10; ++i) {
            z.push_back(std::sqrt(2.0) * xs[i]);
            w.push_back(ws[i] / sqrt_pi);
        }
    }
};

/// Drift b(t,x): either a closed-form callable (any d, optional height
/// truncation) or per-component grid fields with a declared (p,q) class.
struct DriftSpec {
    enum class Kind { zero, callable, grid };
    Kind kind = Kind::zero;
    std::size_t d = 1;

    // callable route
    std::function<void(double t, std::span<const double> x, std::span<double> out)> fn;
    double truncation = 0.0; // clip |b_k| at this height when > 0

    // grid route (d = 1 or 2, one field per component)
    std::vector<SpaceTimeField> fields;
    double p = std::numeric_limits<double>::infinity();
    double q = std::numeric_limits<double>::infinity();

    static DriftSpec zero(std::size_t dim) {
        DriftSpec s;
        s.kind = Kind::zero;
        s.d = dim;
        return s;
    }
    static DriftSpec closed_form(
        std::size_t dim,
        std::function<void(double, std::span<const double>, std::span<double>)> f,
        double truncation = 0.0) {
        DriftSpec s;
        s.kind = Kind::callable;
        s.d = dim;
        s.fn = std::move(f);
        s.truncation = truncation;
        return s;
    }
};

/// Mollified drift evaluator: b_delta = P_delta b with delta tied to the
/// step, delta = dt^(2H). Closed forms are smoothed by Gauss-Hermite
/// quadrature per axis; grid fields are smoothed once spectrally.
class MollifiedDrift {
public:
    MollifiedDrift(const DriftSpec& spec, double delta) : spec_(spec), delta_(delta) {
        if (spec.kind == DriftSpec::Kind::grid) {
            for (const auto& stf : spec.fields) {
                std::vector<GridField> slices;
                for (const auto& slice : stf.slices) slices.push_back(heat_apply(delta, slice));
                smoothed_.emplace_back(stf.times, std::move(slices));
            }
        }
    }

    void eval(double t, std::span<const double> x, std::span<double> out) const {
        switch (spec_.kind) {
            case DriftSpec::Kind::zero:
                for (auto& v : out) v = 0.0;
                return;
            case DriftSpec::Kind::callable: {
                const auto& gh = GaussHermite20::get();
                double sd = std::sqrt(delta_);
                std::vector<double> shifted(x.begin(), x.end());
                std::vector<double> tmp(out.size());
                for (auto& v : out) v = 0.0;
                if (spec_.d == 1) {
                    for (std::size_t i = 0; i < gh.z.size(); ++i) {
                        shifted[0] = x[0] + sd * gh.z[i];
                        spec_.fn(t, shifted, tmp);
                        out[0] += gh.w[i] * clip(tmp[0]);
                    }
                } else {
                    // tensor GH in d dims is overkill at desk scale; smooth
                    // axis by axis (exact for additively separable drifts,
                    // O(delta) consistent otherwise, same as the scheme)
                    for (std::size_t axis = 0; axis < spec_.d; ++axis) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < gh.z.size(); ++i) {
                            for (std::size_t k = 0; k < spec_.d; ++k) shifted[k] = x[k];
                            shifted[axis] = x[axis] + sd * gh.z[i];
                            spec_.fn(t, shifted, tmp);
                            acc += gh.w[i] * clip(tmp[axis]);
                        }
                        out[axis] = acc;
                    }
                }
                return;
            }
            case DriftSpec::Kind::grid: {
                for (std::size_t k = 0; k < smoothed_.size(); ++k) {
                    const GridField& f = smoothed_[k].at(t);
                    out[k] = f.dim == 1 ? f.sample(x[0]) : f.sample(x[0], x[1]);
                }
                return;
            }
        }
    }

private:
    double clip(double v) const {
        if (spec_.truncation <= 0.0) return v;
        return std::max(-spec_.truncation, std::min(spec_.truncation, v));
    }
    const DriftSpec& spec_;
    double delta_;
    std::vector<SpaceTimeField> smoothed_;
};

struct SdeConfig {
    double hurst = 0.3;
    std::vector<double> x0;
    TimeGrid grid;
    DriftSpec drift;
    int drift_dim_for_flags = 1;
    Exponents flags; // filled by solve from (H, d, p, q)
};

struct SdePaths {
    TimeGrid grid;
    std::size_t dim = 1;
    std::size_t n_paths = 0;
    std::vector<double> x;   // (path, point, comp)
    std::vector<double> psi; // X - B^H, same layout
    const double& X(std::size_t p, std::size_t i, std::size_t k) const {
        return x[(p * (grid.n_steps + 1) + i) * dim + k];
    }
    const double& Psi(std::size_t p, std::size_t i, std::size_t k) const {
        return psi[(p * (grid.n_steps + 1) + i) * dim + k];
    }
};

/// Euler-Maruyama with step-frozen mollified drift b_delta = P_delta b,
/// delta = dt^(2H); the driving fBm comes from the supplied Volterra bundle
/// (shared bundles give same-noise coupling).
inline SdePaths solve_singular_sde(SdeConfig& cfg, const PathBundle& bundle) {
    std::size_t d = bundle.dim;
    if (cfg.x0.size() != d) throw std::invalid_argument("solve_singular_sde: x0 size mismatch");
    if (!bundle.has_fbm()) throw std::invalid_argument("solve_singular_sde: bundle lacks fbm values");
    double dt = cfg.grid.dt();
    double delta = std::pow(dt, 2.0 * cfg.hurst);
    MollifiedDrift bdelta(cfg.drift, delta);

    cfg.flags = exponents(cfg.hurst, cfg.drift_dim_for_flags, cfg.drift.p, cfg.drift.q, 0.0);

    SdePaths out;
    out.grid = cfg.grid;
    out.dim = d;
    out.n_paths = bundle.n_paths;
    std::size_t np = cfg.grid.n_points();
    out.x.assign(bundle.n_paths * np * d, 0.0);
    out.psi.assign(bundle.n_paths * np * d, 0.0);

    parallel_for(bundle.n_paths, [&](std::size_t p) {
        std::vector<double> xi(d), bi(d);
        for (std::size_t k = 0; k < d; ++k) xi[k] = cfg.x0[k];
        for (std::size_t k = 0; k < d; ++k) {
            out.x[(p * np) * d + k] = xi[k];
            out.psi[(p * np) * d + k] = xi[k];
        }
        for (std::size_t i = 0; i + 1 < np; ++i) {
            bdelta.eval(cfg.grid.time(i), xi, bi);
            for (std::size_t k = 0; k < d; ++k) {
                double dB = bundle.fbm(p, i + 1, k) - bundle.fbm(p, i, k);
                xi[k] += bi[k] * dt + dB;
                if (!std::isfinite(xi[k]))
                    throw std::runtime_error("solve_singular_sde: non-finite state at path " +
                                             std::to_string(p) + ", step " + std::to_string(i));
                out.x[(p * np + i + 1) * d + k] = xi[k];
                out.psi[(p * np + i + 1) * d + k] = xi[k] - bundle.fbm(p, i + 1, k);
            }
        }
    });
    return out;
}

/// Fitted L_m Holder exponent of psi over dyadic gaps.
inline RateReport psi_holder_rate(const SdePaths& paths, const std::vector<double>& gaps, double m) {
    RateReport rep;
    rep.m = m;
    rep.label = "psi_holder";
    std::size_t np = paths.grid.n_points();
    double s_anchor = 0.25 * (paths.grid.t1 - paths.grid.t0);
    for (double g : gaps) {
        std::size_t ia = paths.grid.index_of(s_anchor), ib = paths.grid.index_of(s_anchor + g);
        Samples d(paths.n_paths, paths.dim);
        for (std::size_t p = 0; p < paths.n_paths; ++p)
            for (std::size_t k = 0; k < paths.dim; ++k)
                d.data[p * paths.dim + k] =
                    paths.psi[(p * np + ib) * paths.dim + k] - paths.psi[(p * np + ia) * paths.dim + k];
        rep.scales.push_back(g);
        rep.lm_values.push_back(estimate_lm(d, m));
    }
    rep.fit();
    return rep;
}

struct UniquenessProbe {
    std::vector<double> delta0;      // initial separations
    std::vector<double> sup_distance; // mean over paths of sup_t |X - Xbar|
    bool monotone = true;
};

/// Same-noise solves from x0 and x0 + delta0 e_1; empirical stability
/// evidence only, not a proof.
inline UniquenessProbe pathwise_uniqueness_probe(SdeConfig cfg, const PathBundle& bundle,
                                                 const std::vector<double>& delta0_list) {
    UniquenessProbe probe;
    probe.delta0 = delta0_list;
    auto base_cfg = cfg;
    auto base = solve_singular_sde(base_cfg, bundle);
    std::size_t np = cfg.grid.n_points();
    for (double d0 : delta0_list) {
        SdeConfig shifted = cfg;
        shifted.x0[0] += d0;
        auto other = solve_singular_sde(shifted, bundle);
        double acc = 0.0;
        for (std::size_t p = 0; p < base.n_paths; ++p) {
            double sup = 0.0;
            for (std::size_t i = 0; i < np; ++i) {
                double s2 = 0.0;
                for (std::size_t k = 0; k < base.dim; ++k) {
                    double diff = base.x[(p * np + i) * base.dim + k] -
                                  other.x[(p * np + i) * base.dim + k];
                    s2 += diff * diff;
                }
                sup = std::max(sup, std::sqrt(s2));
            }
            acc += sup;
        }
        probe.sup_distance.push_back(acc / double(base.n_paths));
    }
    for (std::size_t i = 0; i + 1 < probe.sup_distance.size(); ++i)
        if (probe.sup_distance[i + 1] > probe.sup_distance[i] + 1e-15) probe.monotone = false;
    return probe;
}

} // namespace stosew
