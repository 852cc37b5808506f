#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "stosew/allocation.hpp"
#include "stosew/fbm.hpp"
#include "stosew/ito_examples.hpp"
#include "stosew/sewing.hpp"

using namespace stosew;

TEST_CASE("delta of an additive germ vanishes") {
    TimeGrid grid(0.0, 1.0, 64);
    auto germ = additive_germ(grid, [](double t) { return std::sin(3.0 * t) + t * t; });
    for (auto [s, u, t] : {std::tuple{0.0, 0.25, 0.5}, {0.125, 0.5, 1.0}, {0.25, 0.25, 0.75}}) {
        auto d = delta(germ, 0, s, u, t);
        CHECK(std::abs(d[0]) < 1e-14);
    }
    CHECK_THROWS_AS(delta(germ, 0, 0.5, 0.25, 0.75), std::invalid_argument);
}

TEST_CASE("delta of the Ito germ matches its closed form") {
    TimeGrid grid(0.0, 1.0, 64);
    auto b = sample_brownian(grid, 1, 20, 1);
    auto f = [](double x) { return std::cos(x); };
    auto germ = ito_germ(b, f);
    auto w = brownian_values(b);
    std::size_t np = grid.n_points();
    for (std::size_t p = 0; p < 10; ++p) {
        std::size_t is = 8, iu = 24, it = 56;
        auto d = delta(germ, p, grid.time(is), grid.time(iu), grid.time(it));
        double expected = -(f((*w)[p * np + iu]) - f((*w)[p * np + is])) *
                          ((*w)[p * np + it] - (*w)[p * np + iu]);
        CHECK(d[0] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("delta of the QV germ matches the symmetric product") {
    TimeGrid grid(0.0, 1.0, 64);
    auto b = sample_brownian(grid, 2, 10, 2);
    auto germ = qv_brownian_germ(b);
    auto w = brownian_values(b);
    std::size_t np = grid.n_points(), d = 2;
    std::size_t is = 4, iu = 20, it = 52;
    for (std::size_t p = 0; p < 5; ++p) {
        auto dd = delta(germ, p, grid.time(is), grid.time(iu), grid.time(it));
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t c = 0; c < d; ++c) {
                double msu_a = (*w)[(p * np + iu) * d + a] - (*w)[(p * np + is) * d + a];
                double mut_a = (*w)[(p * np + it) * d + a] - (*w)[(p * np + iu) * d + a];
                double msu_c = (*w)[(p * np + iu) * d + c] - (*w)[(p * np + is) * d + c];
                double mut_c = (*w)[(p * np + it) * d + c] - (*w)[(p * np + iu) * d + c];
                CHECK(dd[a * d + c] == doctest::Approx(msu_a * mut_c + mut_a * msu_c).epsilon(1e-10));
            }
    }
}

TEST_CASE("riemann sums: singleton, additive telescoping, compensated poisson") {
    TimeGrid grid(0.0, 1.0, 64);
    auto b = sample_poisson(1.5, grid, 50, 3);
    auto germ = poisson_compensated_germ(b);

    Partition singleton({0.0, 1.0});
    for (std::size_t p = 0; p < 5; ++p) {
        auto r = riemann_sum(germ, singleton, p);
        double expected = double(b.jump_count(p, 1.0)) - 1.5;
        CHECK(r[0] == doctest::Approx(expected).epsilon(1e-12));
    }

    // the compensated increment germ is additive: any partition gives N_t - lambda t
    Partition pi({0.0, 0.125, 0.25, 0.625, 1.0});
    for (std::size_t p = 0; p < 5; ++p) {
        auto r = riemann_sum(germ, pi, p);
        auto r2 = riemann_sum(germ, singleton, p);
        CHECK(r[0] == doctest::Approx(r2[0]).epsilon(1e-12));
    }

    auto add = additive_germ(grid, [](double t) { return std::exp(t); });
    auto r = riemann_sum(add, pi, 0);
    CHECK(r[0] == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
}

TEST_CASE("dyadic refine: level 0 is the germ itself; additive invariance") {
    TimeGrid grid(0.0, 1.0, 64);
    auto add = additive_germ(grid, [](double t) { return t * t * t; });
    auto a0 = dyadic_refine(add, 0.25, 0.75, 0, 0);
    auto a3 = dyadic_refine(add, 0.25, 0.75, 3, 0);
    CHECK(a0[0] == doctest::Approx(a3[0]).epsilon(1e-13));
    CHECK_THROWS_AS(dyadic_refine(add, 0.25, 0.75, 8, 0), std::invalid_argument);
}

TEST_CASE("doob split: ito martingale, deterministic, poisson QV") {
    TimeGrid grid(0.0, 1.0, 128);
    auto bw = sample_brownian(grid, 1, 100, 9);
    auto ito = ito_germ(bw, [](double x) { return std::sin(x); });
    Partition pi = Partition::dyadic(0.0, 1.0, 5);
    auto ds = doob_split(ito, pi, bw.n_paths);
    for (std::size_t p = 0; p < 10; ++p) {
        CHECK(ds.j.data[p] == 0.0);
        CHECK(ds.m.data[p] == doctest::Approx(ds.a.data[p]).epsilon(1e-12));
    }

    auto det = additive_germ(grid, [](double t) { return std::cos(t); });
    auto ds2 = doob_split(det, pi, 1);
    CHECK(ds2.m.data[0] == doctest::Approx(0.0).epsilon(1e-14));

    auto bp = sample_poisson(2.0, grid, 100, 10);
    auto qvp = qv_poisson_germ(bp);
    auto ds3 = doob_split(qvp, pi, bp.n_paths);
    for (std::size_t p = 0; p < 10; ++p) {
        CHECK(ds3.j.data[p] == doctest::Approx(2.0 * 1.0).epsilon(1e-12)); // lambda * t
        CHECK(ds3.a.data[p] == doctest::Approx(ds3.m.data[p] + ds3.j.data[p]).epsilon(1e-12));
    }
}

TEST_CASE("dyadic allocation: two points give zero residuals") {
    auto levels = dyadic_allocate({0.25, 0.75});
    TimeGrid grid(0.0, 1.0, 16);
    auto add = additive_germ(grid, [](double t) { return t * t; });
    auto s = allocation_sum(add, 0, levels);
    CHECK(std::abs(s[0]) < 1e-15);
}

TEST_CASE("dyadic allocation identity for a random 17-point partition") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 100, 77);
    auto germ = qv_brownian_germ(b);

    std::mt19937_64 rng(123);
    std::vector<double> pts;
    std::uniform_int_distribution<std::size_t> pick(0, 1024);
    std::set<std::size_t> chosen;
    while (chosen.size() < 17) chosen.insert(pick(rng));
    for (auto i : chosen) pts.push_back(grid.time(i));

    auto levels = dyadic_allocate(pts);
    for (std::size_t p = 0; p < 100; ++p) {
        auto rhs = allocation_sum(germ, p, levels);
        // direct defect: sum A_{t_i,t_{i+1}} - A_{t_0,t_N}
        std::vector<double> lhs(germ.dim, 0.0), tmp(germ.dim);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            germ.eval(p, grid.index_of(pts[i]), grid.index_of(pts[i + 1]), tmp);
            lhs[0] += tmp[0];
        }
        germ.eval(p, grid.index_of(pts.front()), grid.index_of(pts.back()), tmp);
        lhs[0] -= tmp[0];
        double scale = std::max(std::abs(lhs[0]), 1e-6);
        CHECK(std::abs(lhs[0] - rhs[0]) < 1e-10 * scale);
    }
}

TEST_CASE("dyadic allocation: dyadic midpoints give midpoint splittings") {
    // partition = level-1 dyadic points of [0,1]: the single residual is
    // -delta A_{0,1/2,1}
    TimeGrid grid(0.0, 1.0, 16);
    auto b = sample_brownian(grid, 1, 20, 5);
    auto germ = qv_brownian_germ(b);
    auto levels = dyadic_allocate({0.0, 0.5, 1.0});
    REQUIRE(levels.size() == 1);
    REQUIRE(levels[0].size() == 1);
    auto q = levels[0][0];
    CHECK(q.s1 == 0.0);
    CHECK(q.s2 == 0.0);
    CHECK(q.s3 == 0.5);
    CHECK(q.s4 == 1.0);
    for (std::size_t p = 0; p < 5; ++p) {
        auto rhs = allocation_sum(germ, p, levels);
        auto d = delta(germ, p, 0.0, 0.5, 1.0);
        CHECK(rhs[0] == doctest::Approx(-d[0]).epsilon(1e-12));
    }
}

TEST_CASE("sewing limit: additive germ has zero dyadic error at all levels") {
    TimeGrid grid(0.0, 1.0, 256);
    auto add = additive_germ(grid, [](double t) { return std::sin(t); });
    auto res = sewing_limit(add, 1.0, 8, 4, 2.0);
    for (double v : res.report.lm_values) CHECK(std::abs(v) < 1e-14);
    CHECK_THROWS_AS(sewing_limit(add, 1.0, 8, 4, 1.5), std::invalid_argument);
}

TEST_CASE("sewing limit: QV on Brownian paths has rate about 1/2") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 2000, 21);
    auto germ = qv_brownian_germ(b);
    auto res = sewing_limit(germ, 1.0, 10, b.n_paths, 2.0);
    CHECK(res.report.fitted_exponent == doctest::Approx(0.5).epsilon(0.3)); // +-0.15 absolute
    CHECK(std::abs(res.report.fitted_exponent - 0.5) < 0.15);
    // the finest sum concentrates at t = 1
    double mean = mean_scalar(res.limit.data);
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("uniqueness probe: vanishing germ has vanishing sums") {
    // A_{s,t} = (W_t - W_s) |t-s|^eps with eps = 0.25 satisfies
    // ||A|| ~ |t-s|^(1/2+eps) and E^{F_s} A = 0; its dyadic Riemann sums
    // tend to 0 with exponent >= eps - 0.15
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 2000, 31);
    auto w = brownian_values(b);
    std::size_t np = grid.n_points();
    double eps = 0.25;
    Germ germ;
    germ.dim = 1;
    germ.grid = grid;
    germ.eval = [w, np, eps, &grid](std::size_t p, std::size_t i, std::size_t j,
                                    std::span<double> out) {
        out[0] = ((*w)[p * np + j] - (*w)[p * np + i]) *
                 std::pow(grid.dt() * double(j - i), eps);
    };
    std::vector<double> scales, norms;
    Samples sums(b.n_paths, 1);
    for (unsigned n = 3; n <= 10; ++n) {
        std::size_t cells = std::size_t(1) << n, stride = 1024 >> n;
        parallel_for(b.n_paths, [&](std::size_t p) {
            double acc = 0.0, tmp[1];
            for (std::size_t c = 0; c < cells; ++c) {
                germ.eval(p, c * stride, (c + 1) * stride, std::span<double>(tmp, 1));
                acc += tmp[0];
            }
            sums.data[p] = acc;
        });
        scales.push_back(std::ldexp(1.0, -int(n)));
        norms.push_back(estimate_lm(sums, 2.0));
    }
    auto fit = fit_loglog(scales, norms);
    CHECK(fit.slope >= eps - 0.15);
}

TEST_CASE("estimate_lm obeys the Poisson increment bound for m in [1,2]") {
    // ||N_{s,t} - lambda(t-s)||_{L_m} <= (2 lambda)^(1/m) (t-s)^(1/m)
    double lam = 1.0;
    TimeGrid grid(0.0, 1.0, 64);
    auto b = sample_poisson(lam, grid, 50000, 17);
    for (double gap : {1.0 / 16, 1.0 / 64}) {
        for (double m : {1.0, 1.5, 2.0}) {
            Samples s(b.n_paths, 1);
            for (std::size_t p = 0; p < b.n_paths; ++p)
                s.data[p] = double(b.jump_count(p, gap)) - lam * gap;
            double lm = estimate_lm(s, m);
            double bound = std::pow(2.0 * lam, 1.0 / m) * std::pow(gap, 1.0 / m);
            CHECK(lm <= bound * 1.02);
        }
    }
}

TEST_CASE("doob split: martingale part has mean zero within 4 MC errors") {
    TimeGrid grid(0.0, 1.0, 256);
    auto b = sample_brownian(grid, 1, 4000, 23);
    auto germ = qv_brownian_germ(b);
    auto ds = doob_split(germ, Partition::dyadic(0.0, 1.0, 6), b.n_paths);
    double mean = mean_scalar(ds.m.data);
    double se = stderr_scalar(ds.m.data);
    CHECK(std::abs(mean) < 4.0 * se + 1e-12);
    // and A = M + J exactly per path
    for (std::size_t p = 0; p < 50; ++p)
        CHECK(ds.a.data[p] ==
              doctest::Approx(ds.m.data[p] + ds.j.data[p]).epsilon(1e-12));
}

TEST_CASE("rate report flags non-monotone tails") {
    RateReport r;
    r.m = 2.0;
    r.scales = {0.5, 0.25, 0.125, 0.0625, 0.03125};
    r.lm_values = {0.7, 0.5, 0.30, 0.20, 0.25}; // last level ticks up
    r.fit();
    CHECK_FALSE(r.converged);
}

TEST_CASE("fit_conditions: ito germ conditional part is exactly zero") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 1000, 41);
    auto germ = ito_germ(b, [](double x) { return std::tanh(x); });
    std::vector<double> gaps = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    auto fit = fit_conditions(germ, 2.0, gaps, b.n_paths);
    CHECK(fit.cond_exact_zero);
    // tanh is Lipschitz: eps2 about tau/2 = 1/2
    CHECK(std::abs(fit.eps2 - 0.5) < 0.2);
}

TEST_CASE("fit_conditions: QV germ on BM has eps2 about 1/2") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 2000, 43);
    auto germ = qv_brownian_germ(b);
    std::vector<double> gaps = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    auto fit = fit_conditions(germ, 2.0, gaps, b.n_paths);
    CHECK(std::abs(fit.eps2 - 0.5) < 0.2);
    CHECK(fit.cond_exact_zero); // E^{F_s} delta A = 0 for the QV germ
    auto add = additive_germ(grid, [](double t) { return t; });
    auto fz = fit_conditions(add, 2.0, gaps, 4);
    CHECK(fz.delta_exact_zero);
    CHECK(fz.cond_exact_zero);
}
