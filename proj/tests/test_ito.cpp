#include <doctest.h>

#include <cmath>

#include "stosew/fbm.hpp"
#include "stosew/ito_examples.hpp"

using namespace stosew;

TEST_CASE("ito integral of f = 1 is B_t at every level") {
    TimeGrid grid(0.0, 1.0, 256);
    auto b = sample_brownian(grid, 1, 50, 4);
    auto res = ito_integral([](double) { return 1.0; }, b, 1.0, 8, 2.0);
    for (double v : res.report.lm_values) CHECK(std::abs(v) < 1e-12);
    for (std::size_t p = 0; p < 10; ++p)
        CHECK(res.limit.data[p] == doctest::Approx(b.brownian(p, 256, 0)).epsilon(1e-10));
}

TEST_CASE("ito integral of f(x) = x against the closed form") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 4000, 17);
    auto res = ito_integral([](double x) { return x; }, b, 1.0, 10, 2.0);
    Samples diff(b.n_paths, 1);
    double target_sd = 0.0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double w1 = b.brownian(p, 1024, 0);
        double analytic = 0.5 * (w1 * w1 - 1.0);
        diff.data[p] = res.limit.data[p] - analytic;
    }
    target_sd = std::sqrt(0.5); // sd of (B_1^2 - 1)/2
    double l2 = estimate_lm(diff, 2.0);
    CHECK(l2 < 3.0 * target_sd / std::sqrt(double(b.n_paths)));
    // discretization identity: || sum - closed form ||_{L2} = sqrt(dt/2)
    CHECK(l2 == doctest::Approx(std::sqrt(grid.dt() / 2.0)).epsilon(0.1));
}

TEST_CASE("ito integral rate for a Holder-1/2 integrand") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 3000, 19);
    // everywhere-rough integrand saturates the tau/2 rate
    auto res = ito_integral(lacunary_holder(0.5, 16), b, 1.0, 10, 2.0);
    CHECK(std::abs(res.report.fitted_exponent - 0.25) < 0.15);
    // the clipped power is rough at one point only; its decay can only be
    // faster than the C^(1/2)-norm bound predicts
    auto res2 = ito_integral(clipped_power(0.5, 6.0), b, 1.0, 10, 2.0);
    CHECK(res2.report.fitted_exponent >= 0.25 - 0.15);
}

TEST_CASE("quadratic variation of BM concentrates at t I_d") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 2, 1000, 29);
    auto qv = quadratic_variation(b, QvSource::brownian, 1.0, 10);
    auto mu = mean_components(qv.sewing.limit);
    CHECK(mu[0] == doctest::Approx(1.0).epsilon(0.02));
    CHECK(mu[3] == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(mu[1]) < 0.02);
    // J part is t I_d exactly at every partition
    for (std::size_t p = 0; p < 5; ++p) {
        CHECK(qv.doob.j.data[p * 4 + 0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(qv.doob.j.data[p * 4 + 1] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("quadratic variation of compensated Poisson equals the jump count") {
    TimeGrid grid(0.0, 1.0, 4096);
    double lam = 1.0;
    auto b = sample_poisson(lam, grid, 500, 37);
    auto qv = quadratic_variation(b, QvSource::compensated_poisson, 1.0, 12);
    std::size_t agree = 0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double jumps = double(b.jump_count(p, 1.0));
        if (std::abs(qv.sewing.limit.data[p] - jumps) < 0.5) ++agree;
    }
    CHECK(double(agree) / double(b.n_paths) >= 0.99);
}

TEST_CASE("zero martingale has zero quadratic variation") {
    TimeGrid grid(0.0, 1.0, 256);
    PathBundle b;
    b.grid = grid;
    b.dim = 1;
    b.n_paths = 4;
    b.w_increments.assign(4 * 256, 0.0);
    auto qv = quadratic_variation(b, QvSource::brownian, 1.0, 8);
    for (double v : qv.sewing.limit.data) CHECK(v == 0.0);
}

TEST_CASE("poisson counterexample: L2 slope 1/2, L1 slope near 1") {
    std::vector<double> gaps;
    for (int k = 4; k <= 12; ++k) gaps.push_back(std::ldexp(1.0, -k));
    auto table = poisson_counterexample(1.0, {1.0, 2.0}, gaps, 400000, 101);
    REQUIRE(table.reports.size() == 2);
    CHECK(std::abs(table.reports[1].fitted_exponent - 0.5) < 0.1);
    CHECK(table.reports[0].fitted_exponent >= 0.8);
}

TEST_CASE("poisson compensated germ: conditional expectation identically zero") {
    TimeGrid grid(0.0, 1.0, 64);
    auto b = sample_poisson(2.0, grid, 100, 7);
    auto germ = poisson_compensated_germ(b);
    std::vector<double> out(1);
    germ.cond_eval(0, 4, 4, 32, out);
    CHECK(out[0] == 0.0);
}

TEST_CASE("ito formula terms: exact Taylor bookkeeping per increment") {
    // A = A1 + A2 + A3 and A2 = A4 + A5 hold exactly by construction; spot
    // check the five germs against the direct Taylor pieces
    TimeGrid grid(0.0, 1.0, 64);
    auto b = sample_brownian(grid, 1, 10, 61);
    auto w = brownian_values(b);
    std::size_t np = grid.n_points();
    auto f = [](double x) { return std::sin(2.0 * x); };
    auto f1 = [](double x) { return 2.0 * std::cos(2.0 * x); };
    auto f2 = [](double x) { return -4.0 * std::sin(2.0 * x); };
    double dt = grid.dt();
    for (std::size_t p = 0; p < 5; ++p) {
        std::size_t i = 8, j = 40;
        double ws = (*w)[p * np + i], wt = (*w)[p * np + j];
        double d = wt - ws, gap = double(j - i) * dt;
        double a = f(wt) - f(ws);
        double a1 = f1(ws) * d;
        double a2 = 0.5 * f2(ws) * d * d;
        double a3 = a - a1 - a2;
        double a4 = 0.5 * f2(ws) * gap;
        double a5 = a2 - a4;
        CHECK(a == doctest::Approx(a1 + a2 + a3).epsilon(1e-14));
        CHECK(a2 == doctest::Approx(a4 + a5).epsilon(1e-14));
    }
}

TEST_CASE("M x M - <M> is a martingale, also conditionally on sign cells") {
    TimeGrid grid(0.0, 1.0, 256);
    auto b = sample_brownian(grid, 1, 20000, 67);
    std::size_t is = 64, it = 192; // s = 0.25, t = 0.75
    // increments of B_t^2 - t between s and t, unconditionally and on three
    // coarse cells cut by B_s
    std::vector<double> all, lo, mid, hi;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double bs = b.brownian(p, is, 0), bt = b.brownian(p, it, 0);
        double inc = (bt * bt - 0.75) - (bs * bs - 0.25);
        all.push_back(inc);
        if (bs < -0.3)
            lo.push_back(inc);
        else if (bs > 0.3)
            hi.push_back(inc);
        else
            mid.push_back(inc);
    }
    auto check_zero = [](const std::vector<double>& v) {
        double m = mean_scalar(v), se = stderr_scalar(v);
        CHECK(std::abs(m) < 4.0 * se + 1e-12);
    };
    check_zero(all);
    check_zero(lo);
    check_zero(mid);
    check_zero(hi);
}

TEST_CASE("compensated poisson: Nbar^2 - N is a martingale in the mean") {
    TimeGrid grid(0.0, 1.0, 256);
    double lam = 2.0;
    auto b = sample_poisson(lam, grid, 20000, 71);
    std::vector<double> inc;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        auto nb = [&](double t) { return double(b.jump_count(p, t)) - lam * t; };
        double s = 0.25, t = 0.75;
        inc.push_back((nb(t) * nb(t) - double(b.jump_count(p, t))) -
                      (nb(s) * nb(s) - double(b.jump_count(p, s))));
    }
    double m = mean_scalar(inc), se = stderr_scalar(inc);
    CHECK(std::abs(m) < 4.0 * se + 1e-12);
}

TEST_CASE("ito formula: f(x) = x has zero residual") {
    TimeGrid grid(0.0, 1.0, 256);
    auto b = sample_brownian(grid, 1, 100, 47);
    C3Function fn{[](double x) { return x; }, [](double) { return 1.0; },
                  [](double) { return 0.0; }, [](double) { return 0.0; }, 1.0};
    auto rep = ito_formula_check(fn, b, 8);
    CHECK(rep.residual_l2 < 1e-12);
    CHECK_FALSE(rep.derivative_bound_warning);
}

TEST_CASE("ito formula: f(x) = x^2 closed form") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 2000, 53);
    C3Function fn{[](double x) { return x * x; }, [](double x) { return 2.0 * x; },
                  [](double) { return 2.0; }, [](double) { return 0.0; }, 1.0};
    auto rep = ito_formula_check(fn, b, 10);
    // B_1^2 = 2 int B dB + 1: the residual is the QV discretization error
    CHECK(std::abs(rep.residual_mean) < 3.0 * rep.residual_stderr + 1e-12);
    CHECK(rep.residual_l2 < 0.1);
}

TEST_CASE("ito formula: f = sin residual and remainder decay") {
    TimeGrid grid(0.0, 1.0, 1024);
    auto b = sample_brownian(grid, 1, 4000, 59);
    C3Function fn{[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                  [](double x) { return -std::sin(x); }, [](double x) { return -std::cos(x); },
                  1.0};
    auto rep = ito_formula_check(fn, b, 10);
    CHECK(rep.residual_l2 < 0.02);
    CHECK(rep.a3_decay.fitted_exponent > 0.0);
    CHECK(rep.a5_decay.fitted_exponent > 0.0);
}
