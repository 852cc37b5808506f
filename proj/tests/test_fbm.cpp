#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "stosew/fbm.hpp"
#include "stosew/poisson.hpp"
#include "stosew/quadrature.hpp"
#include "stosew/stats.hpp"

using namespace stosew;

TEST_CASE("fbm covariance closed form") {
    CHECK(fbm_covariance(0.5, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(fbm_covariance(0.3, 0.0, 0.7) == doctest::Approx(0.0));
    CHECK(fbm_covariance(0.1, 0.0, 0.2) == doctest::Approx(0.0));
    // at H = 1/2 the covariance is min(s,t)
    CHECK(fbm_covariance(0.5, 0.3, 0.7) == doctest::Approx(0.3));
    CHECK_THROWS_AS(fbm_covariance(1.2, 0.1, 0.2), std::domain_error);
    CHECK_THROWS_AS(fbm_covariance(0.3, -0.1, 0.2), std::domain_error);
}

TEST_CASE("kernel at H = 1/2 is the constant 1") {
    CHECK(kernel_KH(0.5, 1.0, 0.3) == doctest::Approx(1.0));
    CHECK(kernel_KH(0.5, 2.0, 1.9) == doctest::Approx(1.0));
    CHECK_THROWS_AS(kernel_KH(0.3, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(kernel_KH(0.3, 1.0, 0.0), std::domain_error);
}

TEST_CASE("kernel diverges like (t-s)^(H-1/2) near the diagonal") {
    double H = 0.3, t = 1.0;
    // K(t,s) * (t-s)^(1/2-H) should approach c_H as s -> t
    double prev = 0.0;
    for (int k = 3; k <= 8; ++k) {
        double s = t - std::pow(10.0, -k);
        double scaled = kernel_KH(H, t, s) * std::pow(t - s, 0.5 - H);
        if (k > 3) CHECK(std::abs(scaled - prev) < 0.05 * std::abs(prev));
        prev = scaled;
    }
    double cH = std::sqrt(2.0 * H * std::tgamma(1.5 - H) /
                          (std::tgamma(H + 0.5) * std::tgamma(2.0 - 2.0 * H)));
    CHECK(prev == doctest::Approx(cH).epsilon(1e-3));
}

TEST_CASE("sigma consistency: int_0^t K(t,r)^2 dr = t^2H") {
    for (double H : {0.1, 0.25, 0.3, 0.45}) {
        FbmKernel kern(H);
        for (double t : {0.5, 1.0, 2.0}) {
            CHECK(kern.sigma2(0.0, t) == doctest::Approx(std::pow(t, 2.0 * H)).epsilon(1e-5));
        }
    }
}

TEST_CASE("kernel table route matches direct quadrature") {
    double H = 0.3;
    FbmKernel kern(H);
    for (double s : {0.01, 0.2, 0.5, 0.95}) {
        CHECK(kern.K(1.0, s) == doctest::Approx(kernel_KH(H, 1.0, s)).epsilon(1e-7));
    }
}

TEST_CASE("sigma_H at H = 1/2 is sqrt(t-s), zero on the diagonal") {
    CHECK(sigma_H(0.5, 0.25, 1.0) == doctest::Approx(std::sqrt(0.75)));
    CHECK(sigma_H(0.3, 0.4, 0.4) == doctest::Approx(0.0));
}

TEST_CASE("local nondeterminism ratio is bounded below on a grid") {
    double H = 0.3;
    FbmKernel kern(H);
    double min_ratio = 1e30;
    for (int a = 0; a < 12; ++a)
        for (int b = a + 1; b <= 12; ++b) {
            double s = a / 12.0, t = b / 12.0;
            double ratio = std::sqrt(kern.sigma2(s, t)) / std::pow(t - s, H);
            min_ratio = std::min(min_ratio, ratio);
        }
    CHECK(min_ratio > 0.1);
}

TEST_CASE("brownian sampler: variance, determinism, covariance") {
    TimeGrid grid(0.0, 1.0, 64);
    auto b = sample_brownian(grid, 1, 10000, 42);
    double dt = grid.dt();

    // empirical Var(dW) close to dt
    double var = 0.0;
    for (std::size_t p = 0; p < b.n_paths; ++p) var += b.dw(p, 0, 0) * b.dw(p, 0, 0);
    var /= double(b.n_paths);
    CHECK(std::abs(var - dt) < 5.0 * dt / std::sqrt(double(b.n_paths)));

    // same seed twice: bit identical
    auto b2 = sample_brownian(grid, 1, 10000, 42);
    CHECK(b.w_increments == b2.w_increments);

    // E[W_t W_s] ~ min(s,t)
    double c = 0.0;
    std::size_t is = 16, it = 48;
    for (std::size_t p = 0; p < b.n_paths; ++p)
        c += b.brownian(p, is, 0) * b.brownian(p, it, 0);
    c /= double(b.n_paths);
    CHECK(c == doctest::Approx(grid.time(is)).epsilon(0.1));
}

TEST_CASE("cholesky fbm: B_0 = 0, empirical covariance, H=1/2 is BM") {
    TimeGrid grid(0.0, 1.0, 32);
    double H = 0.3;
    auto b = sample_fbm_cholesky(H, grid, 1, 8000, 7);
    for (std::size_t p = 0; p < 5; ++p) CHECK(b.fbm(p, 0, 0) == 0.0);

    auto check_pair = [&](std::size_t i, std::size_t j) {
        double c = 0.0;
        for (std::size_t p = 0; p < b.n_paths; ++p) c += b.fbm(p, i, 0) * b.fbm(p, j, 0);
        c /= double(b.n_paths);
        double target = fbm_covariance(H, grid.time(i), grid.time(j));
        // 4 standard MC errors for a product-moment estimate
        double se = 4.0 * std::sqrt(2.0) * std::max(target, 0.3) / std::sqrt(double(b.n_paths));
        CHECK(std::abs(c - target) < se);
    };
    check_pair(8, 8);
    check_pair(16, 16);
    check_pair(32, 32);
    check_pair(8, 24);
    check_pair(16, 32);

    // H = 1/2 reproduces the Brownian covariance structure
    auto bm = sample_fbm_cholesky(0.5, grid, 1, 8000, 7);
    double c = 0.0;
    for (std::size_t p = 0; p < bm.n_paths; ++p) c += bm.fbm(p, 8, 0) * bm.fbm(p, 24, 0);
    c /= double(bm.n_paths);
    CHECK(c == doctest::Approx(grid.time(8)).epsilon(0.15));
}

TEST_CASE("volterra fbm: H=1/2 gives partial sums, variance near t^2H") {
    TimeGrid grid(0.0, 1.0, 64);
    auto b = sample_fbm_volterra(0.5, grid, 1, 50, 11);
    for (std::size_t p = 0; p < 5; ++p) {
        CHECK(b.fbm(p, 13, 0) == doctest::Approx(b.brownian(p, 13, 0)).epsilon(1e-12));
    }

    // scheme variance from the weights (no MC noise)
    for (double H : {0.1, 0.3}) {
        TimeGrid fine(0.0, 1.0, 4096);
        FbmModel model(H, fine);
        CHECK(model.scheme_variance(fine.n_steps) == doctest::Approx(1.0).epsilon(0.03));
    }
}

TEST_CASE("volterra scheme covariance close to the exact formula") {
    double H = 0.3;
    TimeGrid grid(0.0, 1.0, 1024);
    FbmModel model(H, grid);
    for (auto [a, b] : {std::pair<std::size_t, std::size_t>{256, 768},
                        {512, 512},
                        {128, 1024},
                        {512, 1024}}) {
        double target = fbm_covariance(H, grid.time(a), grid.time(b));
        CHECK(model.scheme_covariance(a, b) == doctest::Approx(target).epsilon(0.05));
    }
}

TEST_CASE("conditional mean: s=0 gives 0, s=t recovers the value") {
    double H = 0.3;
    TimeGrid grid(0.0, 1.0, 128);
    FbmModel model(H, grid);
    auto b = sample_fbm_volterra(H, grid, 1, 200, 3, &model);

    auto at0 = conditional_mean_fbm(b, model, 0.0, 0.75);
    for (std::size_t p = 0; p < 10; ++p) CHECK(at0.data[p] == 0.0);

    auto att = conditional_mean_fbm(b, model, 0.75, 0.75);
    std::size_t i = grid.index_of(0.75);
    for (std::size_t p = 0; p < 10; ++p)
        CHECK(att.data[p] == doctest::Approx(b.fbm(p, i, 0)).epsilon(1e-12));
}

TEST_CASE("conditional variance matches sigma_H^2") {
    double H = 0.3;
    TimeGrid grid(0.0, 1.0, 512);
    FbmModel model(H, grid);
    std::size_t is = grid.index_of(0.25), it = grid.index_of(0.75);
    // discrete conditional variance vs continuum quadrature
    double disc = model.sigma2_disc(is, it, it);
    double cont = model.kernel().sigma2(0.25, 0.75);
    CHECK(disc == doctest::Approx(cont).epsilon(0.05));

    // and the sampler realizes it
    auto b = sample_fbm_volterra(H, grid, 1, 8000, 23, &model);
    auto cm = conditional_mean_fbm(b, model, 0.25, 0.75);
    double var = 0.0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double r = b.fbm(p, it, 0) - cm.data[p];
        var += r * r;
    }
    var /= double(b.n_paths);
    CHECK(var == doctest::Approx(cont).epsilon(0.05));
}

TEST_CASE("poisson sampler: count law and zero intensity") {
    TimeGrid grid(0.0, 1.0, 16);
    double lam = 3.0;
    auto b = sample_poisson(lam, grid, 20000, 5);
    double mean = 0.0, var = 0.0;
    for (std::size_t p = 0; p < b.n_paths; ++p) mean += double(b.jump_count(p, 1.0));
    mean /= double(b.n_paths);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double d = double(b.jump_count(p, 1.0)) - mean;
        var += d * d;
    }
    var /= double(b.n_paths - 1);
    CHECK(mean == doctest::Approx(lam).epsilon(0.05));
    CHECK(var == doctest::Approx(lam).epsilon(0.1));

    auto z = sample_poisson(0.0, grid, 100, 5);
    for (std::size_t p = 0; p < z.n_paths; ++p) CHECK(z.poisson_jumps[p].empty());
}

TEST_CASE("path bundle: binary round trip") {
    TimeGrid grid(0.0, 1.0, 16);
    auto b = sample_fbm_volterra(0.3, grid, 2, 5, 77);
    b.save("/tmp/stosew_bundle.bin");
    auto c = PathBundle::load("/tmp/stosew_bundle.bin");
    CHECK(c.dim == b.dim);
    CHECK(c.n_paths == b.n_paths);
    CHECK(c.grid.n_steps == b.grid.n_steps);
    CHECK(c.hurst.has_value());
    CHECK(*c.hurst == 0.3);
    CHECK(c.w_increments == b.w_increments);
    CHECK(c.fbm_values == b.fbm_values);
}

TEST_CASE("samplers are independent of the worker count") {
    TimeGrid grid(0.0, 1.0, 64);
    const char* saved = std::getenv("STOSEW_WORKERS");
    std::string saved_value = saved ? saved : "";
    setenv("STOSEW_WORKERS", "1", 1);
    auto b1 = sample_brownian(grid, 2, 200, 9);
    auto f1 = sample_fbm_volterra(0.3, grid, 1, 50, 9);
    setenv("STOSEW_WORKERS", "4", 1);
    auto b4 = sample_brownian(grid, 2, 200, 9);
    auto f4 = sample_fbm_volterra(0.3, grid, 1, 50, 9);
    if (saved)
        setenv("STOSEW_WORKERS", saved_value.c_str(), 1);
    else
        unsetenv("STOSEW_WORKERS");
    CHECK(b1.w_increments == b4.w_increments);
    CHECK(f1.fbm_values == f4.fbm_values);
}

TEST_CASE("cholesky and volterra routes agree in law at random pairs") {
    double H = 0.3;
    TimeGrid grid(0.0, 1.0, 512);
    FbmModel model(H, grid);
    // marginal variances
    for (std::size_t i : {128u, 256u, 512u}) {
        double target = std::pow(grid.time(i), 2.0 * H);
        CHECK(model.scheme_variance(i) == doctest::Approx(target).epsilon(0.03));
    }
    // ten random covariances against the exact law the Cholesky route samples
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(1, 512);
    for (int k = 0; k < 10; ++k) {
        std::size_t a = pick(rng), b = pick(rng);
        double target = fbm_covariance(H, grid.time(a), grid.time(b));
        CHECK(model.scheme_covariance(a, b) == doctest::Approx(target).epsilon(0.05));
    }
}

TEST_CASE("estimate_lm basics") {
    Samples s(4, 1);
    s.data = {2.0, 2.0, 2.0, 2.0};
    CHECK(estimate_lm(s, 3.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(estimate_lm(Samples(0, 1), 2.0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_lm(s, 0.5), std::invalid_argument);
}
