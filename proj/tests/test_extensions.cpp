#include <doctest.h>

#include <cmath>
#include <vector>

#include "stobit/estimation.hpp"
#include "stobit/extensions.hpp"

using namespace stobit;

namespace {

double thinning_mean(double alpha, long x, std::uint64_t seed, double& se) {
    Rng rng(seed);
    const long draws = 1'000'000;
    double sum = 0.0;
    double sq = 0.0;
    for (long i = 0; i < draws; ++i) {
        const double v = static_cast<double>(signed_binomial_thinning(alpha, x, rng));
        sum += v;
        sq += v * v;
    }
    const double mean = sum / draws;
    se = std::sqrt((sq / draws - mean * mean) / draws);
    return mean;
}

ModelSpec bounded_spec(double a0, double a1, double b1, double kappa, double delta, long bound) {
    ModelSpec s;
    s.alpha0 = a0;
    s.alphas = {a1};
    s.betas = {b1};
    s.kappa = kappa;
    s.delta = delta;
    s.bound = bound;
    return s;
}

}  // namespace

TEST_CASE("signed binomial thinning") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) CHECK(signed_binomial_thinning(0.5, 0, rng) == 0);
    double se = 0.0;
    const double m1 = thinning_mean(-0.4, 5, 2, se);
    CHECK(std::abs(m1 + 2.0) <= 4.0 * se);
    const double m2 = thinning_mean(0.3, -4, 3, se);
    CHECK(std::abs(m2 + 1.2) <= 4.0 * se);
}

TEST_CASE("TINARS(1) transition probabilities") {
    for (double a1 : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
        const TinarsSpec spec{a1, 3.0};
        for (long prev : {0L, 1L, 5L, 20L}) {
            double total = 0.0;
            for (long y = 0; y < 200; ++y) total += tinars1_transition(y, prev, spec);
            CAPTURE(a1);
            CAPTURE(prev);
            CHECK(std::abs(total - 1.0) < 1e-10);
        }
    }
    const TinarsSpec s{0.4, 2.5};
    CHECK(tinars1_transition(0, 0, s) == doctest::Approx(std::exp(-2.5)).epsilon(1e-13));
    CHECK(tinars1_transition(3, 0, s) == doctest::Approx(std::exp(-2.5) * 2.5 * 2.5 * 2.5 / 6.0).epsilon(1e-13));
    const TinarsSpec neg{-0.9, 1.0};
    CHECK(tinars1_transition(0, 60, neg) > 0.999999);
    CHECK(tinars1_transition(0, 60, neg) > tinars1_transition(0, 10, neg));
    CHECK_THROWS_AS(TinarsSpec({1.2, 1.0}).validate(), std::invalid_argument);
}

TEST_CASE("TINARS(1) simulation, moments and estimation") {
    const TinarsSpec spec{-0.5, 7.5};
    Rng rng(44);
    const CountSeries series = simulate_tinars1(spec, 200000, 500, rng);
    double mean = 0.0;
    for (long x : series.counts) mean += static_cast<double>(x);
    mean /= static_cast<double>(series.size());
    const MomentSummary exact = tinars1_moments(spec, 2);
    CHECK(std::abs(mean - exact.mean) < 0.03);

    const TinarsSpec white{0.0, 4.0};
    Rng rng2(45);
    const CountSeries w = simulate_tinars1(white, 2000, 100, rng2);
    const FitResult fit = fit_tinars1_mle(w);
    REQUIRE(fit.std_errors);
    CHECK(fit.names == std::vector<std::string>{"alpha0", "alpha1"});
    CHECK(std::abs(fit.estimates(1)) < 3.0 * (*fit.std_errors)(1));
    CHECK(std::abs(fit.estimates(0) - 4.0) < 3.0 * (*fit.std_errors)(0));
    CHECK(fit.loglik == doctest::Approx(tinars1_loglik({fit.estimates(1), fit.estimates(0)}, w)));
}

TEST_CASE("bounded one-inflated conditional law") {
    const ModelSpec s = bounded_spec(0.8, 0.7, -0.1, 0.12, 0.01, 5);
    for (double m : {-2.0, 0.0, 0.3, 2.5, 4.9, 9.0}) {
        double total = 0.0;
        for (long x = 0; x <= 5; ++x) total += stbingarch_conditional_pmf(x, m, s);
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
    CHECK_THROWS_AS((void)stbingarch_conditional_pmf(6, 1.0, s), std::domain_error);
    CHECK_THROWS_AS((void)stbingarch_conditional_pmf(-1, 1.0, s), std::domain_error);

    ModelSpec wide = bounded_spec(0.0, 0.0, 0.0, 0.0, 0.4, 400);
    ModelSpec open = wide;
    open.bound.reset();
    open.kappa.reset();
    for (double m : {-1.0, 3.0, 12.0}) {
        for (long x = 0; x < 40; ++x) CHECK(std::abs(stbingarch_conditional_pmf(x, m, wide) - conditional_pmf(x, m, open)) < 1e-10);
    }

    const ModelSpec sharp = bounded_spec(0.0, 0.0, 0.0, 0.0, 0.01, 5);
    double last = 0.0;
    for (double m = 0.5; m < 12.0; m += 0.5) {
        const double top = stbingarch_conditional_pmf(5, m, sharp);
        CHECK(top >= last);
        last = top;
    }

    const ModelSpec binary = bounded_spec(0.3, 0.2, 0.0, 0.1, 0.5, 1);
    CHECK(stbingarch_conditional_pmf(0, 0.6, binary) + stbingarch_conditional_pmf(1, 0.6, binary) == doctest::Approx(1.0));
    const auto mom = stbingarch_conditional_moments(0.6, binary);
    CHECK(mom.variance == doctest::Approx(mom.mean * (1.0 - mom.mean)));
}

TEST_CASE("STBINGARCH self-simulation recovery") {
    const ModelSpec dgp = bounded_spec(0.787, 0.699, -0.127, 0.118, 0.01, 5);
    Rng rng(2024);
    const CountSeries series = simulate(dgp, 2000, 500, rng).series;
    const FitResult fit = fit_stbingarch_mle(series, Orders{1, 1, 0}, 5, 0.01);
    REQUIRE(fit.std_errors);
    CHECK(fit.names == std::vector<std::string>{"alpha0", "alpha1", "beta1", "kappa"});
    const double truth[] = {0.787, 0.699, -0.127, 0.118};
    for (Eigen::Index i = 0; i < 4; ++i) {
        CAPTURE(i);
        CHECK(std::abs(fit.estimates(i) - truth[i]) < 3.0 * (*fit.std_errors)(i));
    }

    const ModelSpec no_inflation = bounded_spec(0.787, 0.699, -0.127, 0.0, 0.01, 5);
    Rng rng2(7);
    const CountSeries s2 = simulate(no_inflation, 1000, 200, rng2).series;
    const FitResult f2 = fit_stbingarch_mle(s2, Orders{1, 1, 0}, 5, 0.01);
    CHECK(f2.estimates(3) >= 0.0);
    CHECK(f2.estimates(3) < 0.05);

    ModelSpec bin = bounded_spec(0.3, 0.3, 0.0, 0.05, 0.5, 1);
    bin.betas.clear();
    Rng rng3(8);
    const CountSeries s3 = simulate(bin, 500, 50, rng3).series;
    for (long x : s3.counts) CHECK((x == 0 || x == 1));
    const FitResult f3 = fit_stbingarch_mle(s3, Orders{1, 0, 0}, 1, 0.5);
    CHECK(std::isfinite(f3.loglik));
}

TEST_CASE("covariates") {
    ModelSpec base;
    base.alpha0 = 2.0;
    base.alphas = {0.3};
    base.delta = 0.5;
    Eigen::MatrixXd z(6, 1);
    z << 1, 0, 0, 1, 1, 0;
    const CountSeries with(std::vector<long>{2, 0, 3, 1, 4, 2}, z);
    const CountSeries without(std::vector<long>{2, 0, 3, 1, 4, 2});
    const ModelSpec design = covariate_design(base, with);
    REQUIRE(design.gammas.size() == 1);
    CHECK(design.gammas[0] == 0.0);
    CHECK(loglik(design, with) == doctest::Approx(loglik(base, without)).epsilon(1e-14));

    // weekday-style regression
    ModelSpec reg;
    reg.alpha0 = 1.239;
    reg.gammas = {2.031};
    reg.delta = 3.458;
    const std::size_t n = 666;
    Eigen::MatrixXd week(static_cast<Eigen::Index>(n), 1);
    for (std::size_t t = 0; t < n; ++t) week(static_cast<Eigen::Index>(t), 0) = (t % 7 < 5) ? 1.0 : 0.0;
    Rng rng(3);
    const CountSeries sim = simulate(reg, n, 0, rng, week).series;
    const FitResult fit = fit_mle(sim, Orders{0, 0, 1}, Scenario::estimated(1.0));
    REQUIRE(fit.std_errors);
    const double truth[] = {1.239, 2.031, 3.458};
    for (Eigen::Index i = 0; i < 3; ++i) {
        CAPTURE(i);
        CHECK(std::abs(fit.estimates(i) - truth[i]) < 3.0 * (*fit.std_errors)(i));
    }

    const std::vector<long> head(sim.counts.begin(), sim.counts.begin() + 120);
    const CountSeries flat(head, Eigen::MatrixXd::Ones(120, 1));
    const FitResult collinear = fit_mle(flat, Orders{0, 0, 1}, Scenario::fixed(3.458));
    CHECK_FALSE(collinear.hessian_invertible);
    CHECK_FALSE(collinear.std_errors.has_value());
}
