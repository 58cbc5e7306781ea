#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "stobit/skellam.hpp"
#include "stobit/specialfn.hpp"

using namespace stobit;
using namespace stobit::skellam;

TEST_CASE("pmf at known points") {
    CHECK(pmf(0, SkellamParams(0.5, 0.5)) == doctest::Approx(0.465759608).epsilon(1e-9));
    CHECK(pmf(0, SkellamParams(0.5, 0.5)) == doctest::Approx(std::exp(-1.0) * 1.2660658777520084).epsilon(1e-14));
    const SkellamParams sym(1.7, 1.7);
    for (long x = 1; x < 12; ++x) CHECK(pmf(-x, sym) == doctest::Approx(pmf(x, sym)).epsilon(1e-14));
    const SkellamParams p(2.0, 1.0);
    CHECK(pmf(-2, p) == doctest::Approx(pmf(2, p) / 4.0).epsilon(1e-13));
}

TEST_CASE("pmf matches Poisson convolution") {
    for (double l1 : {0.05, 0.7, 3.0, 11.0}) {
        for (double l2 : {0.02, 1.0, 6.5}) {
            const SkellamParams p(l1, l2);
            for (long x = -25; x <= 25; ++x) {
                const double ref = static_cast<double>(oracle::skellam_pmf(x, l1, l2));
                CAPTURE(l1);
                CAPTURE(l2);
                CAPTURE(x);
                CHECK(std::abs(pmf(x, p) - ref) <= 1e-12 * ref + 1e-300);
            }
        }
    }
}

TEST_CASE("star parametrization and Poisson boundary") {
    const SkellamStar s(-2.0, 0.5);
    CHECK(s.lambda1() == doctest::Approx(0.25));
    CHECK(s.lambda2() == doctest::Approx(2.25));
    const SkellamStar pois(3.0, 0.0);
    CHECK(pois.is_poisson_boundary());
    CHECK(pmf(2, pois) == doctest::Approx(std::exp(-3.0) * 4.5).epsilon(1e-14));
    CHECK(pmf(-1, pois) == 0.0);
    const SkellamStar neg(-3.0, 0.0);
    CHECK(pmf(-2, neg) == doctest::Approx(std::exp(-3.0) * 4.5).epsilon(1e-14));
    CHECK_THROWS_AS((void)pois.to_params(), std::domain_error);
}

TEST_CASE("cdf equals pmf partial sums") {
    for (double l1 : {0.01, 0.4, 2.0, 7.5, 20.0}) {
        for (double l2 : {0.01, 1.3, 9.0, 20.0}) {
            const SkellamParams p(l1, l2);
            double partial = 0.0;
            for (long x = -300; x < -30; ++x) partial += pmf(x, p);
            for (long x = -30; x <= 30; ++x) {
                partial += pmf(x, p);
                CAPTURE(l1);
                CAPTURE(l2);
                CAPTURE(x);
                CHECK(std::abs(cdf(x, p) - partial) <= 1e-10);
                CHECK(std::abs(sf(x, p) - (1.0 - partial)) <= 1e-10);
            }
        }
    }
    const SkellamParams sym(2.0, 2.0);
    CHECK(cdf(0, sym) == doctest::Approx((1.0 + pmf(0, sym)) / 2.0).epsilon(1e-13));
    CHECK(cdf(-50, SkellamParams(1.0, 1.0)) < 1e-12);
}

TEST_CASE("sampling moments") {
    Rng rng(17);
    const long draws = 1'000'000;
    {
        const SkellamParams p(0.5, 0.5);
        double sum = 0.0;
        for (long i = 0; i < draws; ++i) sum += static_cast<double>(sample(p, rng));
        CHECK(std::abs(sum / draws) <= 4.0 * std::sqrt(1.0 / draws));
    }
    {
        const SkellamParams p(3.0, 1.0);
        double sum = 0.0;
        double sq = 0.0;
        for (long i = 0; i < draws; ++i) {
            const double x = static_cast<double>(sample(p, rng));
            sum += x;
            sq += x * x;
        }
        const double mean = sum / draws;
        const double var = sq / draws - mean * mean;
        // Var of the sample variance is about (mu4 - sigma^4) / n with mu4 = 3 sigma^4 + sigma^2.
        const double se = std::sqrt((2.0 * 16.0 + 4.0) / draws);
        CHECK(std::abs(var - 4.0) <= 4.0 * se);
    }
}

TEST_CASE("Stein identity") {
    const auto nat = [](long x) { return x >= 0 ? 1.0 : 0.0; };
    {
        const auto [lhs, rhs] = stein_lhs_rhs(nat, SkellamParams(2.0, 1.0), 80);
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
    {
        const auto [lhs, rhs] = stein_lhs_rhs([](long) { return 1.0; }, SkellamParams(2.0, 1.0), 80);
        CHECK(lhs == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rhs == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (const auto& p : {SkellamParams(1.0, 2.0), SkellamParams(0.3, 6.0), SkellamParams(9.0, 0.2)}) {
        const auto [lhs, rhs] = stein_lhs_rhs([](long x) { return x >= 0 ? static_cast<double>(x) : 0.0; }, p, 120);
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
    CHECK_THROWS((void)stein_lhs_rhs(nat, SkellamParams(20.0, 20.0), 5));
}

TEST_CASE("censored moments match brute force on a grid") {
    for (double mu = -12.0; mu <= 12.0; mu += 0.75) {
        for (double delta : {0.0, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0}) {
            const SkellamStar star(mu, delta);
            double m1 = 0.0;
            double m2 = 0.0;
            for (long x = 1; x <= 400; ++x) {
                const double p = pmf(x, star);
                m1 += static_cast<double>(x) * p;
                m2 += static_cast<double>(x) * static_cast<double>(x) * p;
            }
            const CensoredMoments cm = censored_moments(star);
            CAPTURE(mu);
            CAPTURE(delta);
            CHECK(std::abs(cm.mean - m1) <= 1e-9 * std::max(m1, 1e-300) + 1e-300);
            CHECK(std::abs(cm.second_moment - m2) <= 1e-9 * std::max(m2, 1e-300) + 1e-300);
        }
    }
}

TEST_CASE("censored moments special cases") {
    const CensoredMoments cm = censored_moments(SkellamStar(0.0, 1.0));
    const double i0 = specialfn::log_bessel_i(0, 1.0).value();
    const double i1 = specialfn::log_bessel_i(1, 1.0).value();
    CHECK(cm.mean == doctest::Approx(0.5 * std::exp(-1.0) * (i0 + i1)).epsilon(1e-13));
    CHECK(cm.second_moment == doctest::Approx(0.5).epsilon(1e-13));
    const CensoredMoments tiny = censored_moments(SkellamStar(0.0, 1e-8));
    CHECK(tiny.mean < 1e-7);
    CHECK(tiny.variance < 1e-7);
}
