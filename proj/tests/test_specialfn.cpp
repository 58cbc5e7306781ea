#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "stobit/specialfn.hpp"

using namespace stobit::specialfn;

TEST_CASE("log Bessel I at trivial arguments") {
    CHECK(log_bessel_i(0, 0.0).log_magnitude == 0.0);
    CHECK(log_bessel_i(3, 0.0).is_zero());
    CHECK(log_bessel_i(3, 0.0).value() == 0.0);
    CHECK_THROWS_AS((void)log_bessel_i(0, -1.0), std::domain_error);
}

TEST_CASE("log Bessel I matches direct long double series") {
    CHECK(log_bessel_i(0, 1.0).value() == doctest::Approx(1.2660658777520084).epsilon(1e-15));
    for (int n : {0, 1, 2, 5, 10, 25, 60}) {
        for (double z : {1e-6, 0.01, 0.5, 1.0, 3.0, 10.0, 30.0, 75.0, 200.0}) {
            const long double ref = std::log(oracle::bessel_i(n, z));
            CAPTURE(n);
            CAPTURE(z);
            CHECK(std::abs(log_bessel_i(n, z).log_magnitude - static_cast<double>(ref)) <= 1e-12 * std::max(1.0, std::abs(static_cast<double>(ref))));
        }
    }
}

TEST_CASE("negative order mirrors positive order") {
    CHECK(log_bessel_i(-1, 2.0).log_magnitude == log_bessel_i(1, 2.0).log_magnitude);
    CHECK(log_bessel_i(-7, 3.3).log_magnitude == log_bessel_i(7, 3.3).log_magnitude);
}

TEST_CASE("three-term recurrence residual vanishes") {
    CHECK(std::abs(bessel_recurrence_residual(1, 1.0)) <= 1e-12 * log_bessel_i(0, 1.0).value());
    CHECK(std::abs(bessel_recurrence_residual(0, 2.0)) <= 1e-12);
    CHECK(std::abs(bessel_recurrence_residual(5, 0.5)) <= 1e-10 * log_bessel_i(4, 0.5).value());
    for (int n = 0; n <= 40; n += 4) {
        for (double z : {0.3, 2.0, 9.0, 25.0}) {
            const double scale = log_bessel_i(n - 1, z).value() + log_bessel_i(n + 1, z).value();
            CHECK(std::abs(bessel_recurrence_residual(n, z)) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("derivative identities against finite differences") {
    // I_n' = (I_{n-1} + I_{n+1}) / 2 and I_n' = I_{n+1} + (n/z) I_n
    for (int n : {0, 1, 3, 8}) {
        for (double z : {0.5, 2.0, 7.0, 20.0}) {
            const double h = 1e-5 * z;
            const double fd = (log_bessel_i(n, z + h).value() - log_bessel_i(n, z - h).value()) / (2.0 * h);
            const double sym = 0.5 * (log_bessel_i(n - 1, z).value() + log_bessel_i(n + 1, z).value());
            const double up = log_bessel_i(n + 1, z).value() + n / z * log_bessel_i(n, z).value();
            CAPTURE(n);
            CAPTURE(z);
            CHECK(std::abs(fd - sym) <= 1e-6 * std::abs(sym));
            CHECK(std::abs(up - sym) <= 1e-12 * std::abs(sym));
        }
    }
}

TEST_CASE("regularized incomplete gamma") {
    CHECK(reg_incomplete_gamma_lower(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(reg_incomplete_gamma_lower(0.5, 0.0) == 0.0);
    CHECK_THROWS_AS((void)reg_incomplete_gamma_lower(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)reg_incomplete_gamma_lower(-1.0, 1.0), std::domain_error);

    const double s = 2.5;
    const double x = 3.7;
    const double integral = oracle::simpson([s](double t) { return std::pow(t, s - 1.0) * std::exp(-t); }, 0.0, x, 20000);
    CHECK(std::abs(reg_incomplete_gamma_lower(s, x) - integral / std::tgamma(s)) < 1e-10);
    for (double a : {0.5, 3.0, 40.0}) {
        for (double y : {0.1, 2.0, 45.0}) {
            CHECK(reg_incomplete_gamma_lower(a, y) + reg_incomplete_gamma_upper(a, y) == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("noncentral chi-square CDF") {
    CHECK(noncentral_chisq_cdf(0.0, 2.0, 5.0) == 0.0);
    CHECK(std::abs(noncentral_chisq_cdf(500.0, 2.0, 5.0) - 1.0) < 1e-12);
    for (double x : {0.5, 3.0, 10.0}) {
        CHECK(noncentral_chisq_cdf(x, 3.0, 0.0) == doctest::Approx(reg_incomplete_gamma_lower(1.5, x / 2.0)).epsilon(1e-13));
    }

    // (Z1 + sqrt(tau))^2 + Z2^2 + Z3^2 for nu = 3
    std::mt19937_64 engine(20240611);
    std::normal_distribution<double> normal;
    const double shift = std::sqrt(2.0);
    const long draws = 10'000'000;
    long hits = 0;
    for (long i = 0; i < draws; ++i) {
        const double a = normal(engine) + shift;
        const double b = normal(engine);
        const double c = normal(engine);
        hits += (a * a + b * b + c * c <= 4.0) ? 1 : 0;
    }
    const double p_hat = static_cast<double>(hits) / static_cast<double>(draws);
    const double se = std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(draws));
    CHECK(std::abs(noncentral_chisq_cdf(4.0, 3.0, 2.0) - p_hat) <= 3.0 * se);
}

TEST_CASE("Poisson helpers") {
    CHECK(poisson_log_pmf(-1, 2.0) == -std::numeric_limits<double>::infinity());
    CHECK(std::exp(poisson_log_pmf(3, 2.0)) == doctest::Approx(std::exp(-2.0) * 8.0 / 6.0).epsilon(1e-14));
    double sum = 0.0;
    for (long k = 0; k <= 6; ++k) sum += std::exp(poisson_log_pmf(k, 4.2));
    CHECK(poisson_cdf(6, 4.2) == doctest::Approx(sum).epsilon(1e-13));
}
