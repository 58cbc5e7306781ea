#include <doctest.h>

#include <cmath>
#include <vector>

#include "reference_tables.hpp"
#include "stobit/diagnostics.hpp"
#include "stobit/skellam.hpp"
#include "stobit/specialfn.hpp"
#include "stobit/stingarch.hpp"

using namespace stobit;

namespace {

ModelSpec make_spec(double a0, std::vector<double> alphas, std::vector<double> betas, double delta) {
    ModelSpec s;
    s.alpha0 = a0;
    s.alphas = std::move(alphas);
    s.betas = std::move(betas);
    s.delta = delta;
    return s;
}

}  // namespace

TEST_CASE("stationarity condition") {
    const auto a = check_stationarity(make_spec(8.75, {-0.75}, {}, 0.25));
    CHECK(a.stationary);
    CHECK(a.margin == doctest::Approx(1.0));
    const auto b = check_stationarity(make_spec(4.0, {0.45}, {-0.25}, 0.25));
    CHECK(b.stationary);
    CHECK(b.margin == doctest::Approx(0.30));
    CHECK_FALSE(check_stationarity(make_spec(1.0, {1.0}, {}, 0.25)).stationary);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(make_spec(1.0, {0.5}, {}, -0.1).validate(), std::invalid_argument);
    ModelSpec bounded = make_spec(1.0, {0.5}, {}, 0.1);
    bounded.bound = 0;
    CHECK_THROWS_AS(bounded.validate(), std::invalid_argument);
    bounded.bound = 5;
    bounded.kappa = 1.0;
    CHECK_THROWS_AS(bounded.validate(), std::invalid_argument);
    bounded.kappa = 0.2;
    CHECK_NOTHROW(bounded.validate());
}

TEST_CASE("conditional mean path") {
    const ModelSpec iid = make_spec(3.25, {}, {}, 0.25);
    const CountSeries s(std::vector<long>{1, 7, 0, 2});
    for (double m : conditional_mean_path(iid, s)) CHECK(m == 3.25);

    const ModelSpec ar = make_spec(7.5, {-0.5}, {}, 0.25);
    const CountSeries two(std::vector<long>{4, 20});
    const auto path = conditional_mean_path(ar, two);
    REQUIRE(path.size() == 2);
    CHECK(path[1] == doctest::Approx(5.5));
    CHECK(one_step_forecast(ar, two, path) == doctest::Approx(-2.5));

    const ModelSpec garch = make_spec(1.0, {0.3}, {0.5}, 0.25);
    const CountSeries three(std::vector<long>{2, 4, 1});
    const auto gp = conditional_mean_path(garch, three);
    CHECK(gp[0] == 1.0);
    CHECK(gp[1] == doctest::Approx(1.0 + 0.3 * 2 + 0.5 * 1.0));
    CHECK(gp[2] == doctest::Approx(1.0 + 0.3 * 4 + 0.5 * gp[1]));
    const auto gm = conditional_mean_path(garch, three, MeanInit::MarginalMean);
    CHECK(gm[0] == doctest::Approx(1.0 / 0.2));
}

TEST_CASE("conditional pmf normalizes") {
    for (double m : {-3.0, 0.0, 5.0}) {
        const ModelSpec s = make_spec(0.0, {}, {}, 0.25);
        double total = 0.0;
        for (long x = 0; x <= 200; ++x) total += conditional_pmf(x, m, s);
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
    const ModelSpec unit = make_spec(0.0, {}, {}, 1.0);
    const double i0 = specialfn::log_bessel_i(0, 1.0).value();
    CHECK(conditional_pmf(0, 0.0, unit) == doctest::Approx((1.0 + std::exp(-1.0) * i0) / 2.0).epsilon(1e-13));
    CHECK_THROWS_AS((void)conditional_pmf(-1, 1.0, unit), std::domain_error);
}

TEST_CASE("conditional moments agree with censored moments") {
    const ModelSpec s = make_spec(0.0, {}, {}, 0.5);
    const auto cm = conditional_moments(2.0, s);
    double m1 = 0.0;
    double m2 = 0.0;
    for (long x = 1; x < 200; ++x) {
        m1 += x * conditional_pmf(x, 2.0, s);
        m2 += static_cast<double>(x * x) * conditional_pmf(x, 2.0, s);
    }
    CHECK(cm.mean == doctest::Approx(m1).epsilon(1e-10));
    CHECK(cm.variance == doctest::Approx(m2 - m1 * m1).epsilon(1e-10));
}

TEST_CASE("simulation reproduces tabulated moments") {
    {
        Rng rng(101);
        const auto sm = simulated_moments(make_spec(7.5, {-0.5}, {}, 0.25), 1'000'000, 3, rng);
        CHECK(std::abs(sm.mean - 5.002) < 0.02);
        CHECK(std::abs(sm.pacf[0] - (-0.498)) < 0.01);
        CHECK(sm.method == MomentMethod::Simulated);
    }
    {
        Rng rng(202);
        const auto sm = simulated_moments(make_spec(1.5, {0.25}, {0.45}, 0.25), 1'000'000, 3, rng);
        CHECK(std::abs(sm.acf[0] - 0.298) < 0.01);
    }
    {
        Rng rng(303);
        const auto sim = simulate(make_spec(5.0, {}, {}, 0.25), 100'000, 100, rng);
        const auto ap = sample_acf_pacf(sim.series.counts, 1);
        CHECK(std::abs(ap.acf[0]) < 4.0 / std::sqrt(100000.0));
        CHECK_FALSE(sim.stationarity_warning);
    }
}

TEST_CASE("simulation is reproducible and flags nonstationary input") {
    const ModelSpec s = make_spec(2.5, {0.5}, {}, 0.25);
    Rng a(9);
    Rng b(9);
    CHECK(simulate(s, 500, 50, a).series.counts == simulate(s, 500, 50, b).series.counts);
    Rng c(1);
    CHECK(simulate(make_spec(0.5, {1.1}, {}, 0.25), 20, 0, c).stationarity_warning);
}

TEST_CASE("exact STINARCH(1) moments") {
    const auto m = exact_moments_stinarch1(make_spec(7.5, {-0.5}, {}, 0.25), 3);
    CHECK(m.method == MomentMethod::ExactMarkov);
    CHECK(std::abs(m.mean - 5.002) < 1e-3);
    CHECK(std::abs(m.dispersion_ratio - 1.391) < 1e-3);
    CHECK(std::abs(m.pacf[0] + 0.498) < 1e-3);
    CHECK(std::abs(m.pacf[1]) < 5e-4);

    const auto big = exact_moments_stinarch1(make_spec(17.5, {-0.75}, {}, 0.25), 3);
    CHECK(std::abs(big.mean - 10.005) < 1e-3);
    CHECK(std::abs(big.dispersion_ratio - 2.297) < 1e-3);
    CHECK(std::abs(big.pacf[0] + 0.744) < 1e-3);

    CHECK_THROWS_AS((void)exact_moments_stinarch1(make_spec(1.0, {0.5}, {0.2}, 0.25), 3), std::invalid_argument);
    CHECK_THROWS_AS((void)exact_moments_stinarch1(make_spec(1.0, {1.2}, {}, 0.25), 3), std::invalid_argument);
}

TEST_CASE("exact moments do not depend on the starting cap") {
    const ModelSpec s = make_spec(2.5, {0.5}, {}, 0.5);
    auto transition = [&s](long y, long x) { return conditional_pmf(y, s.alpha0 + s.alphas[0] * static_cast<double>(x), s); };
    const auto small = markov_chain_moments(transition, 8, 3);
    const auto large = markov_chain_moments(transition, 200, 3);
    CHECK(std::abs(small.mean - large.mean) < 1e-9);
    CHECK(std::abs(small.dispersion_ratio - large.dispersion_ratio) < 1e-9);
    for (std::size_t h = 0; h < 3; ++h) CHECK(std::abs(small.acf[h] - large.acf[h]) < 1e-9);
}

TEST_CASE("tabulated exact and linear STINARCH(1) rows") {
    auto check_table = [](const auto& table) {
        for (const auto& row : table) {
            const ModelSpec s = make_spec(row.alpha0, {row.alpha1}, {}, row.delta);
            const auto ex = exact_moments_stinarch1(s, 3);
            const auto lin = linear_approx_moments(s, 3);
            CAPTURE(row.alpha0);
            CAPTURE(row.alpha1);
            CAPTURE(row.delta);
            CHECK(std::abs(ex.mean - row.mean_exact) <= 1e-3);
            CHECK(std::abs(ex.dispersion_ratio - row.disp_exact) <= 1e-3);
            CHECK(std::abs(lin.mean - row.mean_lin) <= 1e-3);
            CHECK(std::abs(lin.dispersion_ratio - row.disp_lin) <= 1e-3);
            for (std::size_t h = 0; h < 3; ++h) {
                CHECK(std::abs(ex.pacf[h] - row.pacf_exact[h]) <= 1e-3);
                CHECK(std::abs(lin.pacf[h] - row.pacf_lin[h]) <= 1e-3);
            }
        }
    };
    check_table(reference::kInarchMean5);
    check_table(reference::kInarchMean10);
}

TEST_CASE("tabulated linear STINGARCH(1,1) rows") {
    for (const auto& row : reference::kIngarchMean5) {
        const auto lin = linear_approx_moments(make_spec(row.alpha0, {row.alpha1}, {row.beta1}, row.delta), 3);
        CAPTURE(row.alpha0);
        CAPTURE(row.alpha1);
        CAPTURE(row.beta1);
        CAPTURE(row.delta);
        CHECK(std::abs(lin.mean - row.mean_lin) <= 1e-3);
        CHECK(std::abs(lin.dispersion_ratio - row.disp_lin) <= 1e-3);
        for (std::size_t h = 0; h < 3; ++h) CHECK(std::abs(lin.acf[h] - row.acf_lin[h]) <= 1e-3);
    }
    const auto l = linear_approx_moments(make_spec(8.5, {-0.45}, {-0.25}, 0.25), 3);
    CHECK(l.dispersion_ratio == doctest::Approx(1.464).epsilon(1e-3));
    CHECK(l.acf[0] == doctest::Approx(-0.521).epsilon(2e-3));
}

TEST_CASE("linear approximation without dependence") {
    const auto l = linear_approx_moments(make_spec(5.0, {0.0}, {}, 0.7), 4);
    for (double r : l.acf) CHECK(r == 0.0);
    CHECK_THROWS_AS((void)linear_approx_moments(make_spec(5.0, {0.1, 0.1}, {}, 0.7), 2), std::invalid_argument);
}
