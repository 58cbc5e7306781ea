#include "stobit/skellam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "stobit/specialfn.hpp"

namespace stobit::skellam {

namespace sf_ = stobit::specialfn;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of the Chernoff bound on P(Y >= a) for Y ~ Sk(l1, l2) (l2 may be zero), a > mean.
double log_upper_chernoff(double l1, double l2, double a) {
    if (l1 == 0.0) return a > 0.0 ? kNegInf : 0.0;
    const double es = (l2 > 0.0) ? (a + std::sqrt(a * a + 4.0 * l1 * l2)) / (2.0 * l1) : a / l1;
    if (!(es > 1.0)) return 0.0;
    const double s = std::log(es);
    return l1 * (es - 1.0) + l2 * (1.0 / es - 1.0) - s * a;
}

long radius_for_rates(double l1, double l2, double tail) {
    const double mean = l1 - l2;
    const double sd = std::sqrt(l1 + l2);
    const double log_target = std::log(0.5 * tail);
    long r = static_cast<long>(std::ceil(std::abs(mean) + sd)) + 1;
    for (;; ++r) {
        const bool upper_ok = r <= mean || log_upper_chernoff(l1, l2, r) < log_target;
        const bool lower_ok = -r >= mean || log_upper_chernoff(l2, l1, r) < log_target;
        if (r > mean && -r < mean && upper_ok && lower_ok) return r;
    }
}

}  // namespace

SkellamParams::SkellamParams(double l1, double l2) : lambda1(l1), lambda2(l2) {
    if (!(l1 > 0.0) || !(l2 > 0.0) || !std::isfinite(l1) || !std::isfinite(l2)) {
        throw std::domain_error("SkellamParams: rates must be positive and finite");
    }
}

SkellamStar::SkellamStar(double m, double d) : mu(m), delta(d) {
    if (!(d >= 0.0) || !std::isfinite(d) || !std::isfinite(m)) {
        throw std::domain_error("SkellamStar: need finite mean and nonnegative dispersion");
    }
}

double SkellamStar::lambda1() const { return 0.5 * (std::abs(mu) + mu + delta); }
double SkellamStar::lambda2() const { return 0.5 * (std::abs(mu) - mu + delta); }

SkellamParams SkellamStar::to_params() const { return {lambda1(), lambda2()}; }

double log_pmf(long x, const SkellamParams& params) {
    const double l1 = params.lambda1;
    const double l2 = params.lambda2;
    const double z = 2.0 * std::sqrt(l1 * l2);
    const auto bessel = sf_::log_bessel_i(static_cast<int>(std::labs(x)), z);
    return -l1 - l2 + 0.5 * static_cast<double>(x) * (std::log(l1) - std::log(l2)) + bessel.log_magnitude;
}

double pmf(long x, const SkellamParams& params) { return std::exp(log_pmf(x, params)); }

double log_pmf(long x, const SkellamStar& star) {
    const double m = star.mu;
    const double d = star.delta;
    if (star.is_poisson_boundary()) {
        if (m >= 0.0) return sf_::poisson_log_pmf(x, m);
        return sf_::poisson_log_pmf(-x, -m);
    }
    // Branch form: a = 2|m| + d, the Bessel argument is sqrt(d * a).
    const double a = 2.0 * std::abs(m) + d;
    const double z = std::sqrt(d * a);
    const double sign = m >= 0.0 ? 1.0 : -1.0;
    const auto bessel = sf_::log_bessel_i(static_cast<int>(std::labs(x)), z);
    return -std::abs(m) - d + sign * 0.5 * static_cast<double>(x) * (std::log(a) - std::log(d)) +
           bessel.log_magnitude;
}

double pmf(long x, const SkellamStar& star) { return std::exp(log_pmf(x, star)); }

double cdf(long x, const SkellamParams& params) {
    const double l1 = params.lambda1;
    const double l2 = params.lambda2;
    if (x <= -1) return sf_::noncentral_chisq_cdf(2.0 * l2, -2.0 * static_cast<double>(x), 2.0 * l1);
    if (x >= 1) return 1.0 - sf_::noncentral_chisq_cdf(2.0 * l1, 2.0 * (static_cast<double>(x) + 1.0), 2.0 * l2);
    return std::min(1.0, cdf(-1, params) + pmf(0, params));
}

double sf(long x, const SkellamParams& params) {
    if (x >= 0) {
        return sf_::noncentral_chisq_cdf(2.0 * params.lambda1, 2.0 * (static_cast<double>(x) + 1.0),
                                         2.0 * params.lambda2);
    }
    const double lower = cdf(x, params);
    if (lower <= 0.5) return 1.0 - lower;
    double upper = sf(0, params);
    for (long k = 0; k > x; --k) upper += pmf(k, params);
    return std::min(1.0, upper);
}

double cdf(long x, const SkellamStar& star) {
    if (star.is_poisson_boundary()) {
        if (star.mu >= 0.0) return sf_::poisson_cdf(x, star.mu);
        return 1.0 - sf_::poisson_cdf(-x - 1, -star.mu);
    }
    return cdf(x, star.to_params());
}

double sf(long x, const SkellamStar& star) {
    if (star.is_poisson_boundary()) {
        if (star.mu >= 0.0) return x < 0 ? 1.0 : sf_::reg_incomplete_gamma_lower(x + 1.0, star.mu);
        return sf_::poisson_cdf(-x - 1, -star.mu);
    }
    return sf(x, star.to_params());
}

long sample(const SkellamParams& params, Rng& rng) {
    const long a = rng.poisson(params.lambda1);
    const long b = rng.poisson(params.lambda2);
    return a - b;
}

long sample(const SkellamStar& star, Rng& rng) {
    const long a = rng.poisson(star.lambda1());
    const long b = rng.poisson(star.lambda2());
    return a - b;
}

std::pair<double, double> stein_lhs_rhs(const std::function<double(long)>& f, const SkellamParams& params,
                                        long support_radius) {
    if (support_radius < 1) throw std::invalid_argument("stein_lhs_rhs: radius must be positive");
    double mass = 0.0;
    double lhs = 0.0;
    double shifted_up = 0.0;
    double shifted_down = 0.0;
    for (long x = -support_radius; x <= support_radius; ++x) {
        const double p = pmf(x, params);
        mass += p;
        lhs += static_cast<double>(x) * f(x) * p;
        shifted_up += f(x + 1) * p;
        shifted_down += f(x - 1) * p;
    }
    if (1.0 - mass > 1e-12) throw std::runtime_error("stein_lhs_rhs: support radius leaves tail mass above 1e-12");
    return {lhs, params.lambda1 * shifted_up - params.lambda2 * shifted_down};
}

CensoredMoments censored_moments(const SkellamStar& star) {
    const double m = star.mu;
    if (star.is_poisson_boundary()) {
        if (m <= 0.0) return {0.0, 0.0, 0.0, 1.0};
        return {m, m + m * m, m, std::exp(-m)};
    }
    const SkellamParams params = star.to_params();
    const double l1 = params.lambda1;
    const double l2 = params.lambda2;
    const double var = params.variance();

    const double p0 = pmf(0, params);
    const double p1 = pmf(1, params);
    const double ge1 = sf(0, params);
    const double ge0 = ge1 + p0;

    const double mean = m * ge0 + l2 * (p0 + p1);
    const double second = (var + m * m) * ge1 + l2 * m * p1 + l1 * (1.0 + m) * p0;
    const double variance = std::max(0.0, second - mean * mean);
    return {mean, second, variance, cdf(0, params)};
}

long truncation_radius(const SkellamParams& params, double tail) {
    return radius_for_rates(params.lambda1, params.lambda2, tail);
}

long truncation_radius(const SkellamStar& star, double tail) {
    return radius_for_rates(star.lambda1(), star.lambda2(), tail);
}

}  // namespace stobit::skellam
