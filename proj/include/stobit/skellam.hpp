#pragma once

#include <functional>
#include <utility>

#include "stobit/rng.hpp"

namespace stobit::skellam {

/// Sk(lambda1, lambda2): law of X1 - X2 with independent Poisson components.
struct SkellamParams {
    double lambda1;
    double lambda2;

    SkellamParams(double l1, double l2);

    [[nodiscard]] double mean() const { return lambda1 - lambda2; }
    [[nodiscard]] double variance() const { return lambda1 + lambda2; }
    [[nodiscard]] SkellamParams mirrored() const { return {lambda2, lambda1}; }
};

/// Sk*(mu, delta): mean mu and additive dispersion delta, variance |mu| + delta.
/// delta == 0 is the Poisson boundary: Poi(mu) for mu > 0, -Poi(|mu|) for mu < 0.
struct SkellamStar {
    double mu;
    double delta;

    SkellamStar(double m, double d);

    [[nodiscard]] bool is_poisson_boundary() const { return delta == 0.0; }
    [[nodiscard]] double lambda1() const;
    [[nodiscard]] double lambda2() const;
    /// Throws std::domain_error on the Poisson boundary (one rate is zero).
    [[nodiscard]] SkellamParams to_params() const;
};

/// Moments of max{0, X*}.
struct CensoredMoments {
    double mean;
    double second_moment;
    double variance;
    double prob_zero_or_less;

    [[nodiscard]] double dispersion_ratio() const { return variance / mean; }
};

[[nodiscard]] double log_pmf(long x, const SkellamParams& params);
[[nodiscard]] double pmf(long x, const SkellamParams& params);
[[nodiscard]] double log_pmf(long x, const SkellamStar& star);
[[nodiscard]] double pmf(long x, const SkellamStar& star);

/// P(X* <= x). Uses the noncentral chi-square route for x != 0 and
/// cdf(-1) + pmf(0) at x == 0.
[[nodiscard]] double cdf(long x, const SkellamParams& params);
[[nodiscard]] double cdf(long x, const SkellamStar& star);

/// P(X* > x), evaluated without subtracting from one where a direct route exists.
[[nodiscard]] double sf(long x, const SkellamParams& params);
[[nodiscard]] double sf(long x, const SkellamStar& star);

long sample(const SkellamParams& params, Rng& rng);
long sample(const SkellamStar& star, Rng& rng);

/// Both sides of the Stein identity E[X f(X)] = l1 E[f(X+1)] - l2 E[f(X-1)],
/// by summation over [-radius, radius]. Throws std::runtime_error if the
/// truncated mass exceeds 1e-12.
[[nodiscard]] std::pair<double, double> stein_lhs_rhs(const std::function<double(long)>& f,
                                                      const SkellamParams& params, long support_radius);

/// Partial moments E[X* 1(X*>0)] and E[(X*)^2 1(X*>0)] in closed form.
[[nodiscard]] CensoredMoments censored_moments(const SkellamStar& star);

/// Smallest radius R with Chernoff bound P(|X* - mu| > R) < 1e-13, measured from zero.
[[nodiscard]] long truncation_radius(const SkellamParams& params, double tail = 1e-13);
[[nodiscard]] long truncation_radius(const SkellamStar& star, double tail = 1e-13);

}  // namespace stobit::skellam
