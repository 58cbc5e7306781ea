#pragma once

#include <cstddef>

#include "stobit/diagnostics.hpp"
#include "stobit/estimation.hpp"
#include "stobit/rng.hpp"
#include "stobit/stingarch.hpp"

namespace stobit {

/// Poisson Tobit INARS(1): X_t = max{0, alpha1 (.) X_{t-1} + eps_t}, eps_t ~ Poi(innovation_mean),
/// with signed binomial thinning (.).
struct TinarsSpec {
    double alpha1 = 0.0;
    double innovation_mean = 1.0;

    void validate() const;
};

/// Draws sgn(alpha) sgn(x) Bin(|x|, |alpha|), with sgn(0) = +1.
[[nodiscard]] long signed_binomial_thinning(double alpha, long x, Rng& rng);

[[nodiscard]] CountSeries simulate_tinars1(const TinarsSpec& spec, std::size_t n, std::size_t burn_in, Rng& rng);

/// P(X_t = next | X_{t-1} = prev).
[[nodiscard]] double tinars1_transition(long next, long prev, const TinarsSpec& spec);

/// Conditional log-likelihood, conditioning on the first observation.
[[nodiscard]] double tinars1_loglik(const TinarsSpec& spec, const CountSeries& series);

/// Stationary mean, dispersion ratio, ACF and PACF from the Markov chain.
[[nodiscard]] MomentSummary tinars1_moments(const TinarsSpec& spec, std::size_t max_lag);

[[nodiscard]] ResidualReport tinars1_pearson_residuals(const TinarsSpec& spec, const CountSeries& series,
                                                       std::size_t max_lag = 5);

/// Estimates (innovation_mean, alpha1), reported under the names alpha0 and alpha1.
[[nodiscard]] FitResult fit_tinars1_mle(const CountSeries& series, const FitOptions& options = {});

/// P(X_t = x | M_t = m) for the clipped-censored model on {0..N} with one-inflation kappa.
[[nodiscard]] double stbingarch_conditional_pmf(long x, double m, const ModelSpec& spec);

struct BoundedMoments {
    double mean;
    double variance;
};

[[nodiscard]] BoundedMoments stbingarch_conditional_moments(double m, const ModelSpec& spec);

[[nodiscard]] double stbingarch_loglik(const ModelSpec& spec, const CountSeries& series);

/// Scenario-1 MLE over (alpha0, alphas, betas, kappa) for bound N and fixed delta.
/// kappa is searched on the logit scale and reported as 0 when the logit falls below -12.
[[nodiscard]] FitResult fit_stbingarch_mle(const CountSeries& series, const Orders& orders, long bound, double delta,
                                           const FitOptions& options = {});

/// Spec whose mean recursion carries one coefficient per covariate column of `series`
/// (zeros unless `base` already has the right number). Throws on dimension mismatch.
[[nodiscard]] ModelSpec covariate_design(const ModelSpec& base, const CountSeries& series);

}  // namespace stobit
