#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stobit/rng.hpp"
#include "stobit/skellam.hpp"

namespace stobit {

/// Order and coefficients of a Skellam-Tobit INGARCH(p, q) model, optionally
/// with covariates, an upper bound N and one-inflation kappa (bounded model).
struct ModelSpec {
    double alpha0 = 0.0;
    std::vector<double> alphas;  ///< alpha_1..alpha_p
    std::vector<double> betas;   ///< beta_1..beta_q
    double delta = 0.25;
    std::vector<double> gammas;  ///< covariate coefficients
    std::optional<long> bound;
    std::optional<double> kappa;

    [[nodiscard]] std::size_t p() const { return alphas.size(); }
    [[nodiscard]] std::size_t q() const { return betas.size(); }
    [[nodiscard]] std::size_t r() const { return gammas.size(); }
    /// Number of leading observations the conditional likelihood conditions on.
    [[nodiscard]] std::size_t conditioning_prefix() const { return std::max(p(), q()); }
    [[nodiscard]] bool is_bounded() const { return bound.has_value(); }

    /// Throws std::invalid_argument when the spec is malformed.
    void validate() const;
};

/// Observed counts x_1..x_n with an optional n x r covariate matrix.
struct CountSeries {
    std::vector<long> counts;
    Eigen::MatrixXd covariates;  ///< n x r; zero columns when absent
    std::vector<std::string> timestamps;

    CountSeries() = default;
    explicit CountSeries(std::vector<long> values);
    CountSeries(std::vector<long> values, Eigen::MatrixXd covs);

    [[nodiscard]] std::size_t size() const { return counts.size(); }
    [[nodiscard]] std::size_t covariate_count() const { return static_cast<std::size_t>(covariates.cols()); }
    [[nodiscard]] std::vector<double> as_doubles() const;

    /// Throws std::invalid_argument for negative counts, counts above `bound`
    /// or a covariate matrix whose row count differs from the series length.
    void validate(std::optional<long> bound = std::nullopt) const;
};

struct StationarityCheck {
    bool stationary;
    double margin;  ///< 1 - (sum max{0, alpha_i} + sum |beta_j|)
};

enum class MomentMethod { ExactMarkov, Simulated, LinearApprox };

[[nodiscard]] std::string to_string(MomentMethod method);

struct MomentSummary {
    double mean = 0.0;
    double dispersion_ratio = 0.0;
    std::vector<double> acf;   ///< acf[h-1] is lag h
    std::vector<double> pacf;  ///< pacf[h-1] is lag h
    MomentMethod method = MomentMethod::LinearApprox;
};

/// How pre-sample conditional means are filled before the recursion has enough history.
enum class MeanInit {
    Alpha0,        ///< M_t = alpha0 for the first max(p, q) steps
    MarginalMean,  ///< M_t = alpha0 / (1 - sum alpha - sum beta) when that is finite
};

[[nodiscard]] StationarityCheck check_stationarity(const ModelSpec& spec);

/// M_t for every observation t. The first max(p, q) entries are the
/// pre-sample initial values; after that
/// M_t = alpha0 + sum alpha_i X_{t-i} + sum beta_j M_{t-j} + sum gamma_k z_{t,k}.
[[nodiscard]] std::vector<double> conditional_mean_path(const ModelSpec& spec, const CountSeries& series,
                                                        MeanInit init = MeanInit::Alpha0);

/// M_{n+1} given the path of `series`; `next_covariates` supplies z_{n+1} when r > 0.
[[nodiscard]] double one_step_forecast(const ModelSpec& spec, const CountSeries& series,
                                       const std::vector<double>& path,
                                       const Eigen::VectorXd& next_covariates = Eigen::VectorXd());

/// P(X_t = x | M_t = m) for the unbounded model: Sk*(m, delta) at x > 0, its CDF at 0 for x = 0.
[[nodiscard]] double conditional_pmf(long x, double m, const ModelSpec& spec);

/// Conditional mean and variance of X_t given M_t = m (unbounded model).
[[nodiscard]] skellam::CensoredMoments conditional_moments(double m, const ModelSpec& spec);

struct SimulationResult {
    CountSeries series;
    bool stationarity_warning = false;
};

/**
 * Simulates a path of length n after discarding `burn_in` steps.
 *
 * Pre-sample means start at alpha0 and pre-sample counts at the rounded,
 * nonnegative linear mean. Bounded specs clip to {0..N} and apply
 * one-inflation. When covariates are given they must have n rows and only
 * enter the retained steps.
 */
[[nodiscard]] SimulationResult simulate(const ModelSpec& spec, std::size_t n, std::size_t burn_in, Rng& rng,
                                        const Eigen::MatrixXd& covariates = Eigen::MatrixXd());

/// Moments of a stationary Markov chain on {0, 1, ...} truncated at a state cap.
/// `transition(y, x)` is P(X_t = y | X_{t-1} = x). The cap starts at `initial_cap`
/// and is doubled until the stationary tail is below 1e-12 and the summary
/// is stable to 1e-10.
[[nodiscard]] MomentSummary markov_chain_moments(const std::function<double(long, long)>& transition,
                                                 long initial_cap, std::size_t max_lag);

/// Exact marginal moments of STINARCH(1) through its Markov chain.
[[nodiscard]] MomentSummary exact_moments_stinarch1(const ModelSpec& spec, std::size_t max_lag);

/// Linear (dispersed INGARCH) approximation for (p, q) in {(1,0), (1,1)}.
[[nodiscard]] MomentSummary linear_approx_moments(const ModelSpec& spec, std::size_t max_lag);

/// Sample moments from one simulated path of length n.
[[nodiscard]] MomentSummary simulated_moments(const ModelSpec& spec, std::size_t n, std::size_t max_lag, Rng& rng,
                                              std::size_t burn_in = 10000);

}  // namespace stobit
