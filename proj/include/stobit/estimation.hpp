#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stobit/stingarch.hpp"

namespace stobit {

enum class FitMethod { MleScenario1, MleScenario2, Clade, Cls, TinarsMle, StbingarchMle };

[[nodiscard]] std::string to_string(FitMethod method);

struct Orders {
    std::size_t p = 1;
    std::size_t q = 0;
    std::size_t r = 0;
};

/// Scenario 1 keeps delta fixed as a tuning constant; scenario 2 estimates it.
struct Scenario {
    bool estimate_delta = false;
    double delta = 0.25;  ///< fixed value (scenario 1) or starting value (scenario 2)

    static Scenario fixed(double d) { return {false, d}; }
    static Scenario estimated(double start = 0.25) { return {true, start}; }
};

struct FitOptions {
    int max_evaluations = 4000;
    bool newton_polish = true;
    int restarts = 8;              ///< jittered restarts for CLADE and CLS
    std::uint64_t jitter_seed = 0x5eed;
    std::optional<Eigen::VectorXd> start;  ///< user start on the parameter scale
};

struct FitResult {
    Eigen::VectorXd estimates;
    std::vector<std::string> names;
    std::optional<Eigen::VectorXd> std_errors;
    double loglik = 0.0;
    double objective = 0.0;  ///< minimized criterion (negative loglik for MLE)
    double aic = 0.0;
    double bic = 0.0;
    bool hessian_invertible = false;
    int iterations = 0;
    bool converged = false;
    FitMethod method = FitMethod::MleScenario1;
    std::size_t n_effective = 0;  ///< sample size entering the BIC penalty
    Eigen::MatrixXd hessian;      ///< Hessian of the log-likelihood at the estimate (MLE only)
};

/// Parameter names in theta order: alpha0, alpha1..p, beta1..q, gamma1..r, then delta in scenario 2.
[[nodiscard]] std::vector<std::string> parameter_names(const Orders& orders, const Scenario& scenario);

[[nodiscard]] ModelSpec spec_from_theta(const Eigen::VectorXd& theta, const Orders& orders, const Scenario& scenario);
[[nodiscard]] Eigen::VectorXd theta_from_spec(const ModelSpec& spec, const Scenario& scenario);

/// Conditional log-likelihood of an unbounded spec, conditioning on the first max(p, q) observations.
/// Returns -inf when a term has zero probability.
[[nodiscard]] double loglik(const ModelSpec& spec, const CountSeries& series);
[[nodiscard]] double loglik(const Eigen::VectorXd& theta, const CountSeries& series, const Orders& orders,
                            const Scenario& scenario);

/// Derivatives of one log-likelihood term ln P(X_t = x | M_t = m) in (m, delta).
/// For x > 0 this is the Skellam branch form; for x = 0 it is ln of the summed PMF over x* <= 0.
struct TermDerivatives {
    double value = 0.0;
    double d_m = 0.0;
    double d_delta = 0.0;
    double d_mm = 0.0;
    double d_mdelta = 0.0;
    double d_deltadelta = 0.0;
};

[[nodiscard]] TermDerivatives term_derivatives(long x, double m, double delta);

struct ScoreHessian {
    double loglik = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
    Eigen::MatrixXd outer_scores;  ///< sum over t of s_t s_t^T
    std::size_t knife_edge_count = 0;  ///< terms evaluated with M_t exactly zero
};

/// Analytic gradient and Hessian of the log-likelihood with respect to theta,
/// including the derivative recursions of M_t.
[[nodiscard]] ScoreHessian analytic_score_hessian(const Eigen::VectorXd& theta, const CountSeries& series,
                                                  const Orders& orders, const Scenario& scenario);

/// V = (1/T) sum s_t s_t^T and U = -(1/T) H with T the number of likelihood terms.
struct SandwichMatrices {
    Eigen::MatrixXd v;
    Eigen::MatrixXd u;
};

[[nodiscard]] SandwichMatrices sandwich_matrices(const Eigen::VectorXd& theta, const CountSeries& series,
                                                 const Orders& orders, const Scenario& scenario);

/// Start from the linear-moment relations: alpha1 from the lag-1 sample ACF, alpha0 from the sample mean.
[[nodiscard]] Eigen::VectorXd moment_start(const CountSeries& series, const Orders& orders, const Scenario& scenario);

[[nodiscard]] FitResult fit_mle(const CountSeries& series, const Orders& orders, const Scenario& scenario,
                                const FitOptions& options = {});

/// Minimizes sum |X_t - max{0, M_t}| over alpha0, alphas, betas, gammas.
[[nodiscard]] FitResult fit_clade(const CountSeries& series, const Orders& orders, const FitOptions& options = {});

/// Minimizes sum (X_t - max{0, M_t})^2 over alpha0, alphas, betas, gammas.
[[nodiscard]] FitResult fit_cls(const CountSeries& series, const Orders& orders, const FitOptions& options = {});

struct McMethodSummary {
    FitMethod method = FitMethod::MleScenario1;
    std::vector<std::string> names;
    std::size_t successes = 0;
    std::size_t failures = 0;
    std::size_t non_converged = 0;
    std::size_t hessian_non_invertible = 0;
    Eigen::VectorXd mean;
    Eigen::VectorXd simulated_se;  ///< standard deviation of estimates (n - 1 denominator)
    Eigen::VectorXd mean_approx_se;  ///< over replications with an invertible Hessian
};

struct McStudyConfig {
    ModelSpec dgp;
    std::size_t n = 1000;
    std::size_t replications = 1000;
    std::size_t burn_in = 500;
    std::vector<FitMethod> methods = {FitMethod::MleScenario1};
    Scenario scenario = Scenario::fixed(0.25);
    std::uint64_t seed = 1;
    unsigned threads = 0;  ///< 0 -> STOBIT_THREADS or hardware concurrency
};

struct McStudyResult {
    McStudyConfig config;
    std::vector<McMethodSummary> methods;
};

/// Simulates replications from the DGP on independent streams and fits each requested method.
/// Output does not depend on the thread count.
[[nodiscard]] McStudyResult mc_study(const McStudyConfig& config);

/// Thread count from STOBIT_THREADS, falling back to hardware concurrency.
[[nodiscard]] unsigned default_thread_count();

}  // namespace stobit
