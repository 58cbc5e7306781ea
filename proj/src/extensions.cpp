#include "stobit/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stobit/optimize.hpp"
#include "stobit/specialfn.hpp"

namespace stobit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double binomial_log_pmf(long j, long trials, double prob) {
    if (prob == 0.0) return j == 0 ? 0.0 : kNegInf;
    return std::lgamma(trials + 1.0) - std::lgamma(j + 1.0) - std::lgamma(trials - j + 1.0) +
           static_cast<double>(j) * std::log(prob) + static_cast<double>(trials - j) * std::log1p(-prob);
}

double sign_of(double v) { return v >= 0.0 ? 1.0 : -1.0; }

double tinars_linear_mean(const TinarsSpec& spec) {
    return spec.innovation_mean / (1.0 - std::max(0.0, spec.alpha1));
}

}  // namespace

void TinarsSpec::validate() const {
    if (!(std::abs(alpha1) < 1.0)) throw std::invalid_argument("TINARS(1): |alpha1| must be below 1");
    if (!(innovation_mean > 0.0) || !std::isfinite(innovation_mean)) {
        throw std::invalid_argument("TINARS(1): innovation mean must be positive");
    }
}

long signed_binomial_thinning(double alpha, long x, Rng& rng) {
    if (!(std::abs(alpha) < 1.0)) throw std::domain_error("signed_binomial_thinning: |alpha| must be below 1");
    const long b = rng.binomial(std::labs(x), std::abs(alpha));
    const long sign = (alpha >= 0.0 ? 1 : -1) * (x >= 0 ? 1 : -1);
    return sign * b;
}

CountSeries simulate_tinars1(const TinarsSpec& spec, std::size_t n, std::size_t burn_in, Rng& rng) {
    spec.validate();
    long x = std::lround(tinars_linear_mean(spec));
    std::vector<long> counts;
    counts.reserve(n);
    for (std::size_t step = 0; step < burn_in + n; ++step) {
        x = std::max(0L, signed_binomial_thinning(spec.alpha1, x, rng) + rng.poisson(spec.innovation_mean));
        if (step >= burn_in) counts.push_back(x);
    }
    return CountSeries(std::move(counts));
}

double tinars1_transition(long next, long prev, const TinarsSpec& spec) {
    if (next < 0 || prev < 0) throw std::domain_error("tinars1_transition: counts must be nonnegative");
    const double prob = std::abs(spec.alpha1);
    const double sign = sign_of(spec.alpha1);
    const long top = prob == 0.0 ? 0 : prev;
    double total = 0.0;
    for (long j = 0; j <= top; ++j) {
        const double wb = std::exp(binomial_log_pmf(j, prev, prob));
        if (wb == 0.0) continue;
        const long shift = static_cast<long>(sign) * j;
        if (next > 0) {
            total += wb * std::exp(specialfn::poisson_log_pmf(next - shift, spec.innovation_mean));
        } else {
            total += wb * specialfn::poisson_cdf(-shift, spec.innovation_mean);
        }
    }
    return total;
}

double tinars1_loglik(const TinarsSpec& spec, const CountSeries& series) {
    double total = 0.0;
    for (std::size_t t = 1; t < series.size(); ++t) {
        const double p = tinars1_transition(series.counts[t], series.counts[t - 1], spec);
        if (!(p > 0.0)) return kNegInf;
        total += std::log(p);
    }
    return total;
}

MomentSummary tinars1_moments(const TinarsSpec& spec, std::size_t max_lag) {
    spec.validate();
    const double mu = tinars_linear_mean(spec);
    const auto cap = static_cast<long>(std::ceil(mu + 12.0 * std::sqrt(mu) + 10.0));
    return markov_chain_moments([&](long y, long x) { return tinars1_transition(y, x, spec); }, cap, max_lag);
}

ResidualReport tinars1_pearson_residuals(const TinarsSpec& spec, const CountSeries& series, std::size_t max_lag) {
    spec.validate();
    series.validate();
    std::vector<double> mean(series.size(), 0.0);
    std::vector<double> var(series.size(), 0.0);
    for (std::size_t t = 1; t < series.size(); ++t) {
        const long prev = series.counts[t - 1];
        const double centre = std::max(0.0, spec.alpha1) * static_cast<double>(prev) + spec.innovation_mean;
        const auto top = static_cast<long>(std::ceil(centre + 20.0 * std::sqrt(spec.innovation_mean + prev) + 30.0));
        double m1 = 0.0;
        double m2 = 0.0;
        for (long y = 1; y <= top; ++y) {
            const double p = tinars1_transition(y, prev, spec);
            m1 += p * static_cast<double>(y);
            m2 += p * static_cast<double>(y) * static_cast<double>(y);
        }
        mean[t] = m1;
        var[t] = m2 - m1 * m1;
    }
    return residual_report(series.counts, mean, var, 1, max_lag);
}

FitResult fit_tinars1_mle(const CountSeries& series, const FitOptions& options) {
    series.validate();
    if (series.size() < 3) throw std::invalid_argument("fit_tinars1_mle: series too short");

    const auto spec_of = [](const Eigen::VectorXd& theta) { return TinarsSpec{theta(1), theta(0)}; };
    const auto ll_natural = [&](const Eigen::VectorXd& theta) {
        if (!(theta(0) > 0.0) || !(std::abs(theta(1)) < 1.0)) return kNegInf;
        return tinars1_loglik(spec_of(theta), series);
    };
    // Search on (log innovation mean, atanh alpha1).
    const optimize::Objective objective = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd theta(2);
        theta << std::exp(u(0)), std::tanh(u(1));
        return -ll_natural(theta);
    };

    Eigen::VectorXd theta0(2);
    if (options.start) {
        theta0 = *options.start;
    } else {
        double mean = 0.0;
        for (long v : series.counts) mean += static_cast<double>(v);
        mean /= static_cast<double>(series.size());
        double rho = 0.0;
        try {
            rho = sample_acf_pacf(series.counts, 1).acf[0];
        } catch (const std::invalid_argument&) {
        }
        rho = std::clamp(rho, -0.9, 0.9);
        theta0 << std::max(0.1, mean * (1.0 - rho)), rho;
    }
    Eigen::VectorXd u0(2);
    u0 << std::log(theta0(0)), std::atanh(theta0(1));

    optimize::NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;
    nm.initial_step = Eigen::VectorXd::Constant(2, 0.1);
    optimize::OptimResult res = optimize::nelder_mead(objective, u0, nm);
    nm.initial_step *= 0.2;
    const optimize::OptimResult res2 = optimize::nelder_mead(objective, res.x, nm);
    const int iterations = res.iterations + res2.iterations;
    if (res2.value <= res.value) res = res2;

    FitResult out;
    out.method = FitMethod::TinarsMle;
    out.names = {"alpha0", "alpha1"};
    out.estimates = Eigen::VectorXd(2);
    out.estimates << std::exp(res.x(0)), std::tanh(res.x(1));
    out.loglik = ll_natural(out.estimates);
    out.objective = -out.loglik;
    out.iterations = iterations;
    out.converged = res.converged && std::isfinite(out.loglik);
    out.n_effective = series.size();
    const auto ic = information_criteria(out.loglik, 2, out.n_effective);
    out.aic = ic.aic;
    out.bic = ic.bic;
    out.hessian = optimize::hessian_from_values(ll_natural, out.estimates, 1e-4);
    const auto cov = optimize::invert_negative_hessian(out.hessian);
    out.hessian_invertible = cov.invertible;
    if (cov.invertible) out.std_errors = cov.covariance.diagonal().cwiseSqrt();
    return out;
}

double stbingarch_conditional_pmf(long x, double m, const ModelSpec& spec) {
    if (!spec.bound) throw std::invalid_argument("stbingarch_conditional_pmf: spec has no bound");
    const long n = *spec.bound;
    if (x < 0 || x > n) throw std::domain_error("stbingarch_conditional_pmf: count outside {0..N}");
    const double kappa = spec.kappa.value_or(0.0);
    const skellam::SkellamStar star(m, spec.delta);
    double base = 0.0;
    if (x == 0) {
        base = skellam::cdf(0, star);
    } else if (x == n) {
        base = skellam::sf(n - 1, star);
    } else {
        base = skellam::pmf(x, star);
    }
    return (x == 1 ? kappa : 0.0) + (1.0 - kappa) * base;
}

BoundedMoments stbingarch_conditional_moments(double m, const ModelSpec& spec) {
    if (!spec.bound) throw std::invalid_argument("stbingarch_conditional_moments: spec has no bound");
    double m1 = 0.0;
    double m2 = 0.0;
    for (long x = 1; x <= *spec.bound; ++x) {
        const double p = stbingarch_conditional_pmf(x, m, spec);
        m1 += p * static_cast<double>(x);
        m2 += p * static_cast<double>(x) * static_cast<double>(x);
    }
    return {m1, std::max(0.0, m2 - m1 * m1)};
}

double stbingarch_loglik(const ModelSpec& spec, const CountSeries& series) {
    if (!spec.bound) throw std::invalid_argument("stbingarch_loglik: spec has no bound");
    const std::vector<double> m = conditional_mean_path(spec, series);
    double total = 0.0;
    for (std::size_t t = spec.conditioning_prefix(); t < series.size(); ++t) {
        const double p = stbingarch_conditional_pmf(series.counts[t], m[t], spec);
        if (!(p > 0.0)) return kNegInf;
        total += std::log(p);
    }
    return total;
}

FitResult fit_stbingarch_mle(const CountSeries& series, const Orders& orders, long bound, double delta,
                             const FitOptions& options) {
    if (bound < 1) throw std::invalid_argument("fit_stbingarch_mle: bound must be at least 1");
    if (!(delta > 0.0)) throw std::invalid_argument("fit_stbingarch_mle: delta must be positive");
    series.validate(bound);
    const Scenario scenario = Scenario::fixed(delta);
    const Eigen::Index km = static_cast<Eigen::Index>(1 + orders.p + orders.q + orders.r);

    // Natural parameters (mean coefficients..., kappa); kappa may dip below zero inside finite differences.
    const auto ll_natural = [&](const Eigen::VectorXd& theta) {
        const double kappa = theta(km);
        if (!(kappa > -1.0 && kappa < 1.0)) return kNegInf;
        ModelSpec spec = spec_from_theta(theta.head(km), orders, scenario);
        if (!check_stationarity(spec).stationary) return kNegInf;
        spec.bound = bound;
        const std::vector<double> m = conditional_mean_path(spec, series);
        double total = 0.0;
        for (std::size_t t = spec.conditioning_prefix(); t < series.size(); ++t) {
            spec.kappa = 0.0;
            const double base = stbingarch_conditional_pmf(series.counts[t], m[t], spec);
            const double p = (series.counts[t] == 1 ? kappa : 0.0) + (1.0 - kappa) * base;
            if (!(p > 0.0)) return kNegInf;
            total += std::log(p);
        }
        return total;
    };
    const auto to_natural = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd theta = u;
        theta(km) = 1.0 / (1.0 + std::exp(-u(km)));
        return theta;
    };
    const optimize::Objective objective = [&](const Eigen::VectorXd& u) {
        try {
            return -ll_natural(to_natural(u));
        } catch (const NumericalError&) {
            return kInf;
        }
    };

    Eigen::VectorXd u0(km + 1);
    if (options.start) {
        u0 = *options.start;
        const double k0 = std::clamp(u0(km), 1e-6, 1.0 - 1e-6);
        u0(km) = std::log(k0 / (1.0 - k0));
    } else {
        u0.head(km) = moment_start(series, orders, scenario);
        u0(km) = -2.0;
    }

    optimize::NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;
    nm.initial_step = Eigen::VectorXd::Constant(km + 1, 0.05);
    nm.initial_step(0) = 0.1 * std::max(1.0, std::abs(u0(0)));
    nm.initial_step(km) = 0.5;
    optimize::OptimResult res = optimize::nelder_mead(objective, u0, nm);
    nm.initial_step *= 0.2;
    const optimize::OptimResult res2 = optimize::nelder_mead(objective, res.x, nm);
    const int iterations = res.iterations + res2.iterations;
    if (res2.value <= res.value) res = res2;

    Eigen::VectorXd theta = to_natural(res.x);
    if (res.x(km) < -12.0) theta(km) = 0.0;

    FitResult out;
    out.method = FitMethod::StbingarchMle;
    out.names = parameter_names(orders, scenario);
    out.names.emplace_back("kappa");
    out.estimates = theta;
    out.loglik = ll_natural(theta);
    out.objective = -out.loglik;
    out.iterations = iterations;
    out.converged = res.converged && std::isfinite(out.loglik);
    out.n_effective = series.size();
    const auto ic = information_criteria(out.loglik, static_cast<std::size_t>(theta.size()), out.n_effective);
    out.aic = ic.aic;
    out.bic = ic.bic;
    out.hessian = optimize::hessian_from_values(ll_natural, theta, 1e-4);
    const auto cov = optimize::invert_negative_hessian(out.hessian);
    out.hessian_invertible = cov.invertible;
    if (cov.invertible) out.std_errors = cov.covariance.diagonal().cwiseSqrt();
    return out;
}

ModelSpec covariate_design(const ModelSpec& base, const CountSeries& series) {
    const std::size_t r = series.covariate_count();
    if (r > 0 && static_cast<std::size_t>(series.covariates.rows()) != series.size()) {
        throw std::invalid_argument("covariate_design: covariate rows do not match series length");
    }
    ModelSpec spec = base;
    if (spec.gammas.empty()) {
        spec.gammas.assign(r, 0.0);
    } else if (spec.gammas.size() != r) {
        throw std::invalid_argument("covariate_design: " + std::to_string(spec.gammas.size()) +
                                    " coefficients for " + std::to_string(r) + " covariate columns");
    }
    return spec;
}

}  // namespace stobit
