#include "stobit/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "stobit/diagnostics.hpp"
#include "stobit/optimize.hpp"
#include "stobit/specialfn.hpp"

namespace stobit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t mean_param_count(const Orders& o) { return 1 + o.p + o.q + o.r; }

void check_orders(const CountSeries& series, const Orders& orders) {
    if (series.covariate_count() != orders.r) {
        throw std::invalid_argument("series has " + std::to_string(series.covariate_count()) +
                                    " covariate columns but the model expects " + std::to_string(orders.r));
    }
    if (series.size() <= std::max(orders.p, orders.q) + 1) {
        throw std::invalid_argument("series too short for the requested orders");
    }
}

// One Skellam branch term ln p(x | m, delta) with its (m, delta) derivatives,
// given ln I_|x|(z) and ln I_{|x|+1}(z).
TermDerivatives branch_term(long x, double m, double delta, double log_i_n, double log_i_n1) {
    const double s = m >= 0.0 ? 1.0 : -1.0;
    const double xd = static_cast<double>(x);
    const double n = std::abs(xd);
    const double a = 2.0 * std::abs(m) + delta;
    const double z = std::sqrt(delta * a);
    const double z3 = z * z * z;
    const double apd = a + delta;

    const double z_m = s * delta / z;
    const double z_d = apd / (2.0 * z);
    const double z_mm = -delta * delta / z3;
    const double z_md = s / z - s * delta * apd / (2.0 * z3);
    const double z_dd = 1.0 / z - apd * apd / (4.0 * z3);

    const double log_ratio = std::log(a) - std::log(delta);
    const double t_m = xd / a;
    const double t_d = s * 0.5 * xd * (1.0 / a - 1.0 / delta);
    const double t_mm = -2.0 * s * xd / (a * a);
    const double t_md = -xd / (a * a);
    const double t_dd = s * 0.5 * xd * (-1.0 / (a * a) + 1.0 / (delta * delta));

    const double b = n / z + std::exp(log_i_n1 - log_i_n);
    const double c = 1.0 + n * n / (z * z) - b / z - b * b;

    TermDerivatives d;
    d.value = -std::abs(m) - delta + s * 0.5 * xd * log_ratio + log_i_n;
    d.d_m = -s + t_m + b * z_m;
    d.d_delta = -1.0 + t_d + b * z_d;
    d.d_mm = t_mm + c * z_m * z_m + b * z_mm;
    d.d_mdelta = t_md + c * z_m * z_d + b * z_md;
    d.d_deltadelta = t_dd + c * z_d * z_d + b * z_dd;
    return d;
}

double bessel_arg(double m, double delta) { return std::sqrt(delta * (2.0 * std::abs(m) + delta)); }

// ln P(X* <= 0) and its derivatives. For m >= 0 this is a normalized-weight
// mixture of branch terms over x* = 0, -1, -2, ...; for m < 0 the mass lies
// mostly at or below zero and the complement P(X* >= 1) is summed instead.
TermDerivatives zero_term(double m, double delta) {
    const double z = bessel_arg(m, delta);
    std::vector<TermDerivatives> terms;
    const bool upper = m < 0.0;
    double log_next = specialfn::log_bessel_i(upper ? 1 : 0, z).log_magnitude;
    double max_log = kNegInf;
    for (long step = 0;; ++step) {
        const long x = upper ? step + 1 : -step;
        const long n = std::abs(x);
        const double log_cur = log_next;
        log_next = specialfn::log_bessel_i(static_cast<int>(n + 1), z).log_magnitude;
        terms.push_back(branch_term(x, m, delta, log_cur, log_next));
        max_log = std::max(max_log, terms.back().value);
        if (step > 0 && terms.back().value < max_log + std::log(1e-18)) break;
        if (step > 200000) throw NumericalError("zero-count term: summation did not terminate");
    }
    double weight_sum = 0.0;
    for (const auto& t : terms) weight_sum += std::exp(t.value - max_log);

    double e_m = 0.0, e_d = 0.0, e_mm = 0.0, e_md = 0.0, e_dd = 0.0;
    for (const auto& t : terms) {
        const double w = std::exp(t.value - max_log) / weight_sum;
        e_m += w * t.d_m;
        e_d += w * t.d_delta;
        e_mm += w * (t.d_mm + t.d_m * t.d_m);
        e_md += w * (t.d_mdelta + t.d_m * t.d_delta);
        e_dd += w * (t.d_deltadelta + t.d_delta * t.d_delta);
    }

    TermDerivatives out;
    if (!upper) {
        out.value = max_log + std::log(weight_sum);
        out.d_m = e_m;
        out.d_delta = e_d;
        out.d_mm = e_mm - e_m * e_m;
        out.d_mdelta = e_md - e_m * e_d;
        out.d_deltadelta = e_dd - e_d * e_d;
        return out;
    }
    // L = ln(1 - S) with S = P(X* >= 1); r = S / (1 - S)
    const double log_s = max_log + std::log(weight_sum);
    const double tail = std::exp(log_s);
    const double r = tail / (1.0 - tail);
    out.value = std::log1p(-tail);
    out.d_m = -r * e_m;
    out.d_delta = -r * e_d;
    out.d_mm = -r * e_mm - r * r * e_m * e_m;
    out.d_mdelta = -r * e_md - r * r * e_m * e_d;
    out.d_deltadelta = -r * e_dd - r * r * e_d * e_d;
    return out;
}

double term_log_prob(long x, double m, double delta) {
    const skellam::SkellamStar star(m, delta);
    if (x > 0) return skellam::log_pmf(x, star);
    if (delta > 0.0) return zero_term(m, delta).value;
    return std::log(skellam::cdf(0, star));
}

bool mean_params_stationary(const ModelSpec& spec) { return check_stationarity(spec).stationary; }

struct Normal01 {
    Rng rng;
    double draw() {
        const double u1 = 1.0 - rng.uniform();
        const double u2 = rng.uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

}  // namespace

std::string to_string(FitMethod method) {
    switch (method) {
        case FitMethod::MleScenario1: return "mle-s1";
        case FitMethod::MleScenario2: return "mle-s2";
        case FitMethod::Clade: return "clade";
        case FitMethod::Cls: return "cls";
        case FitMethod::TinarsMle: return "tinars-mle";
        case FitMethod::StbingarchMle: return "stbingarch-mle";
    }
    return "unknown";
}

std::vector<std::string> parameter_names(const Orders& orders, const Scenario& scenario) {
    std::vector<std::string> names{"alpha0"};
    for (std::size_t i = 1; i <= orders.p; ++i) names.push_back("alpha" + std::to_string(i));
    for (std::size_t j = 1; j <= orders.q; ++j) names.push_back("beta" + std::to_string(j));
    for (std::size_t k = 1; k <= orders.r; ++k) names.push_back("gamma" + std::to_string(k));
    if (scenario.estimate_delta) names.emplace_back("delta");
    return names;
}

ModelSpec spec_from_theta(const Eigen::VectorXd& theta, const Orders& orders, const Scenario& scenario) {
    const std::size_t k = mean_param_count(orders) + (scenario.estimate_delta ? 1 : 0);
    if (static_cast<std::size_t>(theta.size()) != k) throw std::invalid_argument("parameter vector has wrong length");
    ModelSpec spec;
    std::size_t idx = 0;
    spec.alpha0 = theta(static_cast<Eigen::Index>(idx++));
    for (std::size_t i = 0; i < orders.p; ++i) spec.alphas.push_back(theta(static_cast<Eigen::Index>(idx++)));
    for (std::size_t j = 0; j < orders.q; ++j) spec.betas.push_back(theta(static_cast<Eigen::Index>(idx++)));
    for (std::size_t g = 0; g < orders.r; ++g) spec.gammas.push_back(theta(static_cast<Eigen::Index>(idx++)));
    spec.delta = scenario.estimate_delta ? theta(static_cast<Eigen::Index>(idx)) : scenario.delta;
    return spec;
}

Eigen::VectorXd theta_from_spec(const ModelSpec& spec, const Scenario& scenario) {
    std::vector<double> v{spec.alpha0};
    v.insert(v.end(), spec.alphas.begin(), spec.alphas.end());
    v.insert(v.end(), spec.betas.begin(), spec.betas.end());
    v.insert(v.end(), spec.gammas.begin(), spec.gammas.end());
    if (scenario.estimate_delta) v.push_back(spec.delta);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double loglik(const ModelSpec& spec, const CountSeries& series) {
    if (spec.r() != series.covariate_count()) throw std::invalid_argument("loglik: covariate dimension mismatch");
    const std::vector<double> m = conditional_mean_path(spec, series);
    double total = 0.0;
    for (std::size_t t = spec.conditioning_prefix(); t < series.size(); ++t) {
        const double lp = term_log_prob(series.counts[t], m[t], spec.delta);
        if (!(lp > kNegInf) || std::isnan(lp)) return kNegInf;
        total += lp;
    }
    return total;
}

double loglik(const Eigen::VectorXd& theta, const CountSeries& series, const Orders& orders, const Scenario& scenario) {
    const ModelSpec spec = spec_from_theta(theta, orders, scenario);
    if (!(spec.delta > 0.0)) return kNegInf;
    return loglik(spec, series);
}

TermDerivatives term_derivatives(long x, double m, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("term_derivatives: delta must be positive");
    if (x < 0) throw std::domain_error("term_derivatives: negative count");
    if (x == 0) return zero_term(m, delta);
    const double z = bessel_arg(m, delta);
    return branch_term(x, m, delta, specialfn::log_bessel_i(static_cast<int>(x), z).log_magnitude,
                       specialfn::log_bessel_i(static_cast<int>(x + 1), z).log_magnitude);
}

ScoreHessian analytic_score_hessian(const Eigen::VectorXd& theta, const CountSeries& series, const Orders& orders,
                                    const Scenario& scenario) {
    check_orders(series, orders);
    const ModelSpec spec = spec_from_theta(theta, orders, scenario);
    if (!(spec.delta > 0.0)) throw std::domain_error("analytic_score_hessian: delta must be positive");
    const auto km = static_cast<Eigen::Index>(mean_param_count(orders));
    const Eigen::Index k = km + (scenario.estimate_delta ? 1 : 0);
    const Eigen::Index di = km;  // delta index in scenario 2
    const std::size_t n = series.size();
    const std::size_t prefix = spec.conditioning_prefix();
    const auto p = static_cast<Eigen::Index>(orders.p);
    const auto q = static_cast<Eigen::Index>(orders.q);

    const std::vector<double> m = conditional_mean_path(spec, series);
    std::vector<Eigen::VectorXd> dm(n, Eigen::VectorXd::Zero(km));
    std::vector<Eigen::MatrixXd> d2m(n, Eigen::MatrixXd::Zero(km, km));
    for (std::size_t t = 0; t < std::min(prefix, n); ++t) dm[t](0) = 1.0;

    ScoreHessian out;
    out.gradient = Eigen::VectorXd::Zero(k);
    out.hessian = Eigen::MatrixXd::Zero(k, k);
    out.outer_scores = Eigen::MatrixXd::Zero(k, k);

    for (std::size_t t = prefix; t < n; ++t) {
        Eigen::VectorXd& g = dm[t];
        g(0) = 1.0;
        for (Eigen::Index i = 0; i < p; ++i) g(1 + i) = static_cast<double>(series.counts[t - 1 - static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < q; ++j) g(1 + p + j) = m[t - 1 - static_cast<std::size_t>(j)];
        for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(orders.r); ++c) {
            g(1 + p + q + c) = series.covariates(static_cast<Eigen::Index>(t), c);
        }
        Eigen::MatrixXd& h = d2m[t];
        for (Eigen::Index j = 0; j < q; ++j) {
            const std::size_t lag = t - 1 - static_cast<std::size_t>(j);
            const double beta = spec.betas[static_cast<std::size_t>(j)];
            g += beta * dm[lag];
            h += beta * d2m[lag];
            h.row(1 + p + j) += dm[lag].transpose();
            h.col(1 + p + j) += dm[lag];
        }

        if (m[t] == 0.0) ++out.knife_edge_count;
        const TermDerivatives d = term_derivatives(series.counts[t], m[t], spec.delta);
        out.loglik += d.value;

        Eigen::VectorXd st = Eigen::VectorXd::Zero(k);
        st.head(km) = d.d_m * g;
        out.hessian.topLeftCorner(km, km) += d.d_mm * g * g.transpose() + d.d_m * h;
        if (scenario.estimate_delta) {
            st(di) = d.d_delta;
            out.hessian.col(di).head(km) += d.d_mdelta * g;
            out.hessian.row(di).head(km) += d.d_mdelta * g.transpose();
            out.hessian(di, di) += d.d_deltadelta;
        }
        out.gradient += st;
        out.outer_scores += st * st.transpose();
    }
    return out;
}

SandwichMatrices sandwich_matrices(const Eigen::VectorXd& theta, const CountSeries& series, const Orders& orders,
                                   const Scenario& scenario) {
    const ScoreHessian sh = analytic_score_hessian(theta, series, orders, scenario);
    const double terms = static_cast<double>(series.size() - std::max(orders.p, orders.q));
    return {sh.outer_scores / terms, -sh.hessian / terms};
}

Eigen::VectorXd moment_start(const CountSeries& series, const Orders& orders, const Scenario& scenario) {
    check_orders(series, orders);
    const std::size_t n = series.size();
    const std::size_t prefix = std::max(orders.p, orders.q);
    const auto rows = static_cast<Eigen::Index>(n - prefix);
    const auto cols = static_cast<Eigen::Index>(1 + orders.p + orders.r);
    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd y(rows);
    for (std::size_t t = prefix; t < n; ++t) {
        const auto row = static_cast<Eigen::Index>(t - prefix);
        y(row) = static_cast<double>(series.counts[t]);
        design(row, 0) = 1.0;
        for (std::size_t i = 0; i < orders.p; ++i) {
            design(row, static_cast<Eigen::Index>(1 + i)) = static_cast<double>(series.counts[t - 1 - i]);
        }
        for (std::size_t c = 0; c < orders.r; ++c) {
            design(row, static_cast<Eigen::Index>(1 + orders.p + c)) =
                series.covariates(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c));
        }
    }
    Eigen::VectorXd coef = design.completeOrthogonalDecomposition().solve(y);
    if (!coef.allFinite()) coef = Eigen::VectorXd::Zero(cols);

    // Keep the autoregressive part inside the stationarity region.
    double pos = 0.0;
    for (std::size_t i = 0; i < orders.p; ++i) {
        coef(static_cast<Eigen::Index>(1 + i)) = std::clamp(coef(static_cast<Eigen::Index>(1 + i)), -0.9, 0.9);
        pos += std::max(0.0, coef(static_cast<Eigen::Index>(1 + i)));
    }
    if (pos > 0.9) {
        for (std::size_t i = 0; i < orders.p; ++i) coef(static_cast<Eigen::Index>(1 + i)) *= 0.9 / pos;
    }
    double ar_sum = 0.0;
    for (std::size_t i = 0; i < orders.p; ++i) ar_sum += coef(static_cast<Eigen::Index>(1 + i));
    double mean = y.mean();
    if (orders.r > 0) {
        for (std::size_t c = 0; c < orders.r; ++c) {
            mean -= coef(static_cast<Eigen::Index>(1 + orders.p + c)) *
                    design.col(static_cast<Eigen::Index>(1 + orders.p + c)).mean();
        }
    }

    Eigen::VectorXd theta(static_cast<Eigen::Index>(mean_param_count(orders) + (scenario.estimate_delta ? 1 : 0)));
    theta.setZero();
    theta(0) = mean * (1.0 - ar_sum);
    for (std::size_t i = 0; i < orders.p; ++i) theta(static_cast<Eigen::Index>(1 + i)) = coef(static_cast<Eigen::Index>(1 + i));
    for (std::size_t c = 0; c < orders.r; ++c) {
        theta(static_cast<Eigen::Index>(1 + orders.p + orders.q + c)) = coef(static_cast<Eigen::Index>(1 + orders.p + c));
    }
    if (scenario.estimate_delta) theta(theta.size() - 1) = scenario.delta;
    return theta;
}

namespace {

// Log-likelihood for search purposes: trial points where a term cannot be
// evaluated to full precision count as impossible.
double search_loglik(const Eigen::VectorXd& theta, const CountSeries& series, const Orders& orders,
                     const Scenario& scenario) {
    try {
        return loglik(theta, series, orders, scenario);
    } catch (const NumericalError&) {
        return kNegInf;
    }
}

// Newton iterations on the log-likelihood from theta; returns true when the step size became negligible.
bool newton_polish(Eigen::VectorXd& theta, const CountSeries& series, const Orders& orders, const Scenario& scenario) {
    double ll = search_loglik(theta, series, orders, scenario);
    if (!std::isfinite(ll)) return false;
    for (int iter = 0; iter < 30; ++iter) {
        const ScoreHessian sh = analytic_score_hessian(theta, series, orders, scenario);
        const auto cov = optimize::invert_negative_hessian(sh.hessian);
        if (!cov.invertible) return false;
        const Eigen::VectorXd step = cov.covariance * sh.gradient;
        const double decrement = sh.gradient.dot(step);
        if (!std::isfinite(decrement)) return false;
        if (decrement < 1e-12) return true;
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
            const Eigen::VectorXd cand = theta + t * step;
            const ModelSpec spec = spec_from_theta(cand, orders, scenario);
            if (!(spec.delta > 0.0) || !mean_params_stationary(spec)) continue;
            const double cll = search_loglik(cand, series, orders, scenario);
            if (std::isfinite(cll) && cll >= ll - 1e-12) {
                theta = cand;
                ll = cll;
                accepted = true;
                break;
            }
        }
        if (!accepted) return decrement < 1e-8;
    }
    return false;
}

Eigen::VectorXd to_search(const Eigen::VectorXd& theta, const Scenario& scenario) {
    Eigen::VectorXd u = theta;
    if (scenario.estimate_delta) u(u.size() - 1) = std::log(theta(theta.size() - 1));
    return u;
}

Eigen::VectorXd from_search(const Eigen::VectorXd& u, const Scenario& scenario) {
    Eigen::VectorXd theta = u;
    if (scenario.estimate_delta) theta(theta.size() - 1) = std::exp(u(u.size() - 1));
    return theta;
}

}  // namespace

FitResult fit_mle(const CountSeries& series, const Orders& orders, const Scenario& scenario, const FitOptions& options) {
    check_orders(series, orders);
    series.validate();
    if (!(scenario.delta > 0.0)) throw std::invalid_argument("fit_mle: delta must be positive");

    Eigen::VectorXd theta0 = options.start ? *options.start : moment_start(series, orders, scenario);
    if (!std::isfinite(search_loglik(theta0, series, orders, scenario)) ||
        !mean_params_stationary(spec_from_theta(theta0, orders, scenario))) {
        // Fall back to an i.i.d. start at the sample mean.
        theta0.setZero();
        double mean = 0.0;
        for (long v : series.counts) mean += static_cast<double>(v);
        theta0(0) = std::max(0.5, mean / static_cast<double>(series.size()));
        if (scenario.estimate_delta) theta0(theta0.size() - 1) = scenario.delta;
    }

    const optimize::Objective objective = [&](const Eigen::VectorXd& u) {
        const Eigen::VectorXd theta = from_search(u, scenario);
        const ModelSpec spec = spec_from_theta(theta, orders, scenario);
        if (!mean_params_stationary(spec)) return kInf;
        return -search_loglik(theta, series, orders, scenario);
    };

    optimize::NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;
    nm.initial_step = Eigen::VectorXd::Constant(theta0.size(), 0.05);
    nm.initial_step(0) = 0.1 * std::max(1.0, std::abs(theta0(0)));
    if (scenario.estimate_delta) nm.initial_step(nm.initial_step.size() - 1) = 0.3;
    optimize::OptimResult res = optimize::nelder_mead(objective, to_search(theta0, scenario), nm);
    int iterations = res.iterations;
    // One restart from the best vertex guards against a collapsed simplex.
    nm.initial_step *= 0.2;
    nm.initial_step(0) = 0.02 * std::max(1.0, std::abs(res.x(0)));
    optimize::OptimResult res2 = optimize::nelder_mead(objective, res.x, nm);
    iterations += res2.iterations;
    if (res2.value <= res.value) res = res2;

    Eigen::VectorXd theta = from_search(res.x, scenario);
    bool converged = res.converged;
    if (options.newton_polish && std::isfinite(res.value)) {
        Eigen::VectorXd polished = theta;
        try {
            if (newton_polish(polished, series, orders, scenario)) converged = true;
            if (search_loglik(polished, series, orders, scenario) >= -res.value) theta = polished;
        } catch (const NumericalError&) {
        }
    }

    FitResult out;
    out.method = scenario.estimate_delta ? FitMethod::MleScenario2 : FitMethod::MleScenario1;
    out.names = parameter_names(orders, scenario);
    out.estimates = theta;
    out.loglik = loglik(theta, series, orders, scenario);
    out.objective = -out.loglik;
    out.iterations = iterations;
    out.converged = converged && std::isfinite(out.loglik);
    out.n_effective = series.size();
    const auto ic = information_criteria(out.loglik, static_cast<std::size_t>(theta.size()), out.n_effective);
    out.aic = ic.aic;
    out.bic = ic.bic;

    if (std::isfinite(out.loglik)) {
        const auto gradient = [&](const Eigen::VectorXd& th) {
            return analytic_score_hessian(th, series, orders, scenario).gradient;
        };
        try {
            out.hessian = optimize::hessian_from_gradient(gradient, theta, 1e-5);
            const auto cov = optimize::invert_negative_hessian(out.hessian);
            out.hessian_invertible = cov.invertible;
            if (cov.invertible) out.std_errors = cov.covariance.diagonal().cwiseSqrt();
        } catch (const std::exception&) {
            out.hessian_invertible = false;
        }
    }
    return out;
}

namespace {

enum class Loss { Absolute, Squared };

FitResult fit_censored_deviation(const CountSeries& series, const Orders& orders, const FitOptions& options, Loss loss) {
    check_orders(series, orders);
    series.validate();
    const Scenario scenario = Scenario::fixed(1.0);
    const optimize::Objective objective = [&](const Eigen::VectorXd& theta) {
        const ModelSpec spec = spec_from_theta(theta, orders, scenario);
        if (!mean_params_stationary(spec)) return kInf;
        const std::vector<double> m = conditional_mean_path(spec, series);
        double total = 0.0;
        for (std::size_t t = spec.conditioning_prefix(); t < series.size(); ++t) {
            const double e = static_cast<double>(series.counts[t]) - std::max(0.0, m[t]);
            total += loss == Loss::Absolute ? std::abs(e) : e * e;
        }
        return total;
    };

    const Eigen::VectorXd theta0 = options.start ? *options.start : moment_start(series, orders, scenario);
    Normal01 normal{Rng(options.jitter_seed)};
    optimize::NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;

    Eigen::VectorXd best;
    double best_value = kInf;
    int iterations = 0;
    bool converged = false;
    const int starts = std::max(1, options.restarts);
    for (int s = 0; s < starts; ++s) {
        Eigen::VectorXd x0 = theta0;
        if (s > 0) {
            x0(0) += 0.1 * std::max(1.0, std::abs(theta0(0))) * normal.draw();
            for (Eigen::Index i = 1; i < x0.size(); ++i) x0(i) += 0.05 * normal.draw();
            if (!std::isfinite(objective(x0))) x0 = theta0;
        }
        nm.initial_step = Eigen::VectorXd::Constant(x0.size(), 0.05);
        nm.initial_step(0) = 0.1 * std::max(1.0, std::abs(x0(0)));
        optimize::OptimResult res = optimize::nelder_mead(objective, x0, nm);
        nm.initial_step *= 0.2;
        const optimize::OptimResult res2 = optimize::nelder_mead(objective, res.x, nm);
        if (res2.value <= res.value) res = res2;
        iterations += res.iterations;
        const bool tie = std::isfinite(best_value) && std::abs(res.value - best_value) <= 1e-12 * std::max(1.0, std::abs(best_value));
        if (res.value < best_value && !tie) {
            best = res.x;
            best_value = res.value;
            converged = res.converged;
        } else if (tie && res.x.norm() < best.norm()) {
            best = res.x;
            converged = res.converged;
        }
    }

    FitResult out;
    out.method = loss == Loss::Absolute ? FitMethod::Clade : FitMethod::Cls;
    out.names = parameter_names(orders, scenario);
    out.estimates = best;
    out.objective = best_value;
    out.loglik = std::numeric_limits<double>::quiet_NaN();
    out.aic = std::numeric_limits<double>::quiet_NaN();
    out.bic = std::numeric_limits<double>::quiet_NaN();
    out.iterations = iterations;
    out.converged = converged && std::isfinite(best_value);
    out.n_effective = series.size();
    return out;
}

}  // namespace

FitResult fit_clade(const CountSeries& series, const Orders& orders, const FitOptions& options) {
    return fit_censored_deviation(series, orders, options, Loss::Absolute);
}

FitResult fit_cls(const CountSeries& series, const Orders& orders, const FitOptions& options) {
    return fit_censored_deviation(series, orders, options, Loss::Squared);
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("STOBIT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

McStudyResult mc_study(const McStudyConfig& config) {
    config.dgp.validate();
    McStudyResult result;
    result.config = config;
    const Orders orders{config.dgp.p(), config.dgp.q(), 0};
    if (config.dgp.r() != 0) throw std::invalid_argument("mc_study: covariate DGPs are not supported");

    struct Rep {
        bool ok = false;
        bool converged = false;
        bool invertible = false;
        Eigen::VectorXd estimates;
        Eigen::VectorXd se;
    };
    const std::size_t reps = config.replications;
    const std::size_t nm = config.methods.size();
    std::vector<Rep> records(reps * nm);

    auto run_one = [&](std::size_t rep) {
        Rng rng = Rng::stream(config.seed, rep);
        CountSeries series;
        try {
            series = simulate(config.dgp, config.n, config.burn_in, rng).series;
        } catch (const std::exception&) {
            return;
        }
        for (std::size_t mi = 0; mi < nm; ++mi) {
            Rep& rec = records[rep * nm + mi];
            try {
                FitResult fit;
                switch (config.methods[mi]) {
                    case FitMethod::MleScenario1: {
                        const double d = config.scenario.estimate_delta ? config.dgp.delta : config.scenario.delta;
                        fit = fit_mle(series, orders, Scenario::fixed(d));
                        break;
                    }
                    case FitMethod::MleScenario2:
                        fit = fit_mle(series, orders, Scenario::estimated(config.scenario.estimate_delta ? config.scenario.delta : 0.25));
                        break;
                    case FitMethod::Clade: {
                        FitOptions o;
                        o.jitter_seed = splitmix64(config.seed ^ rep);
                        fit = fit_clade(series, orders, o);
                        break;
                    }
                    case FitMethod::Cls: {
                        FitOptions o;
                        o.jitter_seed = splitmix64(config.seed ^ rep);
                        fit = fit_cls(series, orders, o);
                        break;
                    }
                    default: throw std::invalid_argument("mc_study: unsupported method");
                }
                rec.ok = fit.estimates.allFinite();
                rec.converged = fit.converged;
                rec.invertible = fit.hessian_invertible;
                rec.estimates = fit.estimates;
                if (fit.std_errors) rec.se = *fit.std_errors;
            } catch (const std::exception&) {
                rec.ok = false;
            }
        }
    };

    unsigned threads = config.threads > 0 ? config.threads : default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, reps)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t rep = next++; rep < reps; rep = next++) run_one(rep);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t mi = 0; mi < nm; ++mi) {
        McMethodSummary s;
        s.method = config.methods[mi];
        const Scenario sc = s.method == FitMethod::MleScenario2 ? Scenario::estimated() : Scenario::fixed(1.0);
        s.names = parameter_names(orders, sc);
        const auto k = static_cast<Eigen::Index>(s.names.size());
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
        Eigen::VectorXd se_sum = Eigen::VectorXd::Zero(k);
        std::size_t se_count = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const Rep& rec = records[rep * nm + mi];
            if (!rec.ok) {
                ++s.failures;
                continue;
            }
            ++s.successes;
            if (!rec.converged) ++s.non_converged;
            sum += rec.estimates;
            const bool is_mle = s.method == FitMethod::MleScenario1 || s.method == FitMethod::MleScenario2;
            if (is_mle && !rec.invertible) ++s.hessian_non_invertible;
            if (rec.se.size() == k) {
                se_sum += rec.se;
                ++se_count;
            }
        }
        if (s.successes > 0) {
            s.mean = sum / static_cast<double>(s.successes);
            Eigen::VectorXd ss = Eigen::VectorXd::Zero(k);
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const Rep& rec = records[rep * nm + mi];
                if (rec.ok) ss += (rec.estimates - s.mean).cwiseAbs2();
            }
            s.simulated_se = s.successes > 1 ? Eigen::VectorXd((ss / static_cast<double>(s.successes - 1)).cwiseSqrt())
                                             : Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
        }
        if (se_count > 0) s.mean_approx_se = se_sum / static_cast<double>(se_count);
        result.methods.push_back(std::move(s));
    }
    return result;
}

}  // namespace stobit
