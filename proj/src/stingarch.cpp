#include "stobit/stingarch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stobit/diagnostics.hpp"
#include "stobit/specialfn.hpp"

namespace stobit {

void ModelSpec::validate() const {
    if (!std::isfinite(alpha0)) throw std::invalid_argument("alpha0 must be finite");
    for (double a : alphas) {
        if (!std::isfinite(a)) throw std::invalid_argument("alpha coefficients must be finite");
    }
    for (double b : betas) {
        if (!std::isfinite(b)) throw std::invalid_argument("beta coefficients must be finite");
    }
    for (double g : gammas) {
        if (!std::isfinite(g)) throw std::invalid_argument("covariate coefficients must be finite");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be nonnegative");
    if (bound && *bound < 1) throw std::invalid_argument("bound N must be at least 1");
    if (kappa) {
        if (!bound) throw std::invalid_argument("kappa requires a bound N");
        if (!(*kappa >= 0.0 && *kappa < 1.0)) throw std::invalid_argument("kappa must lie in [0, 1)");
    }
}

CountSeries::CountSeries(std::vector<long> values)
    : counts(std::move(values)), covariates(Eigen::MatrixXd(static_cast<Eigen::Index>(counts.size()), 0)) {}

CountSeries::CountSeries(std::vector<long> values, Eigen::MatrixXd covs)
    : counts(std::move(values)), covariates(std::move(covs)) {}

std::vector<double> CountSeries::as_doubles() const { return {counts.begin(), counts.end()}; }

void CountSeries::validate(std::optional<long> bound) const {
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) throw std::invalid_argument("negative count at index " + std::to_string(i + 1));
        if (bound && counts[i] > *bound) {
            throw std::invalid_argument("count above bound at index " + std::to_string(i + 1));
        }
    }
    if (covariates.cols() > 0 && static_cast<std::size_t>(covariates.rows()) != counts.size()) {
        throw std::invalid_argument("covariate rows do not match series length");
    }
}

std::string to_string(MomentMethod method) {
    switch (method) {
        case MomentMethod::ExactMarkov: return "exact-markov";
        case MomentMethod::Simulated: return "simulated";
        case MomentMethod::LinearApprox: return "linear-approx";
    }
    return "unknown";
}

StationarityCheck check_stationarity(const ModelSpec& spec) {
    double sum = 0.0;
    for (double a : spec.alphas) sum += std::max(0.0, a);
    for (double b : spec.betas) sum += std::abs(b);
    return {sum < 1.0, 1.0 - sum};
}

namespace {

double linear_mean(const ModelSpec& spec) {
    const double persistence = std::accumulate(spec.alphas.begin(), spec.alphas.end(), 0.0) +
                               std::accumulate(spec.betas.begin(), spec.betas.end(), 0.0);
    if (persistence >= 1.0) return std::max(0.0, spec.alpha0);
    return spec.alpha0 / (1.0 - persistence);
}

double covariate_term(const ModelSpec& spec, const Eigen::MatrixXd& covs, std::size_t t) {
    double s = 0.0;
    for (std::size_t k = 0; k < spec.r(); ++k) {
        s += spec.gammas[k] * covs(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
    }
    return s;
}

}  // namespace

std::vector<double> conditional_mean_path(const ModelSpec& spec, const CountSeries& series, MeanInit init) {
    const std::size_t n = series.size();
    if (n == 0) throw std::invalid_argument("conditional_mean_path: empty series");
    if (spec.r() > 0 && (series.covariate_count() != spec.r() || static_cast<std::size_t>(series.covariates.rows()) != n)) {
        throw std::invalid_argument("conditional_mean_path: covariate dimension mismatch");
    }
    const double start = init == MeanInit::Alpha0 ? spec.alpha0 : linear_mean(spec);
    const std::size_t prefix = spec.conditioning_prefix();
    std::vector<double> m(n, start);
    for (std::size_t t = prefix; t < n; ++t) {
        double v = spec.alpha0;
        for (std::size_t i = 0; i < spec.p(); ++i) v += spec.alphas[i] * static_cast<double>(series.counts[t - 1 - i]);
        for (std::size_t j = 0; j < spec.q(); ++j) v += spec.betas[j] * m[t - 1 - j];
        v += covariate_term(spec, series.covariates, t);
        m[t] = v;
    }
    return m;
}

double one_step_forecast(const ModelSpec& spec, const CountSeries& series, const std::vector<double>& path,
                         const Eigen::VectorXd& next_covariates) {
    const std::size_t n = series.size();
    if (path.size() != n) throw std::invalid_argument("one_step_forecast: path length mismatch");
    if (n < spec.conditioning_prefix()) throw std::invalid_argument("one_step_forecast: series too short");
    double v = spec.alpha0;
    for (std::size_t i = 0; i < spec.p(); ++i) v += spec.alphas[i] * static_cast<double>(series.counts[n - 1 - i]);
    for (std::size_t j = 0; j < spec.q(); ++j) v += spec.betas[j] * path[n - 1 - j];
    if (spec.r() > 0 && next_covariates.size() > 0) {
        if (static_cast<std::size_t>(next_covariates.size()) != spec.r()) {
            throw std::invalid_argument("one_step_forecast: covariate dimension mismatch");
        }
        for (std::size_t k = 0; k < spec.r(); ++k) v += spec.gammas[k] * next_covariates(static_cast<Eigen::Index>(k));
    }
    return v;
}

double conditional_pmf(long x, double m, const ModelSpec& spec) {
    if (x < 0) throw std::domain_error("conditional_pmf: negative count");
    const skellam::SkellamStar star(m, spec.delta);
    if (x == 0) return skellam::cdf(0, star);
    return skellam::pmf(x, star);
}

skellam::CensoredMoments conditional_moments(double m, const ModelSpec& spec) {
    return skellam::censored_moments(skellam::SkellamStar(m, spec.delta));
}

SimulationResult simulate(const ModelSpec& spec, std::size_t n, std::size_t burn_in, Rng& rng,
                          const Eigen::MatrixXd& covariates) {
    spec.validate();
    if (spec.r() > 0) {
        if (static_cast<std::size_t>(covariates.rows()) != n || static_cast<std::size_t>(covariates.cols()) != spec.r()) {
            throw std::invalid_argument("simulate: covariates must be n x r");
        }
    }
    SimulationResult out;
    out.stationarity_warning = !check_stationarity(spec).stationary;

    const std::size_t p = spec.p();
    const std::size_t q = spec.q();
    const std::size_t hist = std::max<std::size_t>(1, std::max(p, q));
    const double x_start = std::round(std::max(0.0, linear_mean(spec)));
    // Ring buffers of the latest counts and means, newest at index 0.
    std::vector<double> xs(hist, x_start);
    std::vector<double> ms(hist, spec.alpha0);

    const double kappa = spec.kappa.value_or(0.0);
    std::vector<long> counts;
    counts.reserve(n);
    const std::size_t total = burn_in + n;
    for (std::size_t step = 0; step < total; ++step) {
        double m = spec.alpha0;
        for (std::size_t i = 0; i < p; ++i) m += spec.alphas[i] * xs[i];
        for (std::size_t j = 0; j < q; ++j) m += spec.betas[j] * ms[j];
        if (spec.r() > 0 && step >= burn_in) m += covariate_term(spec, covariates, step - burn_in);

        long x = std::max(0L, skellam::sample(skellam::SkellamStar(m, spec.delta), rng));
        if (spec.bound) {
            x = std::min(x, *spec.bound);
            if (kappa > 0.0 && rng.uniform() < kappa) x = 1;
        }
        for (std::size_t k = hist - 1; k > 0; --k) {
            xs[k] = xs[k - 1];
            ms[k] = ms[k - 1];
        }
        xs[0] = static_cast<double>(x);
        ms[0] = m;
        if (step >= burn_in) counts.push_back(x);
    }
    if (spec.r() > 0) {
        out.series = CountSeries(std::move(counts), covariates);
    } else {
        out.series = CountSeries(std::move(counts));
    }
    return out;
}

namespace {

struct ChainSolution {
    Eigen::VectorXd pi;
    MomentSummary summary;
};

ChainSolution solve_chain(const std::function<double(long, long)>& transition, long cap, std::size_t max_lag) {
    const Eigen::Index size = cap + 1;
    Eigen::MatrixXd t(size, size);
    for (Eigen::Index x = 0; x < size; ++x) {
        double row_sum = 0.0;
        for (Eigen::Index y = 0; y < size; ++y) {
            t(x, y) = transition(static_cast<long>(y), static_cast<long>(x));
            row_sum += t(x, y);
        }
        if (!(row_sum > 0.0)) throw NumericalError("markov_chain_moments: transition row has no mass");
        t.row(x) /= row_sum;
    }

    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(size, 1.0 / static_cast<double>(size));
    bool converged = false;
    for (int iter = 0; iter < 200000; ++iter) {
        Eigen::RowVectorXd next = pi * t;
        next /= next.sum();
        const double dist = (next - pi).cwiseAbs().sum();
        pi = next;
        if (dist < 1e-13) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        if (size > 2001) throw NumericalError("markov_chain_moments: stationary solve did not converge");
        // pi (T - I) = 0 with the normalization replacing the last equation.
        Eigen::MatrixXd a = (t - Eigen::MatrixXd::Identity(size, size)).transpose();
        a.row(size - 1).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
        rhs(size - 1) = 1.0;
        Eigen::VectorXd sol = a.fullPivLu().solve(rhs);
        if (!sol.allFinite()) throw NumericalError("markov_chain_moments: stationary solve failed");
        pi = sol.transpose().cwiseMax(0.0);
        pi /= pi.sum();
    }

    const Eigen::VectorXd states = Eigen::VectorXd::LinSpaced(size, 0.0, static_cast<double>(cap));
    const double mean = pi * states;
    const double second = pi * states.cwiseProduct(states);
    const double var = second - mean * mean;
    if (!(var > 0.0)) throw NumericalError("markov_chain_moments: degenerate stationary distribution");

    MomentSummary s;
    s.method = MomentMethod::ExactMarkov;
    s.mean = mean;
    s.dispersion_ratio = var / mean;
    Eigen::VectorXd cond = states;
    const Eigen::RowVectorXd weighted = pi.cwiseProduct(states.transpose());
    for (std::size_t h = 1; h <= max_lag; ++h) {
        cond = t * cond;
        s.acf.push_back((weighted.dot(cond.transpose()) - mean * mean) / var);
    }
    s.pacf = durbin_levinson(s.acf);
    return {pi.transpose(), s};
}

double summary_distance(const MomentSummary& a, const MomentSummary& b) {
    double d = std::max(std::abs(a.mean - b.mean), std::abs(a.dispersion_ratio - b.dispersion_ratio));
    for (std::size_t i = 0; i < a.acf.size(); ++i) d = std::max(d, std::abs(a.acf[i] - b.acf[i]));
    for (std::size_t i = 0; i < a.pacf.size(); ++i) d = std::max(d, std::abs(a.pacf[i] - b.pacf[i]));
    return d;
}

}  // namespace

MomentSummary markov_chain_moments(const std::function<double(long, long)>& transition, long initial_cap,
                                   std::size_t max_lag) {
    constexpr long kMaxCap = 4096;
    long cap = std::max(8L, initial_cap);
    ChainSolution prev = solve_chain(transition, cap, max_lag);
    while (cap <= kMaxCap) {
        const long next_cap = 2 * cap;
        ChainSolution cur = solve_chain(transition, next_cap, max_lag);
        const double tail = cur.pi.tail(next_cap - cap).sum();
        if (tail < 1e-12 && summary_distance(prev.summary, cur.summary) < 1e-10) return cur.summary;
        prev = std::move(cur);
        cap = next_cap;
    }
    throw NumericalError("markov_chain_moments: state cap did not stabilize");
}

MomentSummary exact_moments_stinarch1(const ModelSpec& spec, std::size_t max_lag) {
    spec.validate();
    if (spec.p() != 1 || spec.q() != 0 || spec.r() != 0 || spec.is_bounded()) {
        throw std::invalid_argument("exact moments need an unbounded STINARCH(1) spec without covariates");
    }
    if (!check_stationarity(spec).stationary) throw std::invalid_argument("exact moments need a stationary spec");
    const double mu = std::max(0.0, linear_mean(spec));
    const long cap = static_cast<long>(std::ceil(mu + 12.0 * std::sqrt(mu + spec.delta)));
    const double a0 = spec.alpha0;
    const double a1 = spec.alphas[0];
    const ModelSpec& s = spec;
    return markov_chain_moments(
        [&](long y, long x) { return conditional_pmf(y, a0 + a1 * static_cast<double>(x), s); }, cap, max_lag);
}

MomentSummary linear_approx_moments(const ModelSpec& spec, std::size_t max_lag) {
    spec.validate();
    const bool supported = spec.p() <= 1 && spec.q() <= 1 && !(spec.p() == 0 && spec.q() == 1);
    if (!supported || spec.r() != 0) throw std::invalid_argument("linear approximation supports orders (1,0) and (1,1)");
    if (!check_stationarity(spec).stationary) throw std::invalid_argument("linear approximation needs a stationary spec");
    const double a1 = spec.p() == 1 ? spec.alphas[0] : 0.0;
    const double b1 = spec.q() == 1 ? spec.betas[0] : 0.0;
    const double s = a1 + b1;

    MomentSummary out;
    out.method = MomentMethod::LinearApprox;
    out.mean = spec.alpha0 / (1.0 - s);
    const double ratio = skellam::censored_moments(skellam::SkellamStar(out.mean, spec.delta)).dispersion_ratio();
    const double denom = 1.0 - s * s + a1 * a1;
    out.dispersion_ratio = ratio * denom / (1.0 - s * s);
    const double rho1 = a1 * (1.0 - b1 * s) / denom;
    double rho = rho1;
    for (std::size_t h = 1; h <= max_lag; ++h) {
        out.acf.push_back(rho);
        rho *= s;
    }
    out.pacf = durbin_levinson(out.acf);
    return out;
}

MomentSummary simulated_moments(const ModelSpec& spec, std::size_t n, std::size_t max_lag, Rng& rng,
                                std::size_t burn_in) {
    const SimulationResult sim = simulate(spec, n, burn_in, rng);
    const auto& x = sim.series.counts;
    double mean = 0.0;
    for (long v : x) mean += static_cast<double>(v);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (long v : x) var += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    var /= static_cast<double>(n);

    MomentSummary out;
    out.method = MomentMethod::Simulated;
    out.mean = mean;
    out.dispersion_ratio = var / mean;
    AcfPacf ap = sample_acf_pacf(x, max_lag);
    out.acf = std::move(ap.acf);
    out.pacf = std::move(ap.pacf);
    return out;
}

}  // namespace stobit
