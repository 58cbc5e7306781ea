#include "stobit/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace stobit::specialfn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxBesselTerms = 500;
constexpr double kSeriesEps = 1e-16;
constexpr int kMaxGammaIterations = 100000;

double log_series_term(int k, int n, double log_half_z) {
    return (2.0 * k + n) * log_half_z - std::lgamma(k + 1.0) - std::lgamma(k + n + 1.0);
}

// Series for P(s, x), valid and fast for x < s + 1.
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    double ap = s;
    for (int i = 0; i < kMaxGammaIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kSeriesEps) {
            return sum * std::exp(s * std::log(x) - x - std::lgamma(s));
        }
    }
    throw NumericalError("incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for Q(s, x), valid for x >= s + 1.
double gamma_q_continued_fraction(double s, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxGammaIterations; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kSeriesEps) {
            return std::exp(s * std::log(x) - x - std::lgamma(s)) * h;
        }
    }
    throw NumericalError("incomplete gamma continued fraction did not converge");
}

void check_gamma_args(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("incomplete gamma: shape must be positive");
    if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: argument must be nonnegative");
}

}  // namespace

double LogValue::value() const { return std::exp(log_magnitude); }

LogValue log_bessel_i(int n, double z) {
    if (!(z >= 0.0)) throw std::domain_error("log_bessel_i: argument must be nonnegative");
    n = std::abs(n);
    if (z == 0.0) return LogValue{n == 0 ? 0.0 : kNegInf};

    const double half_z = 0.5 * z;
    const double log_half_z = std::log(half_z);
    const double y2 = half_z * half_z;

    // Largest term sits where (k+1)(k+n+1) ~ (z/2)^2.
    const double root = 0.5 * (-(n + 2.0) + std::sqrt(static_cast<double>(n) * n + 4.0 * y2));
    const int peak = std::max(0, static_cast<int>(std::lround(root)));
    const double log_peak = log_series_term(peak, n, log_half_z);

    double sum = 1.0;
    int terms = 1;

    // Upward from the peak; term ratio y2 / ((k+1)(k+n+1)) decreases in k.
    double term = 1.0;
    for (int k = peak;; ++k) {
        const double ratio = y2 / ((k + 1.0) * (k + n + 1.0));
        term *= ratio;
        sum += term;
        if (++terms > kMaxBesselTerms) throw NumericalError("log_bessel_i: series term cap reached");
        if (ratio < 1.0 && term < kSeriesEps * sum * (1.0 - ratio)) break;
    }

    // Downward from the peak; ratio k(k+n) / y2 decreases as k decreases.
    term = 1.0;
    for (int k = peak; k > 0; --k) {
        const double ratio = k * (k + static_cast<double>(n)) / y2;
        term *= ratio;
        sum += term;
        if (++terms > kMaxBesselTerms) throw NumericalError("log_bessel_i: series term cap reached");
        if (ratio < 1.0 && term < kSeriesEps * sum * (1.0 - ratio)) break;
    }

    return LogValue{log_peak + std::log(sum)};
}

double bessel_recurrence_residual(int n, double z) {
    if (!(z > 0.0)) throw std::domain_error("bessel_recurrence_residual: argument must be positive");
    const double up = log_bessel_i(n + 1, z).value();
    const double down = log_bessel_i(n - 1, z).value();
    const double mid = log_bessel_i(n, z).value();
    return up - down + (2.0 * n / z) * mid;
}

double reg_incomplete_gamma_lower(double s, double x) {
    check_gamma_args(s, x);
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return std::clamp(gamma_p_series(s, x), 0.0, 1.0);
    return std::clamp(1.0 - gamma_q_continued_fraction(s, x), 0.0, 1.0);
}

double reg_incomplete_gamma_upper(double s, double x) {
    check_gamma_args(s, x);
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return std::clamp(1.0 - gamma_p_series(s, x), 0.0, 1.0);
    return std::clamp(gamma_q_continued_fraction(s, x), 0.0, 1.0);
}

double noncentral_chisq_cdf(double x, double nu, double tau) {
    if (!(nu > 0.0)) throw std::domain_error("noncentral_chisq_cdf: degrees of freedom must be positive");
    if (!(x >= 0.0)) throw std::domain_error("noncentral_chisq_cdf: argument must be nonnegative");
    if (!(tau >= 0.0)) throw std::domain_error("noncentral_chisq_cdf: noncentrality must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;

    const double half_x = 0.5 * x;
    const double half_nu = 0.5 * nu;
    if (tau == 0.0) return reg_incomplete_gamma_lower(half_nu, half_x);

    // Poisson(tau/2) weights, summed outward from the mode so that no weight underflows
    // before it matters.
    const double lambda = 0.5 * tau;
    const long mode = static_cast<long>(std::floor(lambda));
    const double log_lambda = std::log(lambda);
    auto log_weight = [&](long j) { return j * log_lambda - lambda - std::lgamma(j + 1.0); };

    const double w_mode = std::exp(log_weight(mode));
    double sum = w_mode * reg_incomplete_gamma_lower(half_nu + mode, half_x);

    // Upward: P(s + j, x) decreases in j, so the neglected tail is bounded by
    // (geometric weight tail) * current P.
    double w = w_mode;
    for (long j = mode + 1;; ++j) {
        w *= lambda / j;
        const double p = reg_incomplete_gamma_lower(half_nu + j, half_x);
        sum += w * p;
        const double ratio = lambda / (j + 1.0);
        const double tail = w * ratio / (1.0 - ratio);
        if (tail * p <= 1e-16 * sum || tail < 1e-300 || p == 0.0) break;
    }

    // Downward: P grows as j decreases, so bound the tail by the weight tail alone.
    w = w_mode;
    for (long j = mode - 1; j >= 0; --j) {
        w *= (j + 1.0) / lambda;
        sum += w * reg_incomplete_gamma_lower(half_nu + j, half_x);
        const double ratio = j / lambda;
        const double tail = ratio < 1.0 ? w * ratio / (1.0 - ratio) : w * (j + 1.0);
        if (tail <= 1e-16 * sum || tail < 1e-300) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double poisson_log_pmf(long k, double mean) {
    if (k < 0) return kNegInf;
    if (mean == 0.0) return k == 0 ? 0.0 : kNegInf;
    return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

double poisson_cdf(long k, double mean) {
    if (k < 0) return 0.0;
    if (mean == 0.0) return 1.0;
    return reg_incomplete_gamma_upper(k + 1.0, mean);
}

}  // namespace stobit::specialfn
