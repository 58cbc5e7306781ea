#pragma once

#include <limits>
#include <stdexcept>

namespace stobit {

/// Raised when a series or iteration cannot reach its target accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace specialfn {

/// Natural log of a nonnegative quantity; -inf encodes an exact zero.
struct LogValue {
    double log_magnitude = -std::numeric_limits<double>::infinity();

    [[nodiscard]] double value() const;
    [[nodiscard]] bool is_zero() const { return log_magnitude == -std::numeric_limits<double>::infinity(); }
};

/**
 * ln I_n(z) for integer order n (I_{-n} = I_n) and z >= 0.
 *
 * The power series is summed in log domain outward from its largest term, so
 * the result is the exponentially scaled series with the scale re-applied as
 * a log offset. Throws std::domain_error for z < 0 and NumericalError when
 * the series needs more than 500 terms.
 */
[[nodiscard]] LogValue log_bessel_i(int n, double z);

/// I_{n+1}(z) - I_{n-1}(z) + (2n/z) I_n(z); zero up to rounding. z > 0.
[[nodiscard]] double bessel_recurrence_residual(int n, double z);

/// Regularized lower incomplete gamma P(s, x), s > 0, x >= 0.
[[nodiscard]] double reg_incomplete_gamma_lower(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
[[nodiscard]] double reg_incomplete_gamma_upper(double s, double x);

/// CDF of the noncentral chi-square law with nu degrees of freedom and
/// noncentrality tau, as a Poisson(tau/2) mixture of central chi-square CDFs.
[[nodiscard]] double noncentral_chisq_cdf(double x, double nu, double tau);

/// log of the Poisson(mean) probability of k (k may be negative -> -inf).
[[nodiscard]] double poisson_log_pmf(long k, double mean);

/// Poisson(mean) CDF at k.
[[nodiscard]] double poisson_cdf(long k, double mean);

}  // namespace specialfn
}  // namespace stobit
