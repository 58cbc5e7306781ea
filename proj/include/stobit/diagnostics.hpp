#pragma once

#include <cstddef>
#include <vector>

#include "stobit/stingarch.hpp"

namespace stobit {

struct AcfPacf {
    std::vector<double> acf;   ///< acf[h-1] is lag h
    std::vector<double> pacf;  ///< pacf[h-1] is lag h
};

/// Partial autocorrelations from autocorrelations at lags 1..H (Durbin-Levinson).
[[nodiscard]] std::vector<double> durbin_levinson(const std::vector<double>& acf);

/// Sample ACF with 1/n covariance normalization and PACF by Durbin-Levinson.
/// Throws std::invalid_argument for a constant series or one not longer than max_lag.
[[nodiscard]] AcfPacf sample_acf_pacf(const std::vector<double>& values, std::size_t max_lag);
[[nodiscard]] AcfPacf sample_acf_pacf(const std::vector<long>& counts, std::size_t max_lag);

struct InformationCriteria {
    double aic;
    double bic;
};

[[nodiscard]] InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n_effective);

struct ResidualReport {
    std::vector<double> residuals;
    std::vector<std::size_t> times;  ///< 1-based observation index of each residual
    double mean = 0.0;
    double variance = 0.0;  ///< n - 1 denominator
    std::vector<double> acf;
};

/// Pearson residuals (x_t - E[X_t | past]) / sd(X_t | past) from given conditional moments.
/// Residuals are reported for t >= first_time (0-based); the summary skips `excluded_times` (1-based).
[[nodiscard]] ResidualReport residual_report(const std::vector<long>& counts, const std::vector<double>& cond_mean,
                                             const std::vector<double>& cond_var, std::size_t first_time,
                                             std::size_t max_lag = 5,
                                             const std::vector<std::size_t>& excluded_times = {});

/// Recomputes mean, variance and ACF without the residuals at the given 1-based times.
[[nodiscard]] ResidualReport exclude_times(const ResidualReport& report, const std::vector<std::size_t>& excluded_times,
                                           std::size_t max_lag = 5);

/// Standardized Pearson residuals of a STINGARCH or STBINGARCH spec, starting at t = max(p, q) + 1.
/// Throws NumericalError when a conditional variance is zero.
[[nodiscard]] ResidualReport pearson_residuals(const ModelSpec& spec, const CountSeries& series,
                                               std::size_t max_lag = 5);

}  // namespace stobit
