#include "stobit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stobit/extensions.hpp"
#include "stobit/specialfn.hpp"

namespace stobit {

std::vector<double> durbin_levinson(const std::vector<double>& acf) {
    const std::size_t h_max = acf.size();
    std::vector<double> pacf;
    pacf.reserve(h_max);
    std::vector<double> phi;
    double v = 1.0;
    for (std::size_t h = 1; h <= h_max; ++h) {
        double num = acf[h - 1];
        for (std::size_t j = 1; j < h; ++j) num -= phi[j - 1] * acf[h - 1 - j];
        const double kappa = v > 0.0 ? num / v : 0.0;
        std::vector<double> next(h);
        for (std::size_t j = 1; j < h; ++j) next[j - 1] = phi[j - 1] - kappa * phi[h - 1 - j];
        next[h - 1] = kappa;
        phi.swap(next);
        v *= (1.0 - kappa * kappa);
        pacf.push_back(kappa);
    }
    return pacf;
}

AcfPacf sample_acf_pacf(const std::vector<double>& values, std::size_t max_lag) {
    const std::size_t n = values.size();
    if (n <= max_lag) throw std::invalid_argument("sample_acf_pacf: series must be longer than max_lag");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = values[i] - mean;
    double c0 = 0.0;
    for (double c : centered) c0 += c * c;
    if (!(c0 > 0.0)) throw std::invalid_argument("sample_acf_pacf: constant series has no autocorrelation");
    AcfPacf out;
    for (std::size_t h = 1; h <= max_lag; ++h) {
        double ch = 0.0;
        for (std::size_t t = h; t < n; ++t) ch += centered[t] * centered[t - h];
        out.acf.push_back(ch / c0);
    }
    out.pacf = durbin_levinson(out.acf);
    return out;
}

AcfPacf sample_acf_pacf(const std::vector<long>& counts, std::size_t max_lag) {
    return sample_acf_pacf(std::vector<double>(counts.begin(), counts.end()), max_lag);
}

InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n_effective) {
    if (n_effective == 0) throw std::invalid_argument("information_criteria: sample size must be positive");
    const auto kd = static_cast<double>(k);
    return {-2.0 * loglik + 2.0 * kd, -2.0 * loglik + kd * std::log(static_cast<double>(n_effective))};
}

namespace {

void summarize(ResidualReport& report, const std::vector<std::size_t>& excluded, std::size_t max_lag) {
    std::vector<double> kept;
    for (std::size_t i = 0; i < report.residuals.size(); ++i) {
        if (std::find(excluded.begin(), excluded.end(), report.times[i]) == excluded.end()) {
            kept.push_back(report.residuals[i]);
        }
    }
    report.mean = 0.0;
    report.variance = 0.0;
    report.acf.clear();
    if (kept.empty()) return;
    for (double r : kept) report.mean += r;
    report.mean /= static_cast<double>(kept.size());
    if (kept.size() > 1) {
        for (double r : kept) report.variance += (r - report.mean) * (r - report.mean);
        report.variance /= static_cast<double>(kept.size() - 1);
    }
    if (kept.size() > max_lag && report.variance > 0.0) report.acf = sample_acf_pacf(kept, max_lag).acf;
}

}  // namespace

ResidualReport residual_report(const std::vector<long>& counts, const std::vector<double>& cond_mean,
                               const std::vector<double>& cond_var, std::size_t first_time, std::size_t max_lag,
                               const std::vector<std::size_t>& excluded_times) {
    if (cond_mean.size() != counts.size() || cond_var.size() != counts.size()) {
        throw std::invalid_argument("residual_report: moment vectors must match the series length");
    }
    ResidualReport report;
    for (std::size_t t = first_time; t < counts.size(); ++t) {
        if (!(cond_var[t] > 0.0)) {
            throw NumericalError("degenerate model: zero conditional variance at t=" + std::to_string(t + 1));
        }
        report.residuals.push_back((static_cast<double>(counts[t]) - cond_mean[t]) / std::sqrt(cond_var[t]));
        report.times.push_back(t + 1);
    }
    summarize(report, excluded_times, max_lag);
    return report;
}

ResidualReport exclude_times(const ResidualReport& report, const std::vector<std::size_t>& excluded_times,
                             std::size_t max_lag) {
    ResidualReport out = report;
    summarize(out, excluded_times, max_lag);
    return out;
}

ResidualReport pearson_residuals(const ModelSpec& spec, const CountSeries& series, std::size_t max_lag) {
    spec.validate();
    series.validate(spec.bound);
    const std::vector<double> m = conditional_mean_path(spec, series);
    std::vector<double> mean(series.size(), 0.0);
    std::vector<double> var(series.size(), 0.0);
    for (std::size_t t = spec.conditioning_prefix(); t < series.size(); ++t) {
        if (spec.is_bounded()) {
            const auto bm = stbingarch_conditional_moments(m[t], spec);
            mean[t] = bm.mean;
            var[t] = bm.variance;
        } else {
            const auto cm = conditional_moments(m[t], spec);
            mean[t] = cm.mean;
            var[t] = cm.variance;
        }
    }
    return residual_report(series.counts, mean, var, spec.conditioning_prefix(), max_lag);
}

}  // namespace stobit
