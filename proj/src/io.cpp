#include "stobit/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace stobit::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno == 0 && std::isfinite(out);
}

nlohmann::json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

double number_from(const nlohmann::json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number_or_null(v(i)));
    return arr;
}

nlohmann::json vector_json(const std::vector<double>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (double x : v) arr.push_back(number_or_null(x));
    return arr;
}

FitMethod method_from(const std::string& s) {
    for (FitMethod m : {FitMethod::MleScenario1, FitMethod::MleScenario2, FitMethod::Clade, FitMethod::Cls,
                        FitMethod::TinarsMle, FitMethod::StbingarchMle}) {
        if (to_string(m) == s) return m;
    }
    throw std::invalid_argument("unknown fit method '" + s + "'");
}

}  // namespace

IngestionError::IngestionError(const std::string& message, std::size_t row)
    : std::runtime_error(row > 0 ? "row " + std::to_string(row) + ": " + message : message), row_(row) {}

CountSeries parse_count_csv(std::istream& in, std::optional<long> bound) {
    std::vector<long> counts;
    std::vector<std::vector<double>> covs;
    std::string line;
    std::size_t row = 0;
    std::size_t columns = 0;
    std::size_t blank_row = 0;
    std::size_t skip = 0;  // a leading time-index column is dropped
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) {
            if (blank_row == 0) blank_row = row;
            continue;
        }
        if (blank_row != 0) throw IngestionError("missing value (blank line)", blank_row);
        std::vector<std::string> fields = split_fields(line);
        double first = 0.0;
        if (counts.empty() && columns == 0 && !parse_real(fields[0], first) && !fields[0].empty()) {
            if (fields.size() > 1 && (fields[0] == "t" || fields[0] == "time")) skip = 1;
            columns = fields.size() - skip;  // header line
            continue;
        }
        fields.erase(fields.begin(), fields.begin() + static_cast<std::ptrdiff_t>(std::min(skip, fields.size())));
        if (columns == 0) columns = fields.size();
        if (fields.size() != columns) {
            throw IngestionError("expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()),
                                 row);
        }
        double value = 0.0;
        if (fields[0].empty()) throw IngestionError("missing count", row);
        if (!parse_real(fields[0], value)) throw IngestionError("count '" + fields[0] + "' is not a number", row);
        if (value != std::floor(value)) throw IngestionError("count '" + fields[0] + "' is not an integer", row);
        if (value < 0.0) throw IngestionError("count " + fields[0] + " is negative", row);
        if (value > static_cast<double>(std::numeric_limits<long>::max() / 2)) throw IngestionError("count too large", row);
        const auto count = static_cast<long>(value);
        if (bound && count > *bound) {
            throw IngestionError("count " + fields[0] + " exceeds bound " + std::to_string(*bound), row);
        }
        std::vector<double> z;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            double v = 0.0;
            const std::size_t column = c + 1 + skip;
            if (fields[c].empty()) throw IngestionError("missing covariate in column " + std::to_string(column), row);
            if (!parse_real(fields[c], v)) {
                throw IngestionError("covariate '" + fields[c] + "' in column " + std::to_string(column) +
                                         " is not a number",
                                     row);
            }
            z.push_back(v);
        }
        counts.push_back(count);
        covs.push_back(std::move(z));
    }
    if (counts.empty()) throw IngestionError("no observations", 0);
    const std::size_t r = columns > 0 ? columns - 1 : 0;
    Eigen::MatrixXd z(static_cast<Eigen::Index>(counts.size()), static_cast<Eigen::Index>(r));
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t c = 0; c < r; ++c) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = covs[i][c];
    }
    return CountSeries(std::move(counts), std::move(z));
}

CountSeries read_count_csv(const std::string& path, std::optional<long> bound) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open '" + path + "'", 0);
    return parse_count_csv(in, bound);
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_series_csv(std::ostream& out, const CountSeries& series) {
    out << "t,count";
    for (std::size_t c = 0; c < series.covariate_count(); ++c) out << ",z" << (c + 1);
    out << '\n';
    for (std::size_t t = 0; t < series.size(); ++t) {
        out << (t + 1) << ',' << series.counts[t];
        for (std::size_t c = 0; c < series.covariate_count(); ++c) {
            out << ',' << format_number(series.covariates(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)));
        }
        out << '\n';
    }
}

nlohmann::json to_json(const FitResult& fit) {
    nlohmann::json params = nlohmann::json::array();
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        nlohmann::json p;
        p["name"] = fit.names[i];
        p["estimate"] = number_or_null(fit.estimates(idx));
        p["std_error"] = fit.std_errors ? number_or_null((*fit.std_errors)(idx)) : nlohmann::json(nullptr);
        params.push_back(p);
    }
    nlohmann::json j;
    j["method"] = to_string(fit.method);
    j["parameters"] = params;
    j["loglik"] = number_or_null(fit.loglik);
    j["objective"] = number_or_null(fit.objective);
    j["aic"] = number_or_null(fit.aic);
    j["bic"] = number_or_null(fit.bic);
    j["n_effective"] = fit.n_effective;
    j["hessian_invertible"] = fit.hessian_invertible;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    return j;
}

FitResult fit_from_json(const nlohmann::json& j) {
    FitResult fit;
    fit.method = method_from(j.at("method").get<std::string>());
    const auto& params = j.at("parameters");
    fit.estimates = Eigen::VectorXd(static_cast<Eigen::Index>(params.size()));
    Eigen::VectorXd se(static_cast<Eigen::Index>(params.size()));
    bool has_se = !params.empty();
    for (std::size_t i = 0; i < params.size(); ++i) {
        fit.names.push_back(params[i].at("name").get<std::string>());
        fit.estimates(static_cast<Eigen::Index>(i)) = number_from(params[i].at("estimate"));
        if (params[i].at("std_error").is_null()) {
            has_se = false;
        } else {
            se(static_cast<Eigen::Index>(i)) = params[i].at("std_error").get<double>();
        }
    }
    if (has_se) fit.std_errors = se;
    fit.loglik = number_from(j.at("loglik"));
    fit.objective = number_from(j.at("objective"));
    fit.aic = number_from(j.at("aic"));
    fit.bic = number_from(j.at("bic"));
    fit.n_effective = j.at("n_effective").get<std::size_t>();
    fit.hessian_invertible = j.at("hessian_invertible").get<bool>();
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    return fit;
}

nlohmann::json to_json(const MomentSummary& summary) {
    nlohmann::json j;
    j["method"] = to_string(summary.method);
    j["mean"] = number_or_null(summary.mean);
    j["dispersion_ratio"] = number_or_null(summary.dispersion_ratio);
    j["acf"] = vector_json(summary.acf);
    j["pacf"] = vector_json(summary.pacf);
    return j;
}

nlohmann::json to_json(const ResidualReport& report) {
    nlohmann::json j;
    j["count"] = report.residuals.size();
    j["mean"] = number_or_null(report.mean);
    j["variance"] = number_or_null(report.variance);
    j["acf"] = vector_json(report.acf);
    return j;
}

nlohmann::json to_json(const McStudyResult& result) {
    nlohmann::json j;
    const auto& c = result.config;
    nlohmann::json dgp;
    dgp["alpha0"] = c.dgp.alpha0;
    dgp["alphas"] = c.dgp.alphas;
    dgp["betas"] = c.dgp.betas;
    dgp["delta"] = c.dgp.delta;
    j["dgp"] = dgp;
    j["n"] = c.n;
    j["replications"] = c.replications;
    j["burn_in"] = c.burn_in;
    j["seed"] = c.seed;
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& s : result.methods) {
        nlohmann::json m;
        m["method"] = to_string(s.method);
        m["names"] = s.names;
        m["successes"] = s.successes;
        m["failures"] = s.failures;
        m["non_converged"] = s.non_converged;
        m["hessian_non_invertible"] = s.hessian_non_invertible;
        m["hessian_non_invertible_rate"] =
            s.successes > 0 ? number_or_null(static_cast<double>(s.hessian_non_invertible) / static_cast<double>(s.successes))
                            : nlohmann::json(nullptr);
        m["mean"] = vector_json(s.mean);
        m["simulated_se"] = vector_json(s.simulated_se);
        m["mean_approx_se"] = vector_json(s.mean_approx_se);
        methods.push_back(m);
    }
    j["methods"] = methods;
    return j;
}

}  // namespace stobit::io
