// Command-line front end: simulate, fit, moments, diagnose, mc-study.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stobit/diagnostics.hpp"
#include "stobit/estimation.hpp"
#include "stobit/extensions.hpp"
#include "stobit/io.hpp"
#include "stobit/specialfn.hpp"
#include "stobit/stingarch.hpp"

namespace {

using nlohmann::json;
using namespace stobit;

constexpr int kExitConfig = 1;
constexpr int kExitIngestion = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNonConvergence = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelOptions {
    std::string model = "stingarch";
    double alpha0 = 0.0;
    bool alpha0_set = false;
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<double> gammas;
    std::optional<double> alpha1;
    std::optional<double> beta1;
    double delta = 0.25;
    std::optional<long> bound;
    std::optional<double> kappa;
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
    cmd->add_option("--model", m.model, "stingarch | tinars1 | stbingarch")
        ->check(CLI::IsMember({"stingarch", "tinars1", "stbingarch"}));
    cmd->add_option("--alpha0", m.alpha0, "intercept (innovation mean for tinars1)")
        ->each([&m](const std::string&) { m.alpha0_set = true; });
    cmd->add_option("--alpha1", m.alpha1, "lag-1 count coefficient");
    cmd->add_option("--beta1", m.beta1, "lag-1 mean coefficient");
    cmd->add_option("--alphas", m.alphas, "count coefficients alpha1..alphap")->delimiter(',');
    cmd->add_option("--betas", m.betas, "mean coefficients beta1..betaq")->delimiter(',');
    cmd->add_option("--gammas", m.gammas, "covariate coefficients")->delimiter(',');
    cmd->add_option("--delta", m.delta, "Skellam dispersion (fixed value in scenario 1)");
    cmd->add_option("--bound", m.bound, "upper bound N (stbingarch)");
    cmd->add_option("--kappa", m.kappa, "one-inflation probability (stbingarch)");
}

ModelSpec build_spec(const ModelOptions& m) {
    ModelSpec spec;
    spec.alpha0 = m.alpha0;
    spec.alphas = m.alphas;
    spec.betas = m.betas;
    if (m.alpha1) {
        if (!spec.alphas.empty()) throw ConfigError("use either --alpha1 or --alphas");
        spec.alphas = {*m.alpha1};
    }
    if (m.beta1) {
        if (!spec.betas.empty()) throw ConfigError("use either --beta1 or --betas");
        spec.betas = {*m.beta1};
    }
    spec.gammas = m.gammas;
    spec.delta = m.delta;
    if (m.model == "stbingarch") {
        if (!m.bound) throw ConfigError("stbingarch needs --bound");
        spec.bound = m.bound;
        spec.kappa = m.kappa.value_or(0.0);
    } else if (m.bound || m.kappa) {
        throw ConfigError("--bound and --kappa apply to stbingarch only");
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

TinarsSpec build_tinars(const ModelOptions& m) {
    TinarsSpec spec{m.alpha1.value_or(m.alphas.empty() ? 0.0 : m.alphas.front()), m.alpha0};
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    ModelOptions model;
    long n = 0;
    long burn_in = 1000;
    std::uint64_t seed = 1;
    std::string output;
    std::string covariates;
};

int run_simulate(const SimulateArgs& a) {
    if (a.n <= 0) throw ConfigError("--n must be positive");
    if (a.burn_in < 0) throw ConfigError("--burn-in must be nonnegative");
    Rng rng(a.seed);
    CountSeries series;
    if (a.model.model == "tinars1") {
        series = simulate_tinars1(build_tinars(a.model), static_cast<std::size_t>(a.n),
                                  static_cast<std::size_t>(a.burn_in), rng);
    } else {
        const ModelSpec spec = build_spec(a.model);
        Eigen::MatrixXd z;
        if (spec.r() > 0) {
            if (a.covariates.empty()) throw ConfigError("--gammas needs --covariates");
            const CountSeries cov = io::read_count_csv(a.covariates);
            if (cov.covariate_count() != spec.r() || static_cast<long>(cov.size()) != a.n) {
                throw ConfigError("covariate file must have n rows and one column per gamma after the count column");
            }
            z = cov.covariates;
        }
        const SimulationResult sim = simulate(spec, static_cast<std::size_t>(a.n), static_cast<std::size_t>(a.burn_in), rng, z);
        if (sim.stationarity_warning) std::cerr << "warning: parameters violate the stationarity condition\n";
        series = sim.series;
    }
    std::ostringstream out;
    io::write_series_csv(out, series);
    write_text(a.output, out.str());
    return 0;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    ModelOptions model;
    std::string input;
    std::size_t p = 1;
    std::size_t q = 0;
    bool scenario1 = false;
    bool scenario2 = false;
    std::string method = "mle";
    std::string output;
    std::string format = "json";
    std::size_t max_lag = 5;
};

json residual_json(const ResidualReport& r) { return io::to_json(r); }

int run_fit(const FitArgs& a) {
    if (a.input.empty()) throw ConfigError("--input is required");
    if (a.scenario1 && a.scenario2) throw ConfigError("choose one of --scenario1 and --scenario2");
    const std::optional<long> bound = a.model.model == "stbingarch" ? a.model.bound : std::nullopt;
    if (a.model.model == "stbingarch" && !bound) throw ConfigError("stbingarch needs --bound");
    const CountSeries series = io::read_count_csv(a.input, bound);

    FitResult fit;
    std::optional<ResidualReport> residuals;
    json doc;
    doc["model"] = a.model.model;
    if (a.model.model == "tinars1") {
        fit = fit_tinars1_mle(series);
        const TinarsSpec spec{fit.estimates(1), fit.estimates(0)};
        residuals = tinars1_pearson_residuals(spec, series, a.max_lag);
        const MomentSummary mom = tinars1_moments(spec, 1);
        doc["fitted_dispersion_ratio"] = mom.dispersion_ratio;
    } else if (a.model.model == "stbingarch") {
        const Orders orders{a.p, a.q, 0};
        fit = fit_stbingarch_mle(series, orders, *bound, a.model.delta);
        ModelSpec spec = spec_from_theta(fit.estimates.head(fit.estimates.size() - 1), orders, Scenario::fixed(a.model.delta));
        spec.bound = bound;
        spec.kappa = fit.estimates(fit.estimates.size() - 1);
        residuals = pearson_residuals(spec, series, a.max_lag);
        doc["delta"] = a.model.delta;
        doc["bound"] = *bound;
    } else {
        const Orders orders{a.p, a.q, series.covariate_count()};
        doc["orders"] = {{"p", a.p}, {"q", a.q}, {"r", orders.r}};
        if (a.method == "mle") {
            const Scenario scenario = a.scenario2 ? Scenario::estimated(a.model.delta) : Scenario::fixed(a.model.delta);
            fit = fit_mle(series, orders, scenario);
            residuals = pearson_residuals(spec_from_theta(fit.estimates, orders, scenario), series, a.max_lag);
            if (!a.scenario2) doc["delta"] = a.model.delta;
        } else if (a.method == "clade") {
            fit = fit_clade(series, orders);
        } else if (a.method == "cls") {
            fit = fit_cls(series, orders);
        } else {
            throw ConfigError("unknown --method '" + a.method + "'");
        }
    }
    doc["fit"] = io::to_json(fit);
    if (residuals) doc["pearson_residuals"] = residual_json(*residuals);

    if (a.format == "csv") {
        std::ostringstream out;
        out << "name,estimate,std_error\n";
        for (std::size_t i = 0; i < fit.names.size(); ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            out << fit.names[i] << ',' << io::format_number(fit.estimates(idx)) << ',';
            if (fit.std_errors) out << io::format_number((*fit.std_errors)(idx));
            out << '\n';
        }
        out << "loglik," << io::format_number(fit.loglik) << ",\n";
        out << "aic," << io::format_number(fit.aic) << ",\n";
        out << "bic," << io::format_number(fit.bic) << ",\n";
        write_text(a.output, out.str());
    } else {
        write_text(a.output, dump(doc));
    }
    return fit.converged ? 0 : kExitNonConvergence;
}

// ---------------------------------------------------------------- moments

struct MomentsArgs {
    ModelOptions model;
    std::size_t max_lag = 3;
    long sim_n = 0;
    std::uint64_t seed = 1;
    std::string output;
    std::string format = "json";
};

int run_moments(const MomentsArgs& a) {
    if (a.sim_n < 0) throw ConfigError("--sim-n must be nonnegative");
    if (a.max_lag == 0) throw ConfigError("--max-lag must be positive");
    std::vector<MomentSummary> rows;
    if (a.model.model == "tinars1") {
        rows.push_back(tinars1_moments(build_tinars(a.model), a.max_lag));
    } else {
        if (a.model.model != "stingarch") throw ConfigError("moments supports stingarch and tinars1");
        const ModelSpec spec = build_spec(a.model);
        if (!check_stationarity(spec).stationary) throw ConfigError("parameters violate the stationarity condition");
        if (spec.p() == 1 && spec.q() == 0 && spec.r() == 0) rows.push_back(exact_moments_stinarch1(spec, a.max_lag));
        if (spec.p() <= 1 && spec.q() <= 1 && !(spec.p() == 0 && spec.q() == 1) && spec.r() == 0) {
            rows.push_back(linear_approx_moments(spec, a.max_lag));
        }
        if (a.sim_n > 0) {
            Rng rng(a.seed);
            rows.push_back(simulated_moments(spec, static_cast<std::size_t>(a.sim_n), a.max_lag, rng));
        }
    }
    if (a.format == "csv") {
        std::ostringstream out;
        out << "method,mean,dispersion_ratio";
        for (std::size_t h = 1; h <= a.max_lag; ++h) out << ",acf" << h;
        for (std::size_t h = 1; h <= a.max_lag; ++h) out << ",pacf" << h;
        out << '\n';
        for (const auto& r : rows) {
            out << to_string(r.method) << ',' << io::format_number(r.mean) << ',' << io::format_number(r.dispersion_ratio);
            for (double v : r.acf) out << ',' << io::format_number(v);
            for (double v : r.pacf) out << ',' << io::format_number(v);
            out << '\n';
        }
        write_text(a.output, out.str());
    } else {
        json doc = json::array();
        for (const auto& r : rows) doc.push_back(io::to_json(r));
        write_text(a.output, dump(json{{"moments", doc}}));
    }
    return 0;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
    ModelOptions model;
    std::string input;
    std::size_t max_lag = 5;
    std::vector<std::size_t> exclude;
    std::string output;
    std::string acf_csv;
};

int run_diagnose(const DiagnoseArgs& a) {
    if (a.input.empty()) throw ConfigError("--input is required");
    if (!a.model.alpha0_set) throw ConfigError("--alpha0 and the remaining model parameters are required");
    ResidualReport report;
    if (a.model.model == "tinars1") {
        const CountSeries series = io::read_count_csv(a.input);
        report = tinars1_pearson_residuals(build_tinars(a.model), series, a.max_lag);
    } else {
        const ModelSpec spec = build_spec(a.model);
        const CountSeries series = io::read_count_csv(a.input, spec.bound);
        if (series.covariate_count() != spec.r()) {
            throw ConfigError("input has " + std::to_string(series.covariate_count()) + " covariate columns but " +
                              std::to_string(spec.r()) + " gammas were given");
        }
        report = pearson_residuals(spec, series, a.max_lag);
    }
    json doc;
    doc["pearson_residuals"] = io::to_json(report);
    if (!a.exclude.empty()) {
        doc["excluding"] = a.exclude;
        doc["pearson_residuals_excluded"] = io::to_json(exclude_times(report, a.exclude, a.max_lag));
    }
    write_text(a.output, dump(doc));
    if (!a.acf_csv.empty()) {
        std::ostringstream out;
        out << "lag,acf\n";
        for (std::size_t h = 0; h < report.acf.size(); ++h) out << (h + 1) << ',' << io::format_number(report.acf[h]) << '\n';
        write_text(a.acf_csv, out.str());
    }
    return 0;
}

// ---------------------------------------------------------------- mc-study

struct McArgs {
    ModelOptions model;
    long n = 1000;
    long replications = 100;
    long burn_in = 500;
    std::vector<std::string> methods{"mle-s1"};
    std::optional<double> fit_delta;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string output;
    std::string format = "json";
};

int run_mc(const McArgs& a) {
    if (a.n <= 2) throw ConfigError("--n must exceed 2");
    if (a.replications < 0) throw ConfigError("--reps must be nonnegative");
    if (a.model.model != "stingarch") throw ConfigError("mc-study supports the stingarch model");
    McStudyConfig cfg;
    cfg.dgp = build_spec(a.model);
    if (cfg.dgp.r() > 0) throw ConfigError("mc-study does not take covariates");
    cfg.n = static_cast<std::size_t>(a.n);
    cfg.replications = static_cast<std::size_t>(a.replications);
    cfg.burn_in = static_cast<std::size_t>(a.burn_in);
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    cfg.scenario = Scenario::fixed(a.fit_delta.value_or(cfg.dgp.delta));
    if (!(cfg.scenario.delta > 0.0)) throw ConfigError("--fit-delta must be positive");
    cfg.methods.clear();
    for (const auto& m : a.methods) {
        if (m == "mle-s1") cfg.methods.push_back(FitMethod::MleScenario1);
        else if (m == "mle-s2") cfg.methods.push_back(FitMethod::MleScenario2);
        else if (m == "clade") cfg.methods.push_back(FitMethod::Clade);
        else if (m == "cls") cfg.methods.push_back(FitMethod::Cls);
        else throw ConfigError("unknown method '" + m + "'");
    }
    const McStudyResult res = mc_study(cfg);
    if (a.format == "csv") {
        std::ostringstream out;
        out << "method,parameter,mean,simulated_se,mean_approx_se\n";
        for (const auto& s : res.methods) {
            for (std::size_t i = 0; i < s.names.size(); ++i) {
                const auto idx = static_cast<Eigen::Index>(i);
                out << to_string(s.method) << ',' << s.names[i] << ',';
                if (s.mean.size() > idx) out << io::format_number(s.mean(idx));
                out << ',';
                if (s.simulated_se.size() > idx) out << io::format_number(s.simulated_se(idx));
                out << ',';
                if (s.mean_approx_se.size() > idx) out << io::format_number(s.mean_approx_se(idx));
                out << '\n';
            }
        }
        write_text(a.output, out.str());
    } else {
        write_text(a.output, dump(io::to_json(res)));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Skellam-Tobit count time series models"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "simulate a path and write it as CSV");
    add_model_options(c_sim, sim.model);
    c_sim->add_option("--n", sim.n, "path length")->required();
    c_sim->add_option("--burn-in", sim.burn_in, "discarded leading steps");
    c_sim->add_option("--seed", sim.seed, "random seed");
    c_sim->add_option("--covariates", sim.covariates, "CSV whose extra columns supply covariates");
    c_sim->add_option("-o,--output", sim.output, "output path (default stdout)");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "fit a model to a count CSV");
    add_model_options(c_fit, fit.model);
    c_fit->add_option("-i,--input", fit.input, "input CSV")->required();
    c_fit->add_option("-p", fit.p, "order p");
    c_fit->add_option("-q", fit.q, "order q");
    c_fit->add_flag("--scenario1", fit.scenario1, "keep delta fixed (default)");
    c_fit->add_flag("--scenario2", fit.scenario2, "estimate delta");
    c_fit->add_option("--method", fit.method, "mle | clade | cls");
    c_fit->add_option("--max-lag", fit.max_lag, "residual ACF lags");
    c_fit->add_option("--format", fit.format)->check(CLI::IsMember({"json", "csv"}));
    c_fit->add_option("-o,--output", fit.output, "output path (default stdout)");

    MomentsArgs mom;
    auto* c_mom = app.add_subcommand("moments", "exact, linear and simulated marginal moments");
    add_model_options(c_mom, mom.model);
    c_mom->add_option("--max-lag", mom.max_lag, "number of lags");
    c_mom->add_option("--sim-n", mom.sim_n, "simulated path length (0 skips simulation)");
    c_mom->add_option("--seed", mom.seed, "random seed");
    c_mom->add_option("--format", mom.format)->check(CLI::IsMember({"json", "csv"}));
    c_mom->add_option("-o,--output", mom.output, "output path (default stdout)");

    DiagnoseArgs diag;
    auto* c_diag = app.add_subcommand("diagnose", "Pearson residual diagnostics for given parameters");
    add_model_options(c_diag, diag.model);
    c_diag->add_option("-i,--input", diag.input, "input CSV")->required();
    c_diag->add_option("--max-lag", diag.max_lag, "residual ACF lags");
    c_diag->add_option("--exclude", diag.exclude, "1-based times left out of the summary")->delimiter(',');
    c_diag->add_option("-o,--output", diag.output, "JSON output path (default stdout)");
    c_diag->add_option("--acf-csv", diag.acf_csv, "write lag,acf rows here");

    McArgs mc;
    auto* c_mc = app.add_subcommand("mc-study", "Monte Carlo estimator study");
    add_model_options(c_mc, mc.model);
    c_mc->add_option("--n", mc.n, "series length");
    c_mc->add_option("--reps", mc.replications, "replications");
    c_mc->add_option("--burn-in", mc.burn_in, "discarded leading steps per replication");
    c_mc->add_option("--methods", mc.methods, "mle-s1,mle-s2,clade,cls")->delimiter(',');
    c_mc->add_option("--fit-delta", mc.fit_delta, "fixed delta for scenario-1 fits (default: DGP delta)");
    c_mc->add_option("--seed", mc.seed, "master seed");
    c_mc->add_option("--threads", mc.threads, "worker threads (default STOBIT_THREADS or all cores)");
    c_mc->add_option("--format", mc.format)->check(CLI::IsMember({"json", "csv"}));
    c_mc->add_option("-o,--output", mc.output, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_fit->parsed()) return run_fit(fit);
        if (c_mom->parsed()) return run_moments(mom);
        if (c_diag->parsed()) return run_diagnose(diag);
        if (c_mc->parsed()) return run_mc(mc);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const io::IngestionError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitIngestion;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}
