#include "stobit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace stobit::optimize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const Eigen::VectorXd& x, int& evals) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

double step_for(double x, double relative) { return relative * std::max(1.0, std::abs(x)); }

}  // namespace

OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const NelderMeadOptions& options) {
    const Eigen::Index n = x0.size();
    OptimResult out;
    if (n == 0) {
        out.x = x0;
        out.value = safe_eval(f, x0, out.evaluations);
        out.converged = true;
        return out;
    }

    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> values(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        double h = options.initial_step.size() == n ? options.initial_step(i) : 0.05 * std::abs(x0(i));
        if (options.initial_step.size() != n && h < 0.05) h = 0.05;
        simplex[static_cast<std::size_t>(i + 1)](i) += h;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = safe_eval(f, simplex[i], out.evaluations);

    std::vector<std::size_t> order(simplex.size());
    const double alpha = 1.0;
    const double gamma = 2.0;
    const double rho = 0.5;
    const double sigma = 0.5;

    while (out.evaluations < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        {
            std::vector<Eigen::VectorXd> s2;
            std::vector<double> v2;
            for (std::size_t i : order) {
                s2.push_back(simplex[i]);
                v2.push_back(values[i]);
            }
            simplex.swap(s2);
            values.swap(v2);
        }
        ++out.iterations;

        const double best = values.front();
        const double worst = values.back();
        double x_spread = 0.0;
        for (std::size_t i = 1; i < simplex.size(); ++i) {
            x_spread = std::max(x_spread, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
        }
        if (std::isfinite(worst) && worst - best <= options.f_tolerance * (std::abs(best) + 1e-10) &&
            x_spread <= options.x_tolerance) {
            out.converged = true;
            break;
        }
        if (std::isfinite(best) && std::isfinite(worst) && worst - best == 0.0 && x_spread <= options.x_tolerance * 10) {
            out.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[static_cast<std::size_t>(i)];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd& xw = simplex.back();
        const Eigen::VectorXd xr = centroid + alpha * (centroid - xw);
        const double fr = safe_eval(f, xr, out.evaluations);
        const double second_worst = values[values.size() - 2];

        if (fr < best) {
            const Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
            const double fe = safe_eval(f, xe, out.evaluations);
            if (fe < fr) {
                simplex.back() = xe;
                values.back() = fe;
            } else {
                simplex.back() = xr;
                values.back() = fr;
            }
            continue;
        }
        if (fr < second_worst) {
            simplex.back() = xr;
            values.back() = fr;
            continue;
        }
        // Contraction: outside if the reflection improved on the worst, inside otherwise.
        const bool outside = fr < worst;
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + rho * (xr - centroid))
                                           : Eigen::VectorXd(centroid + rho * (xw - centroid));
        const double fc = safe_eval(f, xc, out.evaluations);
        if (fc < (outside ? fr : worst)) {
            simplex.back() = xc;
            values.back() = fc;
            continue;
        }
        for (std::size_t i = 1; i < simplex.size(); ++i) {
            simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0]);
            values[i] = safe_eval(f, simplex[i], out.evaluations);
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    out.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
    out.value = *best_it;
    return out;
}

Eigen::MatrixXd hessian_from_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
                                      const Eigen::VectorXd& x, double relative_step) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double step = step_for(x(j), relative_step);
        Eigen::VectorXd up = x;
        Eigen::VectorXd down = x;
        up(j) += step;
        down(j) -= step;
        h.col(j) = (gradient(up) - gradient(down)) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd hessian_from_values(const Objective& f, const Eigen::VectorXd& x, double relative_step) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd h(n, n);
    const double f0 = f(x);
    Eigen::VectorXd steps(n);
    for (Eigen::Index i = 0; i < n; ++i) steps(i) = step_for(x(i), relative_step);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd up = x;
        Eigen::VectorXd down = x;
        up(i) += steps(i);
        down(i) -= steps(i);
        h(i, i) = (f(up) - 2.0 * f0 + f(down)) / (steps(i) * steps(i));
        for (Eigen::Index j = 0; j < i; ++j) {
            Eigen::VectorXd pp = x;
            Eigen::VectorXd pm = x;
            Eigen::VectorXd mp = x;
            Eigen::VectorXd mm = x;
            pp(i) += steps(i);
            pp(j) += steps(j);
            pm(i) += steps(i);
            pm(j) -= steps(j);
            mp(i) -= steps(i);
            mp(j) += steps(j);
            mm(i) -= steps(i);
            mm(j) -= steps(j);
            h(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * steps(i) * steps(j));
            h(j, i) = h(i, j);
        }
    }
    return h;
}

Eigen::VectorXd gradient_from_values(const Objective& f, const Eigen::VectorXd& x, double relative_step) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = step_for(x(i), relative_step);
        Eigen::VectorXd up = x;
        Eigen::VectorXd down = x;
        up(i) += step;
        down(i) -= step;
        g(i) = (f(up) - f(down)) / (2.0 * step);
    }
    return g;
}

CovarianceResult invert_negative_hessian(const Eigen::MatrixXd& hessian) {
    CovarianceResult out;
    const Eigen::Index n = hessian.rows();
    if (n == 0 || !hessian.allFinite()) return out;
    const Eigen::MatrixXd info = -hessian;
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(info(i, i) > 0.0)) return out;
        scale(i) = 1.0 / std::sqrt(info(i, i));
    }
    const Eigen::MatrixXd scaled = scale.asDiagonal() * info * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
    if (eig.info() != Eigen::Success) return out;
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || lo / hi < 1e-10) return out;
    const Eigen::MatrixXd scaled_inv =
        eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    out.covariance = scale.asDiagonal() * scaled_inv * scale.asDiagonal();
    out.invertible = true;
    return out;
}

}  // namespace stobit::optimize
