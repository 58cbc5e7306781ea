#pragma once

#include <functional>

#include <Eigen/Dense>

namespace stobit::optimize {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct NelderMeadOptions {
    int max_evaluations = 4000;
    double f_tolerance = 1e-11;  ///< relative spread of simplex values
    double x_tolerance = 1e-8;   ///< max coordinate distance to the best vertex
    Eigen::VectorXd initial_step;  ///< per-coordinate simplex edge; empty -> 5% of |x0| (at least 0.05)
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Minimizes f by the Nelder-Mead simplex method. Non-finite values are
/// treated as +inf, so infeasible trial points are simply rejected.
[[nodiscard]] OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                                      const NelderMeadOptions& options = {});

/// Central-difference Jacobian of a vector field, symmetrized. Used as a Hessian of a scalar
/// function whose gradient is `gradient`.
[[nodiscard]] Eigen::MatrixXd hessian_from_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
                                                    const Eigen::VectorXd& x, double relative_step = 1e-5);

/// Second-order central differences of a scalar function.
[[nodiscard]] Eigen::MatrixXd hessian_from_values(const Objective& f, const Eigen::VectorXd& x,
                                                  double relative_step = 1e-4);

/// Central-difference gradient of a scalar function.
[[nodiscard]] Eigen::VectorXd gradient_from_values(const Objective& f, const Eigen::VectorXd& x,
                                                   double relative_step = 1e-6);

struct CovarianceResult {
    bool invertible = false;
    Eigen::MatrixXd covariance;  ///< inverse of -H when invertible
};

/// Inverts -H for a log-likelihood Hessian H. Requires -H to be positive definite
/// with reciprocal condition number of its scaled form above 1e-10.
[[nodiscard]] CovarianceResult invert_negative_hessian(const Eigen::MatrixXd& hessian);

}  // namespace stobit::optimize
