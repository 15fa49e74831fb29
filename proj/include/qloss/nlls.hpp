#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace qloss {

// Residual model: fills r(params) and, when jac != nullptr, J = dr/dparams.
using ResidualFn =
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)>;

struct NllsOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-12;
    double step_tol = 1e-14;
    double initial_lambda = 1e-3;
};

struct NllsResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;   // s^2 (J^T J)^-1 at the optimum
    Eigen::VectorXd param_sd;     // sqrt of the covariance diagonal
    double residual_norm = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> cost_trace;  // residual norm per accepted step
};

// Damped Gauss-Newton (Levenberg-Marquardt). Throws std::runtime_error with
// the cost trace rendered into the message if the iteration cap is hit
// without meeting either tolerance.
NllsResult levenberg_marquardt(const ResidualFn& fn, int n_residuals,
                               const Eigen::VectorXd& x0,
                               const NllsOptions& opts = {});

}  // namespace qloss
