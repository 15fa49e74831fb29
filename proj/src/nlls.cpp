#include "qloss/nlls.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qloss {

NllsResult levenberg_marquardt(const ResidualFn& fn, int n_residuals,
                               const Eigen::VectorXd& x0,
                               const NllsOptions& opts) {
    const int np = static_cast<int>(x0.size());
    Eigen::VectorXd x = x0;
    Eigen::VectorXd r(n_residuals);
    Eigen::MatrixXd jac(n_residuals, np);
    fn(x, r, &jac);
    double cost = r.squaredNorm();

    NllsResult res;
    res.cost_trace.push_back(std::sqrt(cost));
    double lambda = opts.initial_lambda;
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iterations && !converged; ++it) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
            converged = true;
            break;
        }
        bool accepted = false;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            const Eigen::VectorXd x_new = x + step;
            Eigen::VectorXd r_new(n_residuals);
            fn(x_new, r_new, nullptr);
            const double cost_new = r_new.squaredNorm();
            if (cost_new < cost) {
                const double rel_step =
                    step.norm() / std::max(1e-30, x.norm());
                x = x_new;
                fn(x, r, &jac);
                cost = r.squaredNorm();
                res.cost_trace.push_back(std::sqrt(cost));
                lambda = std::max(lambda * 0.3, 1e-14);
                accepted = true;
                if (rel_step < opts.step_tol) converged = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted) {
            converged = true;  // no descent direction left at machine scale
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "nonlinear fit did not converge after " << it
           << " iterations; cost trace:";
        for (double c : res.cost_trace) os << ' ' << c;
        throw std::runtime_error(os.str());
    }

    res.params = x;
    res.residual_norm = std::sqrt(cost);
    res.iterations = it;
    res.converged = true;
    const int dof = n_residuals - np;
    const double s2 = dof > 0 ? cost / dof : 0.0;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    res.covariance =
        s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
    res.param_sd = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return res;
}

}  // namespace qloss
