#ifndef SWITCHCRAFT_NEWTON_HPP
#define SWITCHCRAFT_NEWTON_HPP

#include <functional>
#include <optional>

#include "switchcraft/core.hpp"
#include "switchcraft/threads.hpp"

namespace sc {

// residual evaluation may fail (propagation left its domain); the line
// search treats a failed trial point as a rejection
using ResidualFn = std::function<std::optional<VectorXd>(const VectorXd&)>;

struct NewtonOptions {
    int max_iter = 50;
    double tol_inf = 1e-8;        // convergence on the infinity norm of the residual
    double fd_step = 1e-7;        // relative forward-difference column step
    double ls_factor = 0.5;       // backtracking contraction
    double ls_min_step = 1e-4;    // smallest fraction of the Newton step
    int jobs = 1;                 // parallel Jacobian columns
    int stall_limit = 8;          // give up after this many nearly-flat iterations
};

struct NewtonResult {
    VectorXd x;
    VectorXd residual;
    double norm_inf = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

// damped Newton with forward-difference Jacobian and backtracking line
// search on the residual 2-norm
inline NewtonResult newton_solve(const ResidualFn& fn, const VectorXd& x0,
                                 const NewtonOptions& opt = {}) {
    NewtonResult res;
    res.x = x0;

    auto r0 = fn(res.x);
    if (!r0) return res;
    res.residual = *r0;
    res.norm_inf = res.residual.lpNorm<Eigen::Infinity>();

    const auto n = x0.size();
    const auto m = res.residual.size();
    double best_norm = res.norm_inf;
    int stalled = 0;

    for (int it = 0; it < opt.max_iter; ++it) {
        res.iterations = it;
        if (res.norm_inf < opt.tol_inf) {
            res.converged = true;
            return res;
        }
        if (res.norm_inf < best_norm * (1.0 - 1e-3)) {
            best_norm = res.norm_inf;
            stalled = 0;
        } else if (++stalled > opt.stall_limit) {
            return res;
        }

        MatrixXd jac(m, n);
        std::atomic<bool> column_failed{false};
        parallel_for(static_cast<std::size_t>(n), opt.jobs, [&](std::size_t j) {
            VectorXd xp = res.x;
            const double h = opt.fd_step * std::max(1.0, std::abs(xp(j)));
            xp(j) += h;
            const auto rp = fn(xp);
            if (!rp) {
                column_failed = true;
                return;
            }
            jac.col(j) = (*rp - res.residual) / h;
        });
        if (column_failed) return res;

        const VectorXd step = jac.fullPivLu().solve(-res.residual);
        if (!step.allFinite()) return res;

        const double f_cur = res.residual.squaredNorm();
        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= opt.ls_min_step) {
            const VectorXd xt = res.x + alpha * step;
            const auto rt = fn(xt);
            if (rt && rt->squaredNorm() < f_cur * (1.0 - 1e-4 * alpha)) {
                res.x = xt;
                res.residual = *rt;
                res.norm_inf = res.residual.lpNorm<Eigen::Infinity>();
                accepted = true;
                break;
            }
            alpha *= opt.ls_factor;
        }
        if (!accepted) {
            // full step may still be worth taking when the quadratic phase
            // has begun and the 2-norm test is marginal
            const VectorXd xt = res.x + step;
            const auto rt = fn(xt);
            if (rt && rt->lpNorm<Eigen::Infinity>() < res.norm_inf) {
                res.x = xt;
                res.residual = *rt;
                res.norm_inf = res.residual.lpNorm<Eigen::Infinity>();
            } else {
                return res;  // stalled
            }
        }
    }
    res.converged = res.norm_inf < opt.tol_inf;
    return res;
}

}  // namespace sc

#endif
