#ifndef SWITCHCRAFT_SQP_HPP
#define SWITCHCRAFT_SQP_HPP

#include <functional>

#include "switchcraft/core.hpp"
#include "switchcraft/threads.hpp"

namespace sc {

// equality-constrained sequential quadratic programming with a damped BFGS
// Hessian of the Lagrangian and an l1 merit line search
struct SqpProblem {
    std::function<double(const VectorXd&)> objective;
    std::function<VectorXd(const VectorXd&)> gradient;     // analytic gradient of the objective
    std::function<VectorXd(const VectorXd&)> constraints;  // c(x) = 0 at the solution
    std::function<bool(const VectorXd&)> step_ok;          // ordering bounds; optional
};

struct SqpOptions {
    int max_iter = 500;
    double kkt_tol = 1e-6;     // stationarity infinity norm
    double con_tol = 1e-8;     // constraint infinity norm
    double fd_step = 1e-7;     // relative step for the constraint Jacobian
    int jobs = 1;
};

struct SqpResult {
    VectorXd x;
    VectorXd multipliers;
    double objective = 0.0;
    double kkt_norm = std::numeric_limits<double>::infinity();
    double constraint_norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

inline SqpResult sqp_minimize(const SqpProblem& prob, const VectorXd& x0, const SqpOptions& opt = {}) {
    SqpResult res;
    res.x = x0;

    const auto n = x0.size();
    VectorXd c = prob.constraints(res.x);
    const auto m = c.size();
    VectorXd g = prob.gradient(res.x);
    double f = prob.objective(res.x);

    auto jacobian = [&](const VectorXd& x, const VectorXd& c_at_x) {
        MatrixXd jac(m, n);
        parallel_for(static_cast<std::size_t>(n), opt.jobs, [&](std::size_t j) {
            VectorXd xp = x;
            const double h = opt.fd_step * std::max(1.0, std::abs(xp(j)));
            xp(j) += h;
            jac.col(j) = (prob.constraints(xp) - c_at_x) / h;
        });
        return jac;
    };

    MatrixXd a = jacobian(res.x, c);
    MatrixXd b = MatrixXd::Identity(n, n);
    VectorXd grad_lagrangian_prev;
    VectorXd nu = VectorXd::Zero(m);
    double mu_merit = 1.0;

    for (int it = 0; it < opt.max_iter; ++it) {
        res.iterations = it;

        // KKT system for the QP step
        MatrixXd kkt = MatrixXd::Zero(n + m, n + m);
        kkt.topLeftCorner(n, n) = b;
        kkt.topRightCorner(n, m) = a.transpose();
        kkt.bottomLeftCorner(m, n) = a;
        VectorXd rhs(n + m);
        rhs.head(n) = -g;
        rhs.tail(m) = -c;
        VectorXd sol = kkt.fullPivLu().solve(rhs);
        if (!sol.allFinite()) {
            b = MatrixXd::Identity(n, n);
            kkt.topLeftCorner(n, n) = b;
            sol = kkt.fullPivLu().solve(rhs);
            if (!sol.allFinite()) break;
        }
        const VectorXd d = sol.head(n);
        nu = sol.tail(m);

        const VectorXd grad_lagrangian = g + a.transpose() * nu;
        res.kkt_norm = grad_lagrangian.lpNorm<Eigen::Infinity>();
        res.constraint_norm = c.lpNorm<Eigen::Infinity>();
        if (res.kkt_norm < opt.kkt_tol && res.constraint_norm < opt.con_tol) {
            res.converged = true;
            break;
        }

        mu_merit = std::max({mu_merit, 1.5 * nu.lpNorm<Eigen::Infinity>() + 0.1});
        const double merit0 = f + mu_merit * c.lpNorm<1>();
        const double dderiv = g.dot(d) - mu_merit * c.lpNorm<1>();

        double alpha = 1.0;
        VectorXd x_new, c_new;
        double f_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            x_new = res.x + alpha * d;
            if (!prob.step_ok || prob.step_ok(x_new)) {
                c_new = prob.constraints(x_new);
                f_new = prob.objective(x_new);
                const double merit_new = f_new + mu_merit * c_new.lpNorm<1>();
                if (merit_new <= merit0 + 1e-4 * alpha * std::min(dderiv, 0.0) ||
                    merit_new < merit0 - 1e-16 * std::abs(merit0)) {
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) break;

        const VectorXd s = x_new - res.x;
        res.x = x_new;
        f = f_new;
        c = c_new;
        g = prob.gradient(res.x);
        a = jacobian(res.x, c);

        // damped BFGS (Powell) on the Lagrangian gradient
        const VectorXd grad_lagrangian_new = g + a.transpose() * nu;
        if (grad_lagrangian_prev.size() == 0) grad_lagrangian_prev = grad_lagrangian;
        VectorXd y = grad_lagrangian_new - grad_lagrangian;
        const VectorXd bs = b * s;
        const double sbs = s.dot(bs);
        const double sy = s.dot(y);
        if (sbs > 0.0) {
            if (sy < 0.2 * sbs) {
                const double theta = 0.8 * sbs / (sbs - sy);
                y = theta * y + (1.0 - theta) * bs;
            }
            const double sy_d = s.dot(y);
            if (sy_d > 1e-14 * s.norm() * y.norm())
                b += (y * y.transpose()) / sy_d - (bs * bs.transpose()) / sbs;
        }
        grad_lagrangian_prev = grad_lagrangian_new;
    }

    res.objective = f;
    res.constraint_norm = c.lpNorm<Eigen::Infinity>();
    return res;
}

}  // namespace sc

#endif
