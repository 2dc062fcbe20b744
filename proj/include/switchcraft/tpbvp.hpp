#ifndef SWITCHCRAFT_TPBVP_HPP
#define SWITCHCRAFT_TPBVP_HPP

#include <random>

#include "switchcraft/newton.hpp"
#include "switchcraft/trajectory.hpp"

namespace sc {

// fixed-time rendezvous with the target element vector; target(5) is the
// unwrapped final true longitude, already offset by 2*pi*n_rev
struct MinFuelProblem {
    MeeState x0;          // departure elements, mass normalized to 1
    Vec6 target;          // [p f g h k l*]
    double t0 = 0.0;
    double tf = 1.0;
    Engine engine;
    int n_rev = 0;
    double tol = 1e-10;   // integration tolerance
    double mu = 1.0;

    Vec14 initial_z(const Vec7& eta0) const {
        Costate cs;
        cs.lam = eta0.head<6>();
        cs.lam_m = eta0(6);
        return pack_z(x0, cs);
    }
};

inline Vec6 mee_target_for_nrev(const MeeState& arrival, int n_rev) {
    Vec6 t;
    t << arrival.p, arrival.f, arrival.g, arrival.h, arrival.k, wrap_two_pi(arrival.l) + two_pi * n_rev;
    return t;
}

// one converged solution of the boundary value problem
struct Extremal {
    MinFuelProblem problem;
    Vec7 eta0 = Vec7::Zero();
    double rho = 1e-5;
    Throttle mode = Throttle::smoothed;
    double converged_norm = std::numeric_limits<double>::infinity();
    Trajectory traj;
    SwitchTimes switches;

    double thrust_newtons() const { return problem.engine.thrust_newtons(); }
    double fuel() const { return traj.fuel_used(); }  // normalized by the initial mass
    double final_mass() const { return traj.final_mass(); }

    // re-integrates from the stored unknowns, retaining dense output
    Trajectory repropagate(double tol = 0.0) const {
        return propagate(problem.initial_z(eta0), problem.t0, problem.tf, problem.engine, rho,
                         tol > 0.0 ? tol : problem.tol, mode, problem.mu);
    }
};

// shooting residual: propagate and return [x(tf) - x_target; lam_m(tf)].
// The longitude component is differenced on the unwrapped value so the
// revolution count is enforced exactly, never by modulo.
inline std::optional<Vec7> residual(const MinFuelProblem& problem, const Vec7& eta0, double rho,
                                    Throttle mode = Throttle::smoothed, Vec14* z_final = nullptr) {
    IntegrateOptions opt;
    opt.rtol = problem.tol;
    opt.atol = problem.tol;
    auto rhs = [&](double t, const Vec14& zz) {
        return state_costate_rhs(t, zz, problem.engine, rho, mode, problem.mu);
    };
    try {
        const auto res = integrate_dopri5<14>(rhs, problem.initial_z(eta0), problem.t0, problem.tf, opt);
        Vec7 r;
        r.head<6>() = res.y.head<6>() - problem.target;
        r(6) = res.y(13);
        if (z_final) *z_final = res.y;
        return r;
    } catch (const DomainError&) {
        return std::nullopt;
    } catch (const SolveError&) {
        return std::nullopt;
    }
}

struct SolveReport {
    bool converged = false;
    double rho_reached = 0.0;
    double best_norm = std::numeric_limits<double>::infinity();
    int total_iterations = 0;
};

// smoothing continuation: damped Newton at each rho of the geometric
// schedule, warm-starting the next smaller rho with the converged unknowns
inline std::optional<Extremal> try_solve(const MinFuelProblem& problem, const Vec7& eta_guess,
                                         const SmoothingSchedule& schedule, SolveReport* report = nullptr,
                                         int jobs = 1) {
    if (!schedule.valid()) throw std::invalid_argument("try_solve: invalid smoothing schedule");

    NewtonOptions nopt;
    nopt.jobs = jobs;
    Vec7 eta = eta_guess;
    SolveReport rep;

    for (const double rho : schedule.levels()) {
        auto fn = [&](const VectorXd& q) -> std::optional<VectorXd> {
            const auto r = residual(problem, Vec7(q), rho);
            if (!r) return std::nullopt;
            return VectorXd(*r);
        };
        const auto res = newton_solve(fn, VectorXd(eta), nopt);
        rep.total_iterations += res.iterations;
        rep.rho_reached = rho;
        rep.best_norm = res.norm_inf;
        if (!res.converged) {
            if (report) *report = rep;
            return std::nullopt;
        }
        eta = Vec7(res.x);
    }
    rep.converged = true;
    if (report) *report = rep;

    Extremal out;
    out.problem = problem;
    out.eta0 = eta;
    out.rho = schedule.rho_min;
    out.mode = Throttle::smoothed;
    const auto r = residual(problem, eta, schedule.rho_min);
    out.converged_norm = r ? r->lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
    out.traj = out.repropagate();
    out.switches = locate_switches(out.traj);
    return out;
}

inline Extremal solve(const MinFuelProblem& problem, const Vec7& eta_guess,
                      const SmoothingSchedule& schedule, int jobs = 1) {
    SolveReport rep;
    auto res = try_solve(problem, eta_guess, schedule, &rep, jobs);
    if (!res)
        throw SolveError("tpbvp solve: no convergence (best residual " + std::to_string(rep.best_norm) +
                         " at rho " + std::to_string(rep.rho_reached) + ")");
    return std::move(*res);
}

// random initial co-states drawn uniformly from [-1, 1]^7; converged
// solutions are deduplicated by fuel consumption and merged by start index
// so a fixed seed gives identical output
inline std::vector<Extremal> multistart(const MinFuelProblem& problem, int n_starts, std::uint64_t seed,
                                        const SmoothingSchedule& schedule, int jobs = 1,
                                        const Vec7* eta_injected = nullptr) {
    if (n_starts < 1) throw std::invalid_argument("multistart: n_starts must be >= 1");

    std::vector<Vec7> starts(n_starts);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (auto& s : starts)
        for (int i = 0; i < 7; ++i) s(i) = unit(rng);
    if (eta_injected) starts.front() = *eta_injected;

    std::vector<std::optional<Extremal>> slots(n_starts);
    parallel_for(static_cast<std::size_t>(n_starts), jobs, [&](std::size_t i) {
        slots[i] = try_solve(problem, starts[i], schedule, nullptr, 1);
    });

    std::vector<Extremal> out;
    for (auto& slot : slots) {
        if (!slot) continue;
        const double fuel = slot->fuel();
        const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Extremal& e) {
            return std::abs(e.fuel() - fuel) <= 1e-6 * std::max(std::abs(fuel), 1e-12);
        });
        if (!duplicate) out.push_back(std::move(*slot));
    }
    return out;
}

}  // namespace sc

#endif
