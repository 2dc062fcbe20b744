#ifndef SWITCHCRAFT_MINTHRUST_HPP
#define SWITCHCRAFT_MINTHRUST_HPP

#include "switchcraft/tpbvp.hpp"

namespace sc {

struct ThrustEstimate {
    double thrust_n = 0.0;
    bool fallback = false;  // denominator was non-positive, energy heuristic used
};

// work-energy thrust estimate from the endpoint states (SI: km, km/s, s,
// kg; returns Newtons). The tangential-thrust approximation gives
//   T = m0 [ (vf^2 - v0^2)/2 + mu (1/r0 - 1/rf) ]
//       / [ (dt/c)(vf^2/2 + mu/rf) - rbar thetadotbar dt ],
// an over-estimate by design, which suits its role as an initial guess.
inline ThrustEstimate estimate_thrust(const CartesianState& x0_km, const CartesianState& xf_km,
                                      double m0_kg, double tof_s, double c_ms, double mu_km3s2) {
    const double mu = mu_km3s2 * 1e9;           // m^3/s^2
    const double r0 = x0_km.r.norm() * 1e3;     // m
    const double rf = xf_km.r.norm() * 1e3;
    const double v0 = x0_km.v.norm() * 1e3;     // m/s
    const double vf = xf_km.v.norm() * 1e3;

    const double numerator = m0_kg * (0.5 * (vf * vf - v0 * v0) + mu * (1.0 / r0 - 1.0 / rf));
    if (numerator == 0.0) return {0.0, false};

    const double rbar = 0.5 * (r0 + rf);
    const double theta_dot = std::sqrt(mu / (rbar * rbar * rbar));
    const double denominator = (tof_s / c_ms) * (0.5 * vf * vf + mu / rf) - rbar * theta_dot * tof_s;

    if (denominator <= 0.0 || !std::isfinite(denominator)) {
        const double de = std::abs(0.5 * (vf * vf - v0 * v0) + mu * (1.0 / r0 - 1.0 / rf));
        const double vbar = 0.5 * (v0 + vf);
        return {2.0 * m0_kg * de / (vbar * tof_s), true};
    }
    return {std::abs(numerator / denominator), false};
}

// feasible revolution-count window from the endpoint orbital periods
inline std::pair<int, int> nrev_bounds(double t0, double tf, double tau_l, double tau_u) {
    if (tau_l <= 0.0 || tau_u <= 0.0 || tau_l > tau_u)
        throw std::invalid_argument("nrev_bounds: need 0 < tau_l <= tau_u");
    const double tof = tf - t0;
    const int n_low = std::max(static_cast<int>(std::floor(tof / tau_u - 1.0)), 0);
    const int n_high = static_cast<int>(std::ceil(tof / tau_l + 1.0));
    return {n_low, n_high};
}

struct MinThrustOptions {
    int n_starts = 24;          // random seeding attempts before giving up
    int jobs = 1;
    std::uint64_t seed = 2077;
    double seed_rho_min = 0.3;  // smoothing floor for the scale-pulling seed solve
    int newton_max_iter = 60;
};

namespace detail {

// residual of the augmented minimum-time system: unknowns
// [lam(6); lam_m; tf*/tf; T/Tref], constraints
// [x(tf*) - x_T; lam_m(tf*); H(tf*); (tf* - tf)/tf], throttle full on
inline std::optional<VectorXd> min_thrust_residual(const MinFuelProblem& base, const VectorXd& q,
                                                   double thrust_ref) {
    const double tf_free = q(7) * base.tf;
    const double thrust = q(8) * thrust_ref;
    if (thrust <= 0.0 || tf_free <= base.t0 + 1e-6 * (base.tf - base.t0)) return std::nullopt;

    MinFuelProblem prob = base;
    prob.engine = base.engine.with_thrust_cu(thrust);

    Vec7 eta = q.head<7>();
    Vec14 zf;
    const auto r = [&]() -> std::optional<Vec7> {
        IntegrateOptions opt;
        opt.rtol = prob.tol;
        opt.atol = prob.tol;
        auto rhs = [&](double t, const Vec14& zz) {
            return state_costate_rhs(t, zz, prob.engine, 1.0, Throttle::full_on, prob.mu);
        };
        try {
            const auto res = integrate_dopri5<14>(rhs, prob.initial_z(eta), prob.t0, tf_free, opt);
            Vec7 rr;
            rr.head<6>() = res.y.head<6>() - prob.target;
            rr(6) = res.y(13);
            zf = res.y;
            return rr;
        } catch (const DomainError&) {
            return std::nullopt;
        } catch (const SolveError&) {
            return std::nullopt;
        }
    }();
    if (!r) return std::nullopt;

    VectorXd out(9);
    out.head<7>() = *r;
    out(7) = hamiltonian(mee_from_z(zf), costate_from_z(zf), prob.engine, 1.0, Throttle::full_on, prob.mu);
    out(8) = (tf_free - base.tf) / base.tf;
    return out;
}

}  // namespace detail

// solves for the thrust level whose minimum-time extremal exactly fills the
// prescribed flight time. base.engine.thrust carries the initial guess; the
// returned extremal runs full-on at the converged minimum thrust.
inline std::optional<Extremal> try_solve_min_thrust(const MinFuelProblem& base, int n_rev,
                                                    const MinThrustOptions& opt = {},
                                                    const Vec7* eta_seed = nullptr) {
    MinFuelProblem prob = base;
    prob.n_rev = n_rev;
    const double thrust_ref = base.engine.thrust;
    if (thrust_ref <= 0.0) throw std::invalid_argument("try_solve_min_thrust: thrust guess must be positive");

    NewtonOptions nopt;
    nopt.max_iter = opt.newton_max_iter;
    nopt.jobs = opt.jobs;

    auto run_newton = [&](const Vec7& eta) -> std::optional<NewtonResult> {
        VectorXd q(9);
        q.head<7>() = eta;
        q(7) = 1.0;
        q(8) = 1.0;
        const auto res = newton_solve(
            [&](const VectorXd& x) { return detail::min_thrust_residual(prob, x, thrust_ref); }, q, nopt);
        if (!res.converged) return std::nullopt;
        return res;
    };

    std::optional<NewtonResult> solution;
    if (eta_seed) solution = run_newton(*eta_seed);

    if (!solution) {
        // cold start: try the augmented system directly from a random draw;
        // when that misses, a single heavily-smoothed fixed-thrust solve
        // pulls the co-states onto the right scale first
        std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(n_rev) * 7919u);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);

        NewtonOptions seed_nopt;
        seed_nopt.max_iter = 20;
        seed_nopt.stall_limit = 5;
        seed_nopt.jobs = opt.jobs;

        for (int attempt = 0; attempt < opt.n_starts && !solution; ++attempt) {
            Vec7 eta;
            for (int i = 0; i < 7; ++i) eta(i) = unit(rng);
            solution = run_newton(eta);
            if (solution) break;

            for (int boost = 0; boost < 3 && !solution; ++boost) {
                const Engine seed_engine = prob.engine.with_thrust_cu(thrust_ref * std::pow(2.0, boost));
                Vec7 seeded = eta;
                bool chain_ok = true;
                for (const double rho : {1.0, opt.seed_rho_min}) {
                    auto fn = [&](const VectorXd& q) -> std::optional<VectorXd> {
                        MinFuelProblem p2 = prob;
                        p2.engine = seed_engine;
                        const auto r = residual(p2, Vec7(q), rho);
                        if (!r) return std::nullopt;
                        return VectorXd(*r);
                    };
                    const auto sres = newton_solve(fn, VectorXd(seeded), seed_nopt);
                    if (!sres.converged) {
                        chain_ok = false;
                        break;
                    }
                    seeded = Vec7(sres.x);
                }
                if (chain_ok) solution = run_newton(seeded);
            }
        }
    }
    if (!solution) return std::nullopt;

    const double t_min = solution->x(8) * thrust_ref;
    Extremal out;
    out.problem = prob;
    out.problem.engine = prob.engine.with_thrust_cu(t_min);
    out.eta0 = solution->x.head<7>();
    out.rho = 1e-5;
    out.mode = Throttle::full_on;
    out.converged_norm = solution->norm_inf;
    out.traj = out.repropagate();
    out.switches = locate_switches(out.traj);
    return out;
}

inline Extremal solve_min_thrust(const MinFuelProblem& base, int n_rev, const MinThrustOptions& opt = {},
                                 const Vec7* eta_seed = nullptr) {
    auto res = try_solve_min_thrust(base, n_rev, opt, eta_seed);
    if (!res)
        throw SolveError("solve_min_thrust: no convergence for n_rev " + std::to_string(n_rev) +
                         " (target unreachable at any thrust within bounds, or seeding exhausted)");
    return std::move(*res);
}

struct NrevScanEntry {
    int n_rev = 0;
    bool converged = false;
    double t_min_cu = 0.0;       // canonical thrust
    double t_min_newtons = 0.0;
    double final_mass = 0.0;     // normalized by the initial mass
    Vec7 eta0 = Vec7::Zero();
};

struct NrevScan {
    std::vector<NrevScanEntry> entries;
    int fundamental = -1;  // index of the converged entry with the largest final mass

    const NrevScanEntry& fundamental_entry() const {
        if (fundamental < 0) throw SolveError("nrev scan: no converged entries");
        return entries[static_cast<std::size_t>(fundamental)];
    }
};

// minimum-thrust solve per revolution count; entries run independently in
// parallel and failures get one sequential repair pass warm-started from
// converged neighbours
inline NrevScan scan_nrev(const MinFuelProblem& base, const MeeState& arrival, int n_low, int n_high,
                          const MinThrustOptions& opt = {}) {
    if (n_high < n_low) throw std::invalid_argument("scan_nrev: empty revolution range");
    const int count = n_high - n_low + 1;

    NrevScan scan;
    scan.entries.resize(count);
    std::vector<std::optional<Extremal>> solved(count);

    parallel_for(static_cast<std::size_t>(count), opt.jobs, [&](std::size_t i) {
        const int n_rev = n_low + static_cast<int>(i);
        MinFuelProblem prob = base;
        prob.target = mee_target_for_nrev(arrival, n_rev);
        MinThrustOptions local = opt;
        local.jobs = 1;
        solved[i] = try_solve_min_thrust(prob, n_rev, local);
    });

    // repair pass: reuse neighbouring co-states, which vary slowly with the
    // revolution count
    for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < count; ++i) {
            if (solved[i]) continue;
            for (int j : {i - 1, i + 1}) {
                if (j < 0 || j >= count || !solved[j]) continue;
                MinFuelProblem prob = base;
                prob.target = mee_target_for_nrev(arrival, n_low + i);
                prob.engine = solved[j]->problem.engine;  // neighbour's minimum thrust as guess
                MinThrustOptions local = opt;
                local.n_starts = 4;
                const Vec7 seed = solved[j]->eta0;
                solved[i] = try_solve_min_thrust(prob, n_low + i, local, &seed);
                if (solved[i]) break;
            }
        }
    }

    double best_mass = -1.0;
    for (int i = 0; i < count; ++i) {
        auto& e = scan.entries[i];
        e.n_rev = n_low + i;
        if (!solved[i]) continue;
        e.converged = true;
        e.t_min_cu = solved[i]->problem.engine.thrust;
        e.t_min_newtons = solved[i]->problem.engine.thrust_newtons();
        e.final_mass = solved[i]->final_mass();
        e.eta0 = solved[i]->eta0;
        if (e.final_mass > best_mass) {
            best_mass = e.final_mass;
            scan.fundamental = i;
        }
    }
    if (scan.fundamental < 0) throw SolveError("scan_nrev: target unreachable within flight time");
    return scan;
}

}  // namespace sc

#endif
