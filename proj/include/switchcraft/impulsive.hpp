#ifndef SWITCHCRAFT_IMPULSIVE_HPP
#define SWITCHCRAFT_IMPULSIVE_HPP

#include "switchcraft/lambert.hpp"
#include "switchcraft/sqp.hpp"
#include "switchcraft/surface.hpp"

namespace sc {

// N-impulse plan between fixed Cartesian endpoints. Node i fires at
// times[i]; nodes pinned to t0 or tf keep their position and timing fixed
// (and at tf the post-impulse velocity must equal the target's).
struct ImpulsivePlan {
    CartesianState x0, xT;
    double t0 = 0.0, tf = 1.0;
    double mu = 1.0;

    std::vector<double> times;
    std::vector<Vec3> dvs;
    std::vector<Vec3> r_nodes;
    std::vector<Vec3> v_nodes_pre;  // velocity immediately before the impulse
    bool impulse_at_t0 = false;
    bool impulse_at_tf = false;

    int n() const { return static_cast<int>(times.size()); }
    double total_dv() const {
        double acc = 0.0;
        for (const auto& dv : dvs) acc += dv.norm();
        return acc;
    }
};

namespace impulsive_detail {

inline constexpr double norm_smoothing = 1e-8;  // keeps the objective differentiable at dv = 0

inline double smooth_norm(const Vec3& v) { return std::sqrt(v.squaredNorm() + norm_smoothing * norm_smoothing); }

// enforce the endpoint pinning invariants on a freshly built plan
inline void pin_endpoints(ImpulsivePlan& plan) {
    if (plan.impulse_at_t0) {
        plan.times.front() = plan.t0;
        plan.r_nodes.front() = plan.x0.r;
        plan.v_nodes_pre.front() = plan.x0.v;
    }
    if (plan.impulse_at_tf) {
        plan.times.back() = plan.tf;
        plan.r_nodes.back() = plan.xT.r;
        plan.v_nodes_pre.back() = plan.xT.v - plan.dvs.back();
    }
}

struct Packing {
    // interior impulses contribute [t, r(3), v_pre(3), dv(3)]; terminal
    // impulses contribute only their dv
    std::vector<int> interior;  // node indices
    int n_vars = 0;
};

inline Packing make_packing(const ImpulsivePlan& plan) {
    Packing p;
    for (int i = 0; i < plan.n(); ++i) {
        const bool at_t0 = plan.impulse_at_t0 && i == 0;
        const bool at_tf = plan.impulse_at_tf && i == plan.n() - 1;
        if (at_t0 || at_tf)
            p.n_vars += 3;
        else {
            p.interior.push_back(i);
            p.n_vars += 10;
        }
    }
    return p;
}

inline VectorXd pack(const ImpulsivePlan& plan, const Packing& p) {
    VectorXd x(p.n_vars);
    int at = 0;
    for (int i = 0; i < plan.n(); ++i) {
        const bool terminal = (plan.impulse_at_t0 && i == 0) || (plan.impulse_at_tf && i == plan.n() - 1);
        if (terminal) {
            x.segment<3>(at) = plan.dvs[i];
            at += 3;
        } else {
            x(at) = plan.times[i];
            x.segment<3>(at + 1) = plan.r_nodes[i];
            x.segment<3>(at + 4) = plan.v_nodes_pre[i];
            x.segment<3>(at + 7) = plan.dvs[i];
            at += 10;
        }
    }
    return x;
}

inline ImpulsivePlan unpack(const ImpulsivePlan& ref, const Packing& p, const VectorXd& x) {
    ImpulsivePlan plan = ref;
    int at = 0;
    for (int i = 0; i < plan.n(); ++i) {
        const bool terminal = (plan.impulse_at_t0 && i == 0) || (plan.impulse_at_tf && i == plan.n() - 1);
        if (terminal) {
            plan.dvs[i] = x.segment<3>(at);
            at += 3;
        } else {
            plan.times[i] = x(at);
            plan.r_nodes[i] = x.segment<3>(at + 1);
            plan.v_nodes_pre[i] = x.segment<3>(at + 4);
            plan.dvs[i] = x.segment<3>(at + 7);
            at += 10;
        }
    }
    pin_endpoints(plan);
    return plan;
}

// boundary nodes of the ballistic segments: [t, r, v_post] on the left and
// [t, r, v_pre] on the right of each segment
struct SegmentChain {
    std::vector<double> t;
    std::vector<Vec3> r;
    std::vector<Vec3> v_post;
    std::vector<Vec3> v_pre;
    int n_segments() const { return static_cast<int>(t.size()) - 1; }
};

inline SegmentChain chain_of(const ImpulsivePlan& plan) {
    SegmentChain ch;
    auto push = [&](double t, const Vec3& r, const Vec3& v_pre, const Vec3& dv) {
        ch.t.push_back(t);
        ch.r.push_back(r);
        ch.v_pre.push_back(v_pre);
        ch.v_post.push_back(v_pre + dv);
    };
    if (!plan.impulse_at_t0) push(plan.t0, plan.x0.r, plan.x0.v, Vec3::Zero());
    for (int i = 0; i < plan.n(); ++i) push(plan.times[i], plan.r_nodes[i], plan.v_nodes_pre[i], plan.dvs[i]);
    if (!plan.impulse_at_tf) push(plan.tf, plan.xT.r, plan.xT.v, Vec3::Zero());
    return ch;
}

}  // namespace impulsive_detail

// forward-backward mid-point mismatch of every ballistic segment, stacked
// as one residual vector (6 entries per segment)
inline VectorXd segment_residual(const ImpulsivePlan& plan) {
    const auto ch = impulsive_detail::chain_of(plan);
    const int m = ch.n_segments();
    VectorXd delta(6 * m);
    parallel_for(static_cast<std::size_t>(m), 1, [&](std::size_t s) {
        const double t_mid = 0.5 * (ch.t[s] + ch.t[s + 1]);
        const CartesianState fwd = kepler_propagate({ch.r[s], ch.v_post[s]}, t_mid - ch.t[s], plan.mu);
        const CartesianState bwd = kepler_propagate({ch.r[s + 1], ch.v_pre[s + 1]}, t_mid - ch.t[s + 1], plan.mu);
        delta.segment<3>(6 * s) = fwd.r - bwd.r;
        delta.segment<3>(6 * s + 3) = fwd.v - bwd.v;
    });
    return delta;
}

// converts the short thrust arcs of a high-thrust extremal into an impulse
// sequence: one impulse per arc at its midpoint (or at the endpoint for
// arcs touching t0/tf), magnitude T dt / m_mid along the primer direction
inline ImpulsivePlan extract_impulses(const Extremal& ext, double eps_frac) {
    const auto ready = impulse_ready(ext, eps_frac);
    if (!ready.ready)
        throw SolveError("extract_impulses: thrust arcs too long for the impulsive approximation; "
                         "sweep to a higher maximum thrust");

    Trajectory traj = ext.traj.has_dense() ? ext.traj : ext.repropagate();
    const Engine& engine = ext.problem.engine;

    ImpulsivePlan plan;
    plan.t0 = ext.problem.t0;
    plan.tf = ext.problem.tf;
    plan.mu = ext.problem.mu;
    plan.x0 = mee_to_cart(ext.problem.x0, ext.problem.mu);
    MeeState arrival;
    arrival.p = ext.problem.target(0);
    arrival.f = ext.problem.target(1);
    arrival.g = ext.problem.target(2);
    arrival.h = ext.problem.target(3);
    arrival.k = ext.problem.target(4);
    arrival.l = ext.problem.target(5);
    plan.xT = mee_to_cart(arrival, ext.problem.mu);

    for (const auto& arc : ready.arcs) {
        double t_i = arc.t_mid;
        if (arc.touches_t0) {
            t_i = plan.t0;
            plan.impulse_at_t0 = true;
        } else if (arc.touches_tf) {
            t_i = plan.tf;
            plan.impulse_at_tf = true;
        }
        const Vec14 z = traj.eval(t_i);
        const MeeState x = mee_from_z(z);
        const Costate cs = costate_from_z(z);
        const CartesianState cart = mee_to_cart(x, ext.problem.mu);

        // LVLH basis at the impulse: radial, transverse, normal
        const Vec3 rhat = cart.r.normalized();
        const Vec3 nhat = cart.r.cross(cart.v).normalized();
        const Vec3 that = nhat.cross(rhat);
        const ControlSample u = control_law(x, cs, engine, ext.rho, ext.mode, ext.problem.mu);
        const Vec3 dir = u.alpha(0) * rhat + u.alpha(1) * that + u.alpha(2) * nhat;

        const double dv_mag = engine.thrust * arc.duration / arc.m_mid;
        plan.times.push_back(t_i);
        plan.dvs.push_back(dv_mag * dir);
        plan.r_nodes.push_back(cart.r);
        // centered split: half the impulse is accrued before the midpoint
        plan.v_nodes_pre.push_back(cart.v - 0.5 * dv_mag * dir);
    }
    impulsive_detail::pin_endpoints(plan);
    return plan;
}

struct RefineOptions {
    SqpOptions sqp;
    double endpoint_snap = 1e-6;  // fraction of flight time
};

struct RefineResult {
    ImpulsivePlan plan;
    double total_dv = 0.0;
    double residual_norm = 0.0;
    double kkt_norm = 0.0;
    int iterations = 0;
};

// minimizes the summed impulse magnitude subject to zero mid-point
// mismatch on every segment; impulse times stay strictly ordered inside
// the flight window, and impulses drifting onto t0/tf are snapped and
// re-classified as terminal
inline RefineResult refine(const ImpulsivePlan& start, const RefineOptions& opt = {}) {
    ImpulsivePlan plan = start;
    const double span = plan.tf - plan.t0;

    for (int round = 0; round < 3; ++round) {
        const auto packing = impulsive_detail::make_packing(plan);

        SqpProblem sp;
        sp.objective = [&](const VectorXd& x) {
            const auto p = impulsive_detail::unpack(plan, packing, x);
            double acc = 0.0;
            for (const auto& dv : p.dvs) acc += impulsive_detail::smooth_norm(dv);
            return acc;
        };
        sp.gradient = [&](const VectorXd& x) {
            VectorXd g = VectorXd::Zero(x.size());
            int at = 0;
            for (int i = 0; i < plan.n(); ++i) {
                const bool terminal =
                    (plan.impulse_at_t0 && i == 0) || (plan.impulse_at_tf && i == plan.n() - 1);
                const int dv_at = terminal ? at : at + 7;
                const Vec3 dv = x.segment<3>(dv_at);
                g.segment<3>(dv_at) = dv / impulsive_detail::smooth_norm(dv);
                at += terminal ? 3 : 10;
            }
            return g;
        };
        sp.constraints = [&](const VectorXd& x) {
            return segment_residual(impulsive_detail::unpack(plan, packing, x));
        };
        sp.step_ok = [&](const VectorXd& x) {
            const auto p = impulsive_detail::unpack(plan, packing, x);
            double prev = p.t0 - 1e-12;
            const double margin = 1e-9 * span;
            for (int i = 0; i < p.n(); ++i) {
                if (p.times[i] < prev + margin) return false;
                prev = p.times[i];
            }
            return p.times.empty() || p.times.back() <= p.tf + 1e-12;
        };

        const auto res = sqp_minimize(sp, impulsive_detail::pack(plan, packing), opt.sqp);
        plan = impulsive_detail::unpack(plan, packing, res.x);

        // snap near-terminal interior impulses and re-run if a snap happened
        bool snapped = false;
        if (!plan.impulse_at_t0 && !plan.times.empty() &&
            plan.times.front() - plan.t0 < opt.endpoint_snap * span) {
            plan.impulse_at_t0 = true;
            snapped = true;
        }
        if (!plan.impulse_at_tf && !plan.times.empty() &&
            plan.tf - plan.times.back() < opt.endpoint_snap * span) {
            plan.impulse_at_tf = true;
            snapped = true;
        }
        impulsive_detail::pin_endpoints(plan);

        if (!snapped) {
            RefineResult out;
            out.plan = plan;
            out.total_dv = plan.total_dv();
            out.residual_norm = segment_residual(plan).lpNorm<Eigen::Infinity>();
            out.kkt_norm = res.kkt_norm;
            out.iterations = res.iterations;
            if (!res.converged || out.residual_norm > opt.sqp.con_tol * 10.0)
                throw SolveError("refine: no KKT point within the iteration budget (best residual " +
                                 std::to_string(out.residual_norm) + ")");
            return out;
        }
    }
    throw SolveError("refine: endpoint snapping failed to settle");
}

// Lawden diagnostics on the continuous extremal underlying a refined plan:
// primer magnitude normalized so that unity marks an optimal impulse
struct LawdenDiagnostics {
    double max_primer = 0.0;
    std::vector<double> primer_at_impulses;
};

inline LawdenDiagnostics lawden_diagnostics(const Extremal& ext, const ImpulsivePlan& plan) {
    Trajectory traj = ext.traj.has_dense() ? ext.traj : ext.repropagate();
    auto primer_mag = [&](double t) {
        const Vec14 z = traj.eval(t);
        const MeeState x = mee_from_z(z);
        const Costate cs = costate_from_z(z);
        const double s = switching_function(x, cs, ext.problem.engine, ext.problem.mu);
        return 1.0 + s / (1.0 - cs.lam_m);
    };
    LawdenDiagnostics out;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double t = traj.t0 + (traj.tf - traj.t0) * i / n;
        out.max_primer = std::max(out.max_primer, primer_mag(t));
    }
    for (const double t : plan.times) out.primer_at_impulses.push_back(primer_mag(t));
    return out;
}

}  // namespace sc

#endif
