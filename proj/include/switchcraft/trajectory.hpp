#ifndef SWITCHCRAFT_TRAJECTORY_HPP
#define SWITCHCRAFT_TRAJECTORY_HPP

#include <memory>

#include "switchcraft/dynamics.hpp"
#include "switchcraft/integrate.hpp"

namespace sc {

namespace detail {

// safeguarded 1-D root polishing: bisection with secant acceleration
template <class F>
double refine_root(F&& fn, double a, double b, double fa, double fb, double xtol, double ftol,
                   int max_iter = 120) {
    double x = a, fx = fa;
    for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
        double m = 0.5 * (a + b);
        if (std::abs(fb - fa) > 1e-300) {
            const double s = a - fa * (b - a) / (fb - fa);
            if (s > a + 0.1 * (b - a) && s < b - 0.1 * (b - a)) m = s;
        }
        const double fm = fn(m);
        if (std::abs(fm) < ftol) return m;
        if ((fa < 0.0) == (fm < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        x = m;
        fx = fm;
    }
    (void)fx;
    return x;
}

// golden-section minimization of a smooth scalar function
template <class F>
double minimize_scalar(F&& fn, double a, double b, double xtol) {
    const double gr = 0.61803398874989484820;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = fn(c), fd = fn(d);
    while ((b - a) > xtol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = fn(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// one integrated extremal trajectory: a sampled grid (at least
// samples_per_rev points per revolution of true longitude) plus an optional
// dense interpolant that can be dropped to save memory
class Trajectory {
public:
    static constexpr int samples_per_rev = 48;

    double t0 = 0.0, tf = 0.0;
    Engine engine;
    double rho = 1e-5;
    Throttle mode = Throttle::smoothed;
    double mu = 1.0;

    std::vector<double> times;
    std::vector<Vec14> z;
    std::vector<ControlSample> controls;
    std::shared_ptr<const DenseOutput<14>> dense;

    bool has_dense() const { return dense && !dense->empty(); }
    void drop_dense() { dense.reset(); }

    std::size_t size() const { return times.size(); }
    MeeState state_at(std::size_t i) const { return mee_from_z(z[i]); }
    Costate costate_at(std::size_t i) const { return costate_from_z(z[i]); }

    Vec14 eval(double t) const {
        if (!has_dense()) throw std::logic_error("Trajectory::eval: dense output not retained");
        return dense->eval(std::clamp(t, t0, tf));
    }
    double switching_at(double t) const {
        const Vec14 zt = eval(t);
        return switching_function(mee_from_z(zt), costate_from_z(zt), engine, mu);
    }
    double switching_rate_at(double t) const {
        const double h = 1e-7 * (tf - t0);
        const double a = std::max(t - h, t0), b = std::min(t + h, tf);
        return (switching_at(b) - switching_at(a)) / (b - a);
    }
    double mass_at(double t) const { return eval(t)(6); }

    double initial_mass() const { return z.front()(6); }
    double final_mass() const { return z.back()(6); }
    double fuel_used() const { return initial_mass() - final_mass(); }
};

// adaptive integration of the 14-dimensional state/co-state system with
// dense output; samples are stored on a uniform true-longitude grid
inline Trajectory propagate(const Vec14& z0, double t0, double tf, const Engine& engine, double rho,
                            double tol = 1e-10, Throttle mode = Throttle::smoothed, double mu = 1.0) {
    if (tf <= t0) throw std::invalid_argument("propagate: tf must exceed t0");

    IntegrateOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    opt.want_dense = true;
    auto rhs = [&](double t, const Vec14& zz) { return state_costate_rhs(t, zz, engine, rho, mode, mu); };
    auto res = integrate_dopri5<14>(rhs, z0, t0, tf, opt);

    Trajectory traj;
    traj.t0 = t0;
    traj.tf = tf;
    traj.engine = engine;
    traj.rho = rho;
    traj.mode = mode;
    traj.mu = mu;
    traj.dense = std::make_shared<DenseOutput<14>>(std::move(res.dense));

    // l is strictly increasing, so walk the accepted steps and place one
    // sample each time l advances by 2*pi / samples_per_rev
    const double dl = two_pi / Trajectory::samples_per_rev;
    auto push_sample = [&](double t, const Vec14& zz) {
        traj.times.push_back(t);
        traj.z.push_back(zz);
        traj.controls.push_back(control_law(mee_from_z(zz), costate_from_z(zz), engine, rho, mode, mu));
    };
    push_sample(t0, z0);
    double next_l = z0(5) + dl;
    const auto& dn = *traj.dense;
    for (std::size_t i = 0; i < dn.size(); ++i) {
        const auto& st = dn.step(i);
        const double t_end = st.t0 + st.h;
        double l_end = st.eval(t_end)(5);
        while (l_end >= next_l) {
            const double target = next_l;
            double lo = st.t0, hi = t_end;
            for (int it = 0; it < 60 && (hi - lo) > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (st.eval(mid)(5) < target ? lo : hi) = mid;
            }
            const double ts = 0.5 * (lo + hi);
            if (ts > traj.times.back() + 1e-12) push_sample(ts, st.eval(ts));
            next_l += dl;
        }
    }
    if (traj.times.back() < tf - 1e-12 * std::max(1.0, tf))
        push_sample(tf, res.y);
    else {
        traj.times.back() = tf;
        traj.z.back() = res.y;
    }
    return traj;
}

struct SwitchCrossing {
    double t = 0.0;
    bool rising = false;      // S passes from negative to positive
    bool tangential = false;  // |dS/dt| at the root below the tangency threshold
};

struct ThrustArc {
    double t_on = 0.0;
    double t_off = 0.0;
    double duration() const { return t_off - t_on; }
};

struct SwitchTimes {
    std::vector<SwitchCrossing> crossings;  // transversal roots, alternating rise/fall
    std::vector<SwitchCrossing> touches;    // tangential osculations of S = 0
    std::vector<ThrustArc> arcs;            // tangential touches appear as zero-width arcs
    double s_t0 = 0.0;
    double s_tf = 0.0;
    double s_min = 0.0;
    double t_s_min = 0.0;

    std::size_t n_finite_arcs() const {
        std::size_t n = 0;
        for (const auto& a : arcs)
            if (a.duration() > 0.0) ++n;
        return n;
    }
};

// locates all roots of S(t) on the dense interpolant. Roots are bracketed
// on a subdivision of the integrator's accepted steps, polished by
// safeguarded root finding, and assembled into thrust arcs; an endpoint
// with S > 0 opens or closes the bordering arc.
inline SwitchTimes locate_switches(const Trajectory& traj, double s_tol = 1e-9) {
    if (!traj.has_dense()) throw std::logic_error("locate_switches: dense output required");
    const auto& dn = *traj.dense;
    const double span = traj.tf - traj.t0;
    const double xtol = 1e-13 * std::max(1.0, std::abs(traj.tf));
    auto s_of = [&](double t) { return traj.switching_at(t); };

    // bracketing grid: step endpoints plus interior subdivisions
    std::vector<double> ts;
    std::vector<double> sv;
    ts.reserve(dn.size() * 3 + 2);
    for (std::size_t i = 0; i < dn.size(); ++i) {
        const auto& st = dn.step(i);
        for (int j = 0; j < 3; ++j) {
            const double t = st.t0 + st.h * (j / 3.0);
            if (!ts.empty() && t <= ts.back()) continue;
            ts.push_back(t);
        }
    }
    ts.push_back(traj.tf);
    sv.resize(ts.size());
    double s_scale = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sv[i] = s_of(ts[i]);
        s_scale = std::max(s_scale, std::abs(sv[i]));
    }
    if (s_scale == 0.0) s_scale = 1.0;

    SwitchTimes out;
    out.s_t0 = sv.front();
    out.s_tf = sv.back();
    out.s_min = sv.front();
    out.t_s_min = ts.front();

    const double ftol = s_tol * s_scale;
    const double sdot_tangent = 1e-8;

    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (sv[i] < out.s_min) {
            out.s_min = sv[i];
            out.t_s_min = ts[i];
        }
        if ((sv[i] < 0.0) != (sv[i + 1] < 0.0)) {
            const double root =
                detail::refine_root(s_of, ts[i], ts[i + 1], sv[i], sv[i + 1], xtol, ftol);
            SwitchCrossing c;
            c.t = root;
            c.rising = sv[i + 1] > sv[i];
            c.tangential = std::abs(traj.switching_rate_at(root)) < sdot_tangent;
            out.crossings.push_back(c);
        }
    }
    if (sv.back() < out.s_min) {
        out.s_min = sv.back();
        out.t_s_min = ts.back();
    }

    // tangential touches: interior local minima of |S| that reach zero
    // without a sign change
    for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
        const bool local_min = std::abs(sv[i]) <= std::abs(sv[i - 1]) && std::abs(sv[i]) <= std::abs(sv[i + 1]);
        if (!local_min || std::abs(sv[i]) > 1e-4 * std::max(1.0, s_scale)) continue;
        if ((sv[i - 1] < 0.0) != (sv[i + 1] < 0.0)) continue;  // transversal pair handles this
        const double t_ext = detail::minimize_scalar([&](double t) { return std::abs(s_of(t)); },
                                                     ts[i - 1], ts[i + 1], xtol * 10.0);
        if (std::abs(s_of(t_ext)) > 1e-4 * std::max(1.0, s_scale)) continue;
        if (!out.touches.empty() && std::abs(out.touches.back().t - t_ext) < 1e-6 * span) continue;
        SwitchCrossing c;
        c.t = t_ext;
        c.rising = false;
        c.tangential = true;
        out.touches.push_back(c);
    }

    // assemble arcs from transversal crossings
    bool open = out.s_t0 > 0.0;
    double t_open = traj.t0;
    for (const auto& c : out.crossings) {
        if (c.rising) {
            if (!open) {
                open = true;
                t_open = c.t;
            }
        } else if (open) {
            out.arcs.push_back({t_open, c.t});
            open = false;
        }
    }
    if (open) out.arcs.push_back({t_open, traj.tf});
    for (const auto& c : out.touches) out.arcs.push_back({c.t, c.t});
    std::sort(out.arcs.begin(), out.arcs.end(),
              [](const ThrustArc& a, const ThrustArc& b) { return a.t_on < b.t_on; });
    return out;
}

struct SingularWindow {
    double t_begin = 0.0;
    double t_end = 0.0;
};

// flags windows where S and dS/dt both stay inside a deadband for at least
// min_fraction of the flight time; such stretches indicate a singular
// (intermediate-throttle) arc
inline std::vector<SingularWindow> detect_singular_arcs(const Trajectory& traj, double s_tol = 1e-4,
                                                        double sdot_tol = 1e-4,
                                                        double min_fraction = 0.01) {
    if (!traj.has_dense()) throw std::logic_error("detect_singular_arcs: dense output required");
    const double span = traj.tf - traj.t0;
    const int n = 4000;
    std::vector<SingularWindow> out;
    double t_begin = 0.0;
    bool inside = false;
    for (int i = 0; i <= n; ++i) {
        const double t = traj.t0 + span * i / n;
        const bool flat =
            std::abs(traj.switching_at(t)) < s_tol && std::abs(traj.switching_rate_at(t)) < sdot_tol;
        if (flat && !inside) {
            inside = true;
            t_begin = t;
        } else if (!flat && inside) {
            inside = false;
            if (t - t_begin >= min_fraction * span) out.push_back({t_begin, t});
        }
    }
    if (inside && traj.tf - t_begin >= min_fraction * span) out.push_back({t_begin, traj.tf});
    return out;
}

// integral of the throttle over the flight, used to cross-check the mass
// decrement against (T/c) * integral(delta)
inline double throttle_integral(const Trajectory& traj, int n = 20000) {
    if (!traj.has_dense()) throw std::logic_error("throttle_integral: dense output required");
    const double h = (traj.tf - traj.t0) / n;
    auto delta_of = [&](double t) {
        const Vec14 zt = traj.eval(t);
        return control_law(mee_from_z(zt), costate_from_z(zt), traj.engine, traj.rho, traj.mode, traj.mu)
            .delta;
    };
    double acc = delta_of(traj.t0) + delta_of(traj.tf);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * delta_of(traj.t0 + i * h);
    return acc * h / 3.0;
}

}  // namespace sc

#endif
