#ifndef SWITCHCRAFT_SURFACE_HPP
#define SWITCHCRAFT_SURFACE_HPP

#include "switchcraft/minthrust.hpp"

namespace sc {

struct SweepConfig {
    std::vector<double> thrust_grid;   // increasing canonical thrust levels
    double eps_frac = 1e-3;            // impulse threshold as a fraction of flight time
    bool refine_near_events = true;
    int n_s_samples = 1000;            // uniform-time S samples stored per level
    int max_inserted_levels = 96;
    double event_ratio_tol = 1.02;     // stop bisecting once the bracket is this tight

    static std::vector<double> log_spaced(double lo, double hi, int levels) {
        std::vector<double> g(levels);
        if (levels == 1) {
            g[0] = lo;
            return g;
        }
        const double r = std::log(hi / lo) / (levels - 1);
        for (int i = 0; i < levels; ++i) g[i] = lo * std::exp(r * i);
        g.front() = lo;
        g.back() = hi;
        return g;
    }
};

// one thrust slice of the surface
struct SurfaceLevel {
    Extremal ext;                              // dense output dropped
    std::vector<double> s_samples;             // on the surface's shared time grid
    double gamma_candidate = 1.0;              // m(t_off of last arc) / m0
    std::vector<SingularWindow> singular;

    double thrust_cu() const { return ext.problem.engine.thrust; }
    double thrust_newtons() const { return ext.problem.engine.thrust_newtons(); }
    bool singular_flag() const { return !singular.empty(); }
};

struct SwitchingSurface {
    MinFuelProblem problem;        // thrust field varies per level
    SmoothingSchedule schedule;
    std::vector<double> sample_times;
    std::vector<SurfaceLevel> levels;
    bool complete = true;
    std::string failure_note;

    int n_rev() const { return problem.n_rev; }
    const SurfaceLevel& top() const { return levels.back(); }
};

namespace detail {

inline double interval_jaccard(const ThrustArc& a, const ThrustArc& b) {
    const double lo = std::max(a.t_on, b.t_on);
    const double hi = std::min(a.t_off, b.t_off);
    const double inter = std::max(0.0, hi - lo);
    const double uni = std::max(a.t_off, b.t_off) - std::min(a.t_on, b.t_on);
    return uni > 0.0 ? inter / uni : 0.0;
}

inline std::vector<ThrustArc> finite_arcs(const SwitchTimes& sw) {
    std::vector<ThrustArc> out;
    for (const auto& a : sw.arcs)
        if (a.duration() > 0.0) out.push_back(a);
    return out;
}

}  // namespace detail

namespace surface_detail {

// solve one thrust level warm-started from eta; escalating smoothing
// chains keep the warm start cheap when it works and robust when it does not
inline std::optional<Extremal> solve_level(const MinFuelProblem& base, double thrust_cu, const Vec7& eta,
                                           const SmoothingSchedule& schedule, int jobs) {
    MinFuelProblem prob = base;
    prob.engine = base.engine.with_thrust_cu(thrust_cu);

    SmoothingSchedule direct;
    direct.rho_start = schedule.rho_min;
    direct.rho_min = schedule.rho_min;
    direct.factor = 0.5;
    if (auto e = try_solve(prob, eta, direct, nullptr, jobs)) return e;

    SmoothingSchedule gentle;
    gentle.rho_start = std::min(1e-2, schedule.rho_start);
    gentle.rho_min = schedule.rho_min;
    gentle.factor = schedule.factor;
    if (auto e = try_solve(prob, eta, gentle, nullptr, jobs)) return e;

    return try_solve(prob, eta, schedule, nullptr, jobs);
}

inline SurfaceLevel finish_level(Extremal&& ext, const std::vector<double>& sample_times) {
    SurfaceLevel lvl;
    lvl.ext = std::move(ext);
    lvl.s_samples.resize(sample_times.size());
    for (std::size_t i = 0; i < sample_times.size(); ++i)
        lvl.s_samples[i] = lvl.ext.traj.switching_at(sample_times[i]);
    const auto arcs = detail::finite_arcs(lvl.ext.switches);
    if (!arcs.empty())
        lvl.gamma_candidate = lvl.ext.traj.mass_at(arcs.back().t_off) / lvl.ext.traj.initial_mass();
    lvl.singular = detect_singular_arcs(lvl.ext.traj);
    lvl.ext.traj.drop_dense();
    return lvl;
}

// topology fingerprint used to decide whether two adjacent levels differ
struct LevelSignature {
    std::size_t n_arcs;
    bool ea_detached;   // S(tf) < 0
    bool ld_detached;   // S(t0) < 0
    bool singular;
};

inline LevelSignature signature(const SurfaceLevel& lvl) {
    return {detail::finite_arcs(lvl.ext.switches).size(), lvl.ext.switches.s_tf < 0.0,
            lvl.ext.switches.s_t0 < 0.0, lvl.singular_flag()};
}

inline bool differs(const LevelSignature& a, const LevelSignature& b) {
    return a.n_arcs != b.n_arcs || a.ea_detached != b.ea_detached || a.ld_detached != b.ld_detached ||
           a.singular != b.singular;
}

}  // namespace surface_detail

// continuation over the thrust magnitude. Each level is warm-started from
// its lower neighbour; on failure the thrust step is bisected up to eight
// times. With refine_near_events set, extra levels are inserted around
// detected topology changes until each change is bracketed tightly.
inline SwitchingSurface sweep(const MinFuelProblem& base, const Extremal& t_min_extremal,
                              const SweepConfig& config, const SmoothingSchedule& schedule,
                              int jobs = 1) {
    if (config.thrust_grid.empty()) throw std::invalid_argument("sweep: empty thrust grid");

    SwitchingSurface surf;
    surf.problem = base;
    surf.problem.engine = base.engine.with_thrust_cu(config.thrust_grid.front());
    surf.schedule = schedule;
    surf.sample_times.resize(config.n_s_samples);
    for (int i = 0; i < config.n_s_samples; ++i)
        surf.sample_times[i] = base.t0 + (base.tf - base.t0) * i / (config.n_s_samples - 1);

    Vec7 eta = t_min_extremal.eta0;
    double prev_thrust = config.thrust_grid.front();

    for (std::size_t gi = 0; gi < config.thrust_grid.size(); ++gi) {
        double target = config.thrust_grid[gi];
        // bisection ladder toward the target level
        int refinements = 0;
        while (true) {
            auto ext = surface_detail::solve_level(base, target, eta, schedule, jobs);
            if (ext) {
                eta = ext->eta0;
                prev_thrust = target;
                surf.levels.push_back(surface_detail::finish_level(std::move(*ext), surf.sample_times));
                if (target >= config.thrust_grid[gi]) break;
                target = config.thrust_grid[gi];  // resume toward the grid level
                continue;
            }
            if (++refinements > 8) {
                surf.complete = false;
                surf.failure_note = "continuation break at thrust " +
                                    std::to_string(base.engine.with_thrust_cu(target).thrust_newtons()) +
                                    " N";
                return surf;
            }
            target = std::sqrt(prev_thrust * target);  // geometric bisection of the step
        }
    }

    if (config.refine_near_events && surf.levels.size() >= 2) {
        int inserted = 0;
        bool changed = true;
        while (changed && inserted < config.max_inserted_levels) {
            changed = false;
            for (std::size_t i = 0; i + 1 < surf.levels.size() && inserted < config.max_inserted_levels;
                 ++i) {
                const auto sig_a = surface_detail::signature(surf.levels[i]);
                const auto sig_b = surface_detail::signature(surf.levels[i + 1]);
                const double ta = surf.levels[i].thrust_cu(), tb = surf.levels[i + 1].thrust_cu();
                if (!surface_detail::differs(sig_a, sig_b) || tb / ta <= config.event_ratio_tol) continue;
                const double tm = std::sqrt(ta * tb);
                auto ext = surface_detail::solve_level(base, tm, surf.levels[i].ext.eta0, schedule, jobs);
                if (!ext) break;
                surf.levels.insert(surf.levels.begin() + i + 1,
                                   surface_detail::finish_level(std::move(*ext), surf.sample_times));
                ++inserted;
                changed = true;
            }
        }
    }
    return surf;
}

// ---- topology extraction ----

enum class BifurcationKind { peninsula, island, vanish, branch };

inline const char* to_string(BifurcationKind k) {
    switch (k) {
        case BifurcationKind::peninsula: return "peninsula";
        case BifurcationKind::island: return "island";
        case BifurcationKind::vanish: return "vanish";
        case BifurcationKind::branch: return "branch";
    }
    return "?";
}

struct Bifurcation {
    double thrust_cu = 0.0;   // critical thrust (geometric mean of the bracketing levels)
    double thrust_newtons = 0.0;
    double t = 0.0;           // flight time at which the ridge appears/disappears
    BifurcationKind kind = BifurcationKind::island;
};

struct RidgeLineage {
    int id = 0;
    std::size_t first_level = 0;
    // arc per level from first_level on; empty optional once the ridge dies
    std::vector<std::optional<ThrustArc>> arcs;

    bool alive_at(std::size_t level) const {
        return level >= first_level && level - first_level < arcs.size() &&
               arcs[level - first_level].has_value();
    }
};

struct SurfaceTopology {
    std::vector<RidgeLineage> ridges;
    std::vector<Bifurcation> bifurcations;
    std::size_t n_ridges_high = 0;
};

// matches thrust arcs between adjacent levels by interval overlap
// (Jaccard >= 0.2); unmatched births away from the surface base become
// bifurcations, unmatched deaths become vanish events
inline SurfaceTopology track_ridges(const SwitchingSurface& surf) {
    SurfaceTopology topo;
    if (surf.levels.size() < 2) {
        if (!surf.levels.empty())
            topo.n_ridges_high = detail::finite_arcs(surf.levels.back().ext.switches).size();
        return topo;
    }

    const double span = surf.problem.tf - surf.problem.t0;
    const double attach_gap = 0.02 * span;
    int next_id = 0;
    std::vector<int> current;  // lineage id per arc of the current level

    const auto arcs0 = detail::finite_arcs(surf.levels.front().ext.switches);
    for (const auto& a : arcs0) {
        RidgeLineage lin;
        lin.id = next_id++;
        lin.first_level = 0;
        lin.arcs.push_back(a);
        topo.ridges.push_back(std::move(lin));
        current.push_back(topo.ridges.back().id);
    }

    for (std::size_t lv = 1; lv < surf.levels.size(); ++lv) {
        const auto prev = detail::finite_arcs(surf.levels[lv - 1].ext.switches);
        const auto cur = detail::finite_arcs(surf.levels[lv].ext.switches);
        const double t_lo = surf.levels[lv - 1].thrust_cu();
        const double t_hi = surf.levels[lv].thrust_cu();
        const double t_crit = std::sqrt(t_lo * t_hi);
        const double t_crit_n = surf.levels[lv].ext.problem.engine.with_thrust_cu(t_crit).thrust_newtons();

        // greedy best-overlap matching
        std::vector<int> match_cur(cur.size(), -1);   // index into prev
        std::vector<int> match_prev(prev.size(), -1);
        std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < prev.size(); ++i)
            for (std::size_t j = 0; j < cur.size(); ++j) {
                const double ov = detail::interval_jaccard(prev[i], cur[j]);
                if (ov >= 0.2) pairs.emplace_back(ov, i, j);
            }
        std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
            return std::get<0>(a) > std::get<0>(b);
        });
        std::vector<bool> prev_used(prev.size(), false), cur_used(cur.size(), false);
        for (const auto& [ov, i, j] : pairs) {
            if (prev_used[i] || cur_used[j]) {
                // a second strong overlap with an already-matched parent is a split
                if (prev_used[i] && !cur_used[j] && match_prev[i] >= 0) match_cur[j] = -2 - static_cast<int>(i);
                continue;
            }
            prev_used[i] = cur_used[j] = true;
            match_cur[j] = static_cast<int>(i);
            match_prev[i] = static_cast<int>(j);
        }

        std::vector<int> next_ids(cur.size(), -1);
        for (std::size_t j = 0; j < cur.size(); ++j) {
            if (match_cur[j] >= 0) {
                next_ids[j] = current[match_cur[j]];
                topo.ridges[next_ids[j]].arcs.push_back(cur[j]);
            }
        }
        // deaths
        for (std::size_t i = 0; i < prev.size(); ++i) {
            if (match_prev[i] >= 0) continue;
            Bifurcation b;
            b.thrust_cu = t_crit;
            b.thrust_newtons = t_crit_n;
            b.t = 0.5 * (prev[i].t_on + prev[i].t_off);
            b.kind = BifurcationKind::vanish;
            topo.bifurcations.push_back(b);
        }
        // births
        for (std::size_t j = 0; j < cur.size(); ++j) {
            if (next_ids[j] >= 0) continue;
            RidgeLineage lin;
            lin.id = next_id++;
            lin.first_level = lv;
            lin.arcs.push_back(cur[j]);
            topo.ridges.push_back(std::move(lin));
            next_ids[j] = topo.ridges.back().id;

            Bifurcation b;
            b.thrust_cu = t_crit;
            b.thrust_newtons = t_crit_n;
            b.t = 0.5 * (cur[j].t_on + cur[j].t_off);
            if (match_cur[j] <= -2) {
                b.kind = BifurcationKind::branch;
            } else {
                // peninsula if the newborn interval hugs an existing ridge
                double gap = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < prev.size(); ++i) {
                    gap = std::min(gap, std::max(0.0, prev[i].t_on - cur[j].t_off));
                    gap = std::min(gap, std::max(0.0, cur[j].t_on - prev[i].t_off));
                    if (detail::interval_jaccard(prev[i], cur[j]) > 0.0) gap = 0.0;
                }
                b.kind = gap <= attach_gap ? BifurcationKind::peninsula : BifurcationKind::island;
            }
            topo.bifurcations.push_back(b);
        }
        // keep per-level ordering of lineage ids
        std::vector<std::pair<double, int>> order;
        for (std::size_t j = 0; j < cur.size(); ++j) order.emplace_back(cur[j].t_on, next_ids[j]);
        std::sort(order.begin(), order.end());
        current.clear();
        for (const auto& [ton, id] : order) current.push_back(id);
    }

    topo.n_ridges_high = detail::finite_arcs(surf.levels.back().ext.switches).size();
    return topo;
}

// reachability boundaries read off the surface: a level whose switching
// function is negative at tf ends with a coast (early arrival possible), one
// negative at t0 starts with a coast (late departure possible)
struct BoundaryPoint {
    double thrust_cu = 0.0;
    double thrust_newtons = 0.0;
    std::optional<double> t_ld;
    std::optional<double> t_ea;
    std::optional<double> gamma;  // m(t_ea) / m0
};

struct BoundaryProfile {
    std::vector<BoundaryPoint> points;

    // lowest thrust at which the early-arrival boundary exists
    std::optional<double> ea_onset_newtons() const {
        for (const auto& p : points)
            if (p.t_ea) return p.thrust_newtons;
        return std::nullopt;
    }
    bool any_late_departure() const {
        return std::any_of(points.begin(), points.end(), [](const BoundaryPoint& p) {
            return p.t_ld.has_value();
        });
    }
};

inline BoundaryProfile boundaries(const SwitchingSurface& surf) {
    if (surf.levels.empty()) throw std::invalid_argument("boundaries: empty surface");
    BoundaryProfile out;
    for (const auto& lvl : surf.levels) {
        BoundaryPoint p;
        p.thrust_cu = lvl.thrust_cu();
        p.thrust_newtons = lvl.thrust_newtons();
        const auto arcs = detail::finite_arcs(lvl.ext.switches);
        if (!arcs.empty() && lvl.ext.switches.s_tf < 0.0) {
            p.t_ea = arcs.back().t_off;
            p.gamma = lvl.gamma_candidate;
        }
        if (!arcs.empty() && lvl.ext.switches.s_t0 < 0.0) p.t_ld = arcs.front().t_on;
        out.points.push_back(p);
    }
    return out;
}

// impulse readiness: every thrust arc shorter than eps_frac * flight time
struct ArcSummary {
    double t_mid = 0.0;
    double duration = 0.0;
    double m_mid = 0.0;
    bool touches_t0 = false;
    bool touches_tf = false;
};

struct ImpulseReadiness {
    bool ready = false;
    std::vector<ArcSummary> arcs;
};

inline ImpulseReadiness impulse_ready(const Extremal& ext, double eps_frac) {
    const double span = ext.problem.tf - ext.problem.t0;
    const double edge = 1e-9 * span;
    ImpulseReadiness out;
    out.ready = true;
    Trajectory traj = ext.traj.has_dense() ? ext.traj : ext.repropagate();
    for (const auto& a : ext.switches.arcs) {
        if (a.duration() <= 0.0) continue;
        ArcSummary s;
        s.t_mid = 0.5 * (a.t_on + a.t_off);
        s.duration = a.duration();
        s.m_mid = traj.mass_at(s.t_mid);
        s.touches_t0 = a.t_on <= ext.problem.t0 + edge;
        s.touches_tf = a.t_off >= ext.problem.tf - edge;
        out.arcs.push_back(s);
        if (s.duration >= eps_frac * span) out.ready = false;
    }
    return out;
}

}  // namespace sc

#endif
