#ifndef SWITCHCRAFT_PIPELINE_HPP
#define SWITCHCRAFT_PIPELINE_HPP

#include "switchcraft/io.hpp"
#include "switchcraft/scenario.hpp"

namespace sc {

struct PipelineOptions {
    std::uint64_t seed = 2077;
    int jobs = 1;
    std::string out_dir;        // empty: no files written
    int levels_override = 0;
    double tmax_override_n = 0.0;
    std::optional<int> nrev_override;
};

// results of one scenario run: minimum-thrust scan, fundamental surface,
// refined impulsive plan, plus the same products for any extra revolution
// counts the scenario requests
struct SurfaceProducts {
    int n_rev = 0;
    Extremal t_min_extremal;
    SwitchingSurface surface;
    SurfaceTopology topology;
    BoundaryProfile bounds;
    ImpulsivePlan seed_plan;
    RefineResult refined;
    LawdenDiagnostics lawden;
};

struct PipelineReport {
    CanonicalScenario canonical;
    NrevScan scan;
    bool scan_ran = false;
    std::vector<SurfaceProducts> products;  // fundamental first
    std::vector<std::string> stage_errors;
    bool complete = false;

    const SurfaceProducts& fundamental() const {
        if (products.empty()) throw SolveError("pipeline: no surface products");
        return products.front();
    }
};

namespace pipeline_detail {

inline Extremal extremal_from_scan(const CanonicalScenario& c, const NrevScanEntry& entry) {
    MinFuelProblem prob = c.base;
    prob.n_rev = entry.n_rev;
    prob.target = mee_target_for_nrev(c.arrival, entry.n_rev);
    prob.engine = c.base.engine.with_thrust_cu(entry.t_min_cu);
    Extremal ext;
    ext.problem = prob;
    ext.eta0 = entry.eta0;
    ext.mode = Throttle::full_on;
    ext.rho = 1e-5;
    ext.traj = ext.repropagate();
    ext.switches = locate_switches(ext.traj);
    const auto r = residual(prob, entry.eta0, 1.0, Throttle::full_on);
    ext.converged_norm = r ? r->lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
    ext.traj.drop_dense();
    return ext;
}

inline SurfaceProducts build_surface_products(const CanonicalScenario& c, const Extremal& t_min_ext,
                                              const PipelineOptions& opt) {
    const Scenario& s = c.scenario;
    SurfaceProducts out;
    out.n_rev = t_min_ext.problem.n_rev;
    out.t_min_extremal = t_min_ext;

    const double tmax_n = opt.tmax_override_n > 0.0 ? opt.tmax_override_n : s.tmax_n;
    const double t_lo = t_min_ext.problem.engine.thrust;
    const double t_hi = c.base.engine.with_thrust_newtons(tmax_n).thrust;
    const int levels = opt.levels_override > 0 ? opt.levels_override : s.levels;

    SweepConfig config;
    config.thrust_grid = SweepConfig::log_spaced(t_lo, std::max(t_hi, t_lo * 1.0001), levels);
    config.eps_frac = s.eps_frac;
    config.refine_near_events = s.refine_events;

    MinFuelProblem prob = t_min_ext.problem;
    out.surface = sweep(prob, t_min_ext, config, s.schedule, opt.jobs);
    if (!out.surface.complete)
        throw SolveError("sweep incomplete: " + out.surface.failure_note);
    out.topology = track_ridges(out.surface);
    out.bounds = boundaries(out.surface);

    // impulse extraction wants dense output at the top level
    Extremal top = out.surface.top().ext;
    top.traj = top.repropagate();
    out.seed_plan = extract_impulses(top, config.eps_frac);
    out.refined = refine(out.seed_plan);
    out.lawden = lawden_diagnostics(top, out.refined.plan);
    return out;
}

inline void export_products(const PipelineReport& rep, const PipelineOptions& opt) {
    namespace fs = std::filesystem;
    if (opt.out_dir.empty()) return;
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    const CanonicalUnits& units = rep.canonical.units;
    const double m0 = rep.canonical.scenario.m0_kg;

    if (rep.scan_ran) write_text_file(dir / "nrev_scan.csv", nrev_scan_csv(rep.scan, m0));

    json summary;
    summary["scenario"] = rep.canonical.scenario.name;
    summary["thrust_estimate_n"] = rep.canonical.thrust_estimate_n;
    summary["complete"] = rep.complete;
    summary["stage_errors"] = rep.stage_errors;

    json per_surface = json::array();
    for (std::size_t i = 0; i < rep.products.size(); ++i) {
        const auto& p = rep.products[i];
        const std::string tag = i == 0 ? "" : "_nrev" + std::to_string(p.n_rev);

        write_text_file(dir / ("surface" + tag + ".csv"), surface_csv(p.surface));
        write_text_file(dir / ("topology" + tag + ".json"),
                        topology_json(p.surface, p.topology, p.bounds).dump(2) + "\n");
        write_text_file(dir / ("plan" + tag + ".json"),
                        plan_json(p.refined, p.lawden, units).dump(2) + "\n");
        write_text_file(dir / ("trajectory_tmin" + tag + ".csv"), trajectory_csv(p.t_min_extremal.traj));
        write_text_file(dir / ("trajectory_tmax" + tag + ".csv"),
                        trajectory_csv(p.surface.top().ext.traj));
        write_text_file(dir / ("extremal_tmin" + tag + ".json"),
                        extremal_json(p.t_min_extremal).dump(2) + "\n");

        json e;
        e["n_rev"] = p.n_rev;
        e["t_min_n"] = p.t_min_extremal.thrust_newtons();
        e["n_ridges_high"] = p.topology.n_ridges_high;
        e["n_impulses"] = p.refined.plan.n();
        e["total_dv_kms"] = p.refined.total_dv * units.vu;
        e["final_mass_kg"] = p.surface.top().ext.final_mass() * m0;
        per_surface.push_back(e);
    }
    summary["surfaces"] = per_surface;
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace pipeline_detail

// scan -> sweep (fundamental revolution count plus any extras) ->
// extraction at the top thrust -> impulsive refinement, with exports
inline PipelineReport run_pipeline(const Scenario& scenario, const PipelineOptions& opt = {}) {
    PipelineReport rep;
    rep.canonical = canonicalize(scenario);
    const CanonicalScenario& c = rep.canonical;

    MinThrustOptions mt_opt;
    mt_opt.jobs = opt.jobs;
    mt_opt.seed = opt.seed;
    mt_opt.n_starts = scenario.multistart_n;

    std::optional<int> nrev = opt.nrev_override ? opt.nrev_override : scenario.nrev;

    std::vector<std::pair<int, std::optional<Extremal>>> to_build;
    try {
        if (nrev) {
            MinFuelProblem prob = c.base;
            prob.target = mee_target_for_nrev(c.arrival, *nrev);
            to_build.emplace_back(*nrev, solve_min_thrust(prob, *nrev, mt_opt));
        } else {
            const auto [n_lo, n_hi] = nrev_bounds(c.base.t0, c.base.tf, c.tau_low, c.tau_high);
            rep.scan = scan_nrev(c.base, c.arrival, n_lo, n_hi, mt_opt);
            rep.scan_ran = true;
            to_build.emplace_back(rep.scan.fundamental_entry().n_rev,
                                  pipeline_detail::extremal_from_scan(c, rep.scan.fundamental_entry()));
        }
        for (const int extra : scenario.extra_nrevs) {
            if (extra == to_build.front().first) continue;
            MinFuelProblem prob = c.base;
            prob.target = mee_target_for_nrev(c.arrival, extra);
            const Vec7 seed_eta = to_build.front().second->eta0;
            auto ext = try_solve_min_thrust(prob, extra, mt_opt, &seed_eta);
            if (!ext) ext = try_solve_min_thrust(prob, extra, mt_opt);
            if (!ext) {
                rep.stage_errors.push_back("min-thrust failed for extra n_rev " + std::to_string(extra));
                continue;
            }
            to_build.emplace_back(extra, std::move(ext));
        }
    } catch (const std::exception& e) {
        rep.stage_errors.push_back(std::string("minthrust: ") + e.what());
    }

    for (auto& [n, ext] : to_build) {
        if (!ext) continue;
        try {
            rep.products.push_back(pipeline_detail::build_surface_products(c, *ext, opt));
        } catch (const std::exception& e) {
            rep.stage_errors.push_back("surface n_rev " + std::to_string(n) + ": " + e.what());
        }
    }

    rep.complete = rep.stage_errors.empty() && !rep.products.empty();
    pipeline_detail::export_products(rep, opt);
    return rep;
}

}  // namespace sc

#endif
