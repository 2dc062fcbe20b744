#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "switchcraft/switchcraft.hpp"

namespace {

struct CommonArgs {
    std::string scenario_path;
    std::string out_dir;
    std::uint64_t seed = 2077;
    int jobs = 0;
    int nrev = -1;
    int levels = 0;
    double tmax = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_out = false) {
    cmd->add_option("--scenario", args.scenario_path, "scenario file")->required();
    auto* out = cmd->add_option("--out", args.out_dir, "output directory");
    if (need_out) out->required();
    cmd->add_option("--seed", args.seed, "random seed for co-state multistarts");
    cmd->add_option("--jobs", args.jobs, "worker threads (default: hardware)");
    cmd->add_option("--nrev", args.nrev, "revolution count override");
    cmd->add_option("--levels", args.levels, "thrust sweep levels override");
    cmd->add_option("--tmax", args.tmax, "sweep upper thrust bound override (N)");
}

sc::PipelineOptions make_options(const CommonArgs& args) {
    sc::PipelineOptions opt;
    opt.seed = args.seed;
    if (const char* env = std::getenv("SWITCHCRAFT_SEED")) opt.seed = std::strtoull(env, nullptr, 10);
    opt.jobs = args.jobs > 0 ? args.jobs : sc::default_jobs();
    opt.out_dir = args.out_dir;
    opt.levels_override = args.levels;
    opt.tmax_override_n = args.tmax;
    if (args.nrev >= 0) opt.nrev_override = args.nrev;
    return opt;
}

int report_exit(const sc::PipelineReport& rep) {
    for (const auto& e : rep.stage_errors) std::cerr << "stage error: " << e << "\n";
    return rep.complete ? 0 : 2;
}

int run_minthrust(const CommonArgs& args) {
    const auto scenario = sc::load_scenario_file(args.scenario_path);
    const auto opt = make_options(args);
    auto c = sc::canonicalize(scenario);

    sc::MinThrustOptions mt;
    mt.jobs = opt.jobs;
    mt.seed = opt.seed;
    mt.n_starts = scenario.multistart_n;

    std::cout << "thrust estimate: " << c.thrust_estimate_n << " N\n";
    if (opt.nrev_override || scenario.nrev) {
        const int n = opt.nrev_override ? *opt.nrev_override : *scenario.nrev;
        sc::MinFuelProblem prob = c.base;
        prob.target = sc::mee_target_for_nrev(c.arrival, n);
        const auto ext = sc::solve_min_thrust(prob, n, mt);
        std::cout << "n_rev " << n << ": T_min = " << ext.thrust_newtons() << " N, m_f = "
                  << ext.final_mass() * scenario.m0_kg << " kg\n";
        return 0;
    }
    const auto [n_lo, n_hi] = sc::nrev_bounds(c.base.t0, c.base.tf, c.tau_low, c.tau_high);
    const auto scan = sc::scan_nrev(c.base, c.arrival, n_lo, n_hi, mt);
    for (const auto& e : scan.entries) {
        std::cout << "n_rev " << e.n_rev << ": ";
        if (e.converged)
            std::cout << "T_min = " << e.t_min_newtons << " N, m_f = " << e.final_mass * scenario.m0_kg
                      << " kg";
        else
            std::cout << "no solution";
        std::cout << "\n";
    }
    std::cout << "fundamental n_rev = " << scan.fundamental_entry().n_rev << "\n";
    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        sc::write_text_file(std::filesystem::path(opt.out_dir) / "nrev_scan.csv",
                            sc::nrev_scan_csv(scan, scenario.m0_kg));
    }
    return 0;
}

int run_stage(const CommonArgs& args, bool through_impulses) {
    auto scenario = sc::load_scenario_file(args.scenario_path);
    scenario.extra_nrevs.clear();  // single-surface verbs
    const auto opt = make_options(args);
    const auto rep = sc::run_pipeline(scenario, opt);
    if (rep.products.empty()) return report_exit(rep);

    const auto& p = rep.fundamental();
    std::cout << "n_rev " << p.n_rev << ": T_min = " << p.t_min_extremal.thrust_newtons() << " N, "
              << p.surface.levels.size() << " levels, " << p.topology.n_ridges_high
              << " ridges at T_max, " << p.topology.bifurcations.size() << " topology events\n";
    if (through_impulses) {
        const auto& units = rep.canonical.units;
        std::cout << p.refined.plan.n() << " impulses, total dv = " << p.refined.total_dv * units.vu
                  << " km/s\n";
        for (int i = 0; i < p.refined.plan.n(); ++i)
            std::cout << "  t = " << p.refined.plan.times[i] * units.tu / sc::day_s << " d, |dv| = "
                      << p.refined.plan.dvs[i].norm() * units.vu << " km/s\n";
    }
    return report_exit(rep);
}

int run_pipeline_cmd(const CommonArgs& args) {
    const auto scenario = sc::load_scenario_file(args.scenario_path);
    const auto opt = make_options(args);
    const auto rep = sc::run_pipeline(scenario, opt);
    for (const auto& p : rep.products) {
        std::cout << "n_rev " << p.n_rev << ": T_min = " << p.t_min_extremal.thrust_newtons()
                  << " N, ridges " << p.topology.n_ridges_high << ", impulses " << p.refined.plan.n()
                  << ", total dv = " << p.refined.total_dv * rep.canonical.units.vu << " km/s\n";
    }
    return report_exit(rep);
}

int run_lambert(const CommonArgs& args) {
    const auto scenario = sc::load_scenario_file(args.scenario_path);
    const auto c = sc::canonicalize(scenario);
    const auto& units = c.units;
    const sc::Vec3 r1 = scenario.x0_km.r / units.du;
    const sc::Vec3 r2 = scenario.xT_km.r / units.du;
    const double tof = scenario.tof_s / units.tu;
    const bool long_way = sc::prograde_long_way(r1, r2);

    const auto all = sc::enumerate_lambert(r1, r2, tof, 1.0, long_way);
    std::cout << all.size() << " solutions\n";
    for (const auto& s : all) {
        if (args.nrev >= 0 && s.n_rev != args.nrev) continue;
        const double dv0 = (s.v1 - scenario.x0_km.v / units.vu).norm() * units.vu;
        const double dvf = (scenario.xT_km.v / units.vu - s.v2).norm() * units.vu;
        std::cout << "n_rev " << s.n_rev << " "
                  << (s.n_rev == 0 ? (s.long_way ? "long " : "short")
                                   : (s.branch == sc::LambertBranch::left ? "left " : "right"))
                  << ": dv0 = " << dv0 << " km/s, dvf = " << dvf << " km/s, total = " << dv0 + dvf
                  << " km/s\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimum-fuel switching surfaces and N-impulse extraction"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* cmd_minthrust = app.add_subcommand("minthrust", "minimum-thrust scan over revolution counts");
    add_common(cmd_minthrust, args);
    auto* cmd_sweep = app.add_subcommand("sweep", "thrust sweep and switching-surface topology");
    add_common(cmd_sweep, args);
    auto* cmd_impulses = app.add_subcommand("impulses", "impulse extraction and refinement");
    add_common(cmd_impulses, args);
    auto* cmd_pipeline = app.add_subcommand("pipeline", "full scan/sweep/impulse pipeline with exports");
    add_common(cmd_pipeline, args, true);
    auto* cmd_lambert = app.add_subcommand("lambert", "ballistic two-impulse baseline solutions");
    add_common(cmd_lambert, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_minthrust->parsed()) return run_minthrust(args);
        if (cmd_sweep->parsed()) return run_stage(args, false);
        if (cmd_impulses->parsed()) return run_stage(args, true);
        if (cmd_pipeline->parsed()) return run_pipeline_cmd(args);
        if (cmd_lambert->parsed()) return run_lambert(args);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const std::string what = e.what();
        return what.find("scenario") != std::string::npos || what.find("invalid") != std::string::npos ? 1
                                                                                                       : 2;
    }
    return 1;
}
