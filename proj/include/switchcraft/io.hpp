#ifndef SWITCHCRAFT_IO_HPP
#define SWITCHCRAFT_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "switchcraft/impulsive.hpp"

namespace sc {

using nlohmann::json;

inline std::string fmt_g17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
}

// t, elements, mass, co-states, switching function, throttle, direction
inline std::string trajectory_csv(const Trajectory& traj) {
    std::string s = "t,p,f,g,h,k,l,m,lam1,lam2,lam3,lam4,lam5,lam6,lam_m,S,delta,alpha1,alpha2,alpha3\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        s += fmt_g17(traj.times[i]);
        for (int j = 0; j < 14; ++j) s += "," + fmt_g17(traj.z[i](j));
        const auto& u = traj.controls[i];
        s += "," + fmt_g17(u.s_value) + "," + fmt_g17(u.delta);
        for (int j = 0; j < 3; ++j) s += "," + fmt_g17(u.alpha(j));
        s += "\n";
    }
    return s;
}

// long-format (thrust, time, S) field, plot-ready for contouring
inline std::string surface_csv(const SwitchingSurface& surf) {
    std::string s = "T_N,t_TU,S\n";
    for (const auto& lvl : surf.levels) {
        const std::string tn = fmt_g17(lvl.thrust_newtons());
        for (std::size_t i = 0; i < surf.sample_times.size(); ++i)
            s += tn + "," + fmt_g17(surf.sample_times[i]) + "," + fmt_g17(lvl.s_samples[i]) + "\n";
    }
    return s;
}

inline std::string nrev_scan_csv(const NrevScan& scan, double m0_kg) {
    std::string s = "n_rev,T_min_N,m_f_kg,converged\n";
    for (const auto& e : scan.entries) {
        s += std::to_string(e.n_rev) + ",";
        s += (e.converged ? fmt_g17(e.t_min_newtons) : std::string("nan")) + ",";
        s += (e.converged ? fmt_g17(e.final_mass * m0_kg) : std::string("nan")) + ",";
        s += (e.converged ? "1" : "0");
        s += "\n";
    }
    return s;
}

inline json extremal_json(const Extremal& ext) {
    json j;
    j["eta0"] = std::vector<double>(ext.eta0.data(), ext.eta0.data() + 7);
    j["thrust_n"] = ext.thrust_newtons();
    j["rho"] = ext.mode == Throttle::full_on ? 0.0 : ext.rho;
    j["fuel"] = ext.fuel();
    j["converged_norm"] = ext.converged_norm;
    j["n_rev"] = ext.problem.n_rev;
    return j;
}

inline json topology_json(const SwitchingSurface& surf, const SurfaceTopology& topo,
                          const BoundaryProfile& bounds) {
    json j;
    j["n_ridges_high"] = topo.n_ridges_high;

    json ridges = json::array();
    for (const auto& lin : topo.ridges) {
        json r;
        r["id"] = lin.id;
        r["first_level"] = lin.first_level;
        json arcs = json::array();
        for (std::size_t k = 0; k < lin.arcs.size(); ++k) {
            if (!lin.arcs[k]) continue;
            json a;
            a["T_N"] = surf.levels[lin.first_level + k].thrust_newtons();
            a["t_on"] = lin.arcs[k]->t_on;
            a["t_off"] = lin.arcs[k]->t_off;
            arcs.push_back(a);
        }
        r["levels"] = arcs;
        ridges.push_back(r);
    }
    j["ridges"] = ridges;

    json bifs = json::array();
    for (const auto& b : topo.bifurcations) {
        json e;
        e["T_crit_N"] = b.thrust_newtons;
        e["t"] = b.t;
        e["kind"] = to_string(b.kind);
        bifs.push_back(e);
    }
    j["bifurcations"] = bifs;

    json bd = json::array();
    for (const auto& p : bounds.points) {
        json e;
        e["T_N"] = p.thrust_newtons;
        e["t_ld"] = p.t_ld ? json(*p.t_ld) : json(nullptr);
        e["t_ea"] = p.t_ea ? json(*p.t_ea) : json(nullptr);
        e["gamma"] = p.gamma ? json(*p.gamma) : json(nullptr);
        bd.push_back(e);
    }
    j["boundaries"] = bd;
    return j;
}

inline json plan_json(const RefineResult& refined, const LawdenDiagnostics& lawden,
                      const CanonicalUnits& units) {
    const auto& plan = refined.plan;
    json j;
    j["n"] = plan.n();
    json times = json::array(), dvs = json::array(), dv_norms = json::array();
    for (int i = 0; i < plan.n(); ++i) {
        times.push_back(plan.times[i] * units.tu / day_s);
        const Vec3 dv_kms = plan.dvs[i] * units.vu;
        dvs.push_back({dv_kms(0), dv_kms(1), dv_kms(2)});
        dv_norms.push_back(dv_kms.norm());
    }
    j["times_days"] = times;
    j["dv_kms"] = dvs;
    j["dv_norms_kms"] = dv_norms;
    j["total_dv_kms"] = refined.total_dv * units.vu;
    j["residual_norm"] = refined.residual_norm;
    j["lawden"]["max_primer"] = lawden.max_primer;
    j["lawden"]["primer_at_impulses"] = lawden.primer_at_impulses;
    return j;
}

}  // namespace sc

#endif
