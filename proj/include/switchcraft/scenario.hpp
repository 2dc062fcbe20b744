#ifndef SWITCHCRAFT_SCENARIO_HPP
#define SWITCHCRAFT_SCENARIO_HPP

#include <fstream>
#include <map>
#include <sstream>

#include "switchcraft/surface.hpp"

namespace sc {

// one transfer case: endpoints in SI (km, km/s, kg, s at the boundary),
// engine data, and the sweep/solver configuration
struct Scenario {
    std::string name;
    double mu_km3s2 = 0.0;
    double du_km = 0.0;

    CartesianState x0_km;  // departure position/velocity
    double m0_kg = 0.0;
    CartesianState xT_km;  // arrival position/velocity
    double tof_s = 0.0;

    EngineSpec engine;

    std::optional<int> nrev;       // fundamental revolution count, if prescribed
    std::vector<int> extra_nrevs;  // additional surfaces to build

    double tmax_n = 0.0;           // sweep upper thrust bound
    int levels = 120;
    double eps_frac = 1e-3;
    bool refine_events = true;
    SmoothingSchedule schedule;
    int multistart_n = 24;

    CanonicalUnits units() const { return CanonicalUnits::from_mu_du(mu_km3s2, du_km); }
};

namespace scenario_detail {

struct RawConfig {
    // section -> key -> value string
    std::map<std::string, std::map<std::string, std::string>> kv;

    const std::string* find(const std::string& section, const std::string& key) const {
        const auto s = kv.find(section);
        if (s == kv.end()) return nullptr;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }
};

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline RawConfig parse_raw(const std::string& text, std::vector<std::string>& errors) {
    RawConfig cfg;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        cfg.kv[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

inline std::optional<double> parse_number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (...) {
    }
    return std::nullopt;
}

inline std::optional<Vec3> parse_vec3(const std::string& s) {
    std::istringstream in(s);
    Vec3 v;
    if (!(in >> v(0) >> v(1) >> v(2))) return std::nullopt;
    std::string rest;
    if (in >> rest) return std::nullopt;
    return v;
}

}  // namespace scenario_detail

// parses and validates a scenario; violations are aggregated, not fail-fast
inline std::optional<Scenario> parse_scenario(const std::string& text, std::vector<std::string>& errors) {
    using namespace scenario_detail;
    RawConfig cfg = parse_raw(text, errors);
    Scenario sc;

    auto need_number = [&](const std::string& section, const std::string& key, double& out) {
        const std::string path = section.empty() ? key : section + "." + key;
        const auto* v = cfg.find(section, key);
        if (!v) {
            errors.push_back(path + " required");
            return;
        }
        const auto n = parse_number(*v);
        if (!n)
            errors.push_back(path + ": not a number");
        else
            out = *n;
    };
    auto need_vec3 = [&](const std::string& section, const std::string& key, Vec3& out) {
        const std::string path = section + "." + key;
        const auto* v = cfg.find(section, key);
        if (!v) {
            errors.push_back(path + " required");
            return;
        }
        const auto n = parse_vec3(*v);
        if (!n)
            errors.push_back(path + ": expected three numbers");
        else
            out = *n;
    };
    auto optional_number = [&](const std::string& section, const std::string& key, double& out) {
        const auto* v = cfg.find(section, key);
        if (!v) return;
        const auto n = parse_number(*v);
        if (!n)
            errors.push_back(section + "." + key + ": not a number");
        else
            out = *n;
    };

    if (const auto* v = cfg.find("", "name")) sc.name = *v;
    if (sc.name.empty()) errors.push_back("name required");
    need_number("", "mu", sc.mu_km3s2);
    need_number("", "du", sc.du_km);
    need_vec3("departure", "r", sc.x0_km.r);
    need_vec3("departure", "v", sc.x0_km.v);
    need_number("departure", "mass", sc.m0_kg);
    need_vec3("arrival", "r", sc.xT_km.r);
    need_vec3("arrival", "v", sc.xT_km.v);
    double tof_days = 0.0;
    need_number("time", "tof_days", tof_days);
    sc.tof_s = tof_days * day_s;
    need_number("engine", "isp", sc.engine.isp_s);
    optional_number("engine", "g0", sc.engine.g0);
    need_number("sweep", "tmax_n", sc.tmax_n);
    double levels = sc.levels;
    optional_number("sweep", "levels", levels);
    sc.levels = static_cast<int>(levels);
    optional_number("sweep", "eps_frac", sc.eps_frac);
    if (const auto* v = cfg.find("sweep", "refine_events")) sc.refine_events = (*v == "true" || *v == "1");
    optional_number("solver", "rho_start", sc.schedule.rho_start);
    optional_number("solver", "rho_min", sc.schedule.rho_min);
    optional_number("solver", "rho_factor", sc.schedule.factor);
    double multistarts = sc.multistart_n;
    optional_number("solver", "multistarts", multistarts);
    sc.multistart_n = static_cast<int>(multistarts);
    if (const auto* v = cfg.find("solver", "nrev")) {
        const auto n = parse_number(*v);
        if (!n || *n < 0.0 || *n != std::floor(*n))
            errors.push_back("solver.nrev: expected a non-negative integer");
        else
            sc.nrev = static_cast<int>(*n);
    }
    if (const auto* v = cfg.find("solver", "extra_nrevs")) {
        std::istringstream in(*v);
        int n = 0;
        while (in >> n) sc.extra_nrevs.push_back(n);
    }

    // semantic validation on top of parse completeness
    if (errors.empty()) {
        if (sc.mu_km3s2 <= 0.0) errors.push_back("mu: must be positive");
        if (sc.du_km <= 0.0) errors.push_back("du: must be positive");
        if (sc.m0_kg <= 0.0) errors.push_back("departure.mass: must be positive");
        if (sc.tof_s <= 0.0) errors.push_back("time.tof_days: flight time non-positive");
        if (sc.engine.isp_s <= 0.0) errors.push_back("engine.isp: must be positive");
        if (sc.engine.g0 <= 0.0) errors.push_back("engine.g0: must be positive");
        if (sc.tmax_n <= 0.0) errors.push_back("sweep.tmax_n: must be positive");
        if (sc.levels < 1) errors.push_back("sweep.levels: must be at least 1");
        if (sc.eps_frac <= 0.0) errors.push_back("sweep.eps_frac: must be positive");
        if (!sc.schedule.valid()) errors.push_back("solver: smoothing schedule invalid");
    }
    if (errors.empty()) {
        // unit coherence: both endpoints must describe bound orbits about mu
        for (const auto& [label, state] : {std::pair<const char*, const CartesianState&>{"departure", sc.x0_km},
                                           {"arrival", sc.xT_km}}) {
            const double energy = specific_energy(state, sc.mu_km3s2);
            if (!(energy < 0.0))
                errors.push_back(std::string(label) +
                                 ": state is not a bound orbit; check km / km/s unit coherence");
            try {
                (void)cart_to_mee(state, sc.mu_km3s2);
            } catch (const std::exception& e) {
                errors.push_back(std::string(label) + ": " + e.what());
            }
        }
    }
    if (!errors.empty()) return std::nullopt;
    return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<std::string> errors;
    auto sc = parse_scenario(ss.str(), errors);
    if (!sc) {
        std::string msg = "scenario " + path + " invalid:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }
    return *sc;
}

// ---- canonical problem assembly ----

struct CanonicalScenario {
    Scenario scenario;
    CanonicalUnits units;
    MeeState x0;          // mass normalized to 1
    MeeState arrival;     // l wrapped to [0, 2 pi)
    MinFuelProblem base;  // target left empty; engine thrust = estimate
    double thrust_estimate_n = 0.0;
    bool estimate_fallback = false;
    double tau_low = 0.0, tau_high = 0.0;  // endpoint periods, canonical
};

inline CanonicalScenario canonicalize(const Scenario& s) {
    CanonicalScenario c;
    c.scenario = s;
    c.units = s.units();

    CartesianState x0_cu{s.x0_km.r / c.units.du, s.x0_km.v / c.units.vu};
    CartesianState xT_cu{s.xT_km.r / c.units.du, s.xT_km.v / c.units.vu};
    c.x0 = cart_to_mee(x0_cu, 1.0, 1.0);
    c.arrival = cart_to_mee(xT_cu, 1.0, 1.0);

    const auto est = estimate_thrust(s.x0_km, s.xT_km, s.m0_kg, s.tof_s,
                                     s.engine.exhaust_velocity_ms(), s.mu_km3s2);
    c.thrust_estimate_n = est.thrust_n;
    c.estimate_fallback = est.fallback;

    EngineSpec spec = s.engine;
    spec.thrust_n = est.thrust_n > 0.0 ? est.thrust_n : s.tmax_n;
    c.base.x0 = c.x0;
    c.base.t0 = 0.0;
    c.base.tf = s.tof_s / c.units.tu;
    c.base.engine = make_engine(spec, c.units, s.m0_kg);
    c.base.mu = 1.0;

    const double tau0 = orbital_period(x0_cu, 1.0);
    const double tauT = orbital_period(xT_cu, 1.0);
    c.tau_low = std::min(tau0, tauT);
    c.tau_high = std::max(tau0, tauT);
    return c;
}

}  // namespace sc

#endif
