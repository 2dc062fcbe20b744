#ifndef SWITCHCRAFT_DYNAMICS_HPP
#define SWITCHCRAFT_DYNAMICS_HPP

#include <optional>

#include "switchcraft/dual.hpp"
#include "switchcraft/units.hpp"

namespace sc {

// adjoints of the six equinoctial elements plus the mass adjoint
struct Costate {
    Vec6 lam = Vec6::Zero();
    double lam_m = 0.0;
};

// engine description at the scenario boundary (SI)
struct EngineSpec {
    double thrust_n = 0.0;  // max thrust, N
    double isp_s = 0.0;     // specific impulse, s
    double g0 = g0_default_ms2;
    double exhaust_velocity_ms() const { return isp_s * g0; }
};

// engine in canonical units with mass normalized by the initial mass:
// thrust = T tu^2 / (m0 du), c = Isp g0 / vu. thrust_si_per_cu converts a
// canonical thrust value back to Newtons.
struct Engine {
    double thrust = 0.0;
    double c = 1.0;
    double thrust_si_per_cu = 1.0;

    double thrust_newtons() const { return thrust * thrust_si_per_cu; }
    Engine with_thrust_cu(double t_cu) const { return {t_cu, c, thrust_si_per_cu}; }
    Engine with_thrust_newtons(double t_n) const { return {t_n / thrust_si_per_cu, c, thrust_si_per_cu}; }
};

inline Engine make_engine(const EngineSpec& spec, const CanonicalUnits& units, double m0_kg) {
    Engine e;
    e.thrust_si_per_cu = m0_kg * units.du * 1000.0 / (units.tu * units.tu);
    e.thrust = spec.thrust_n / e.thrust_si_per_cu;
    e.c = spec.exhaust_velocity_ms() / (units.vu * 1000.0);
    return e;
}

enum class Throttle {
    smoothed,  // delta = (1 + tanh(S/rho)) / 2, the minimum-fuel control
    full_on,   // delta = 1, the minimum-time control
};

struct ControlSample {
    Vec3 alpha = Vec3::Zero();  // unit thrust direction, LVLH (radial, transverse, normal)
    double delta = 0.0;
    double s_value = 0.0;
    bool degenerate_primer = false;  // true when ||B' lam|| underflowed and alpha fell back to velocity
};

// geometric schedule for the throttle-smoothing continuation
struct SmoothingSchedule {
    double rho_start = 1.0;
    double rho_min = 1e-5;
    double factor = 0.5;

    bool valid() const { return rho_start >= rho_min && rho_min > 0.0 && factor > 0.0 && factor < 1.0; }
    std::vector<double> levels() const {
        std::vector<double> out;
        double rho = rho_start;
        while (rho > rho_min * (1.0 + 1e-12)) {
            out.push_back(rho);
            rho *= factor;
        }
        out.push_back(rho_min);
        return out;
    }
};

// generic scalar versions of the equinoctial state so the same formulas
// serve plain evaluation and dual-number differentiation
template <class T>
struct MeeOf {
    T p, f, g, h, k, l, mass;
};

template <class T>
struct FbEval {
    T f_l;        // sixth component of the unforced rate (others vanish)
    T b[6][3];    // control influence matrix
    T w, s2;
};

// unforced rate f and control influence matrix B of the equinoctial
// dynamics; w = 1 + f cos l + g sin l and s^2 = 1 + h^2 + k^2
template <class T>
FbEval<T> eval_f_b_t(const MeeOf<T>& x, double mu) {
    FbEval<T> out;
    const T cl = cos(x.l), sl = sin(x.l);
    out.w = 1.0 + x.f * cl + x.g * sl;
    out.s2 = 1.0 + x.h * x.h + x.k * x.k;
    if (value_of(x.p) <= 0.0) throw std::domain_error("eval_f_B: p <= 0");
    if (value_of(out.w) <= 0.0) throw std::domain_error("eval_f_B: w <= 0");

    const T sqpm = sqrt(x.p / mu);
    const T winv = 1.0 / out.w;
    const T hskc = x.h * sl - x.k * cl;

    out.f_l = sqrt(mu * x.p) * (out.w / x.p) * (out.w / x.p);

    for (auto& row : out.b)
        for (auto& e : row) e = T(0.0);
    out.b[0][1] = 2.0 * x.p * winv * sqpm;
    out.b[1][0] = sqpm * sl;
    out.b[1][1] = sqpm * winv * ((out.w + 1.0) * cl + x.f);
    out.b[1][2] = -sqpm * x.g * winv * hskc;
    out.b[2][0] = -sqpm * cl;
    out.b[2][1] = sqpm * winv * ((out.w + 1.0) * sl + x.g);
    out.b[2][2] = sqpm * x.f * winv * hskc;
    out.b[3][2] = sqpm * out.s2 * cl * (0.5 * winv);
    out.b[4][2] = sqpm * out.s2 * sl * (0.5 * winv);
    out.b[5][2] = sqpm * winv * hskc;
    return out;
}

inline MeeOf<double> as_generic(const MeeState& x) {
    return {x.p, x.f, x.g, x.h, x.k, x.l, x.mass};
}

struct FbMatrices {
    Vec6 f = Vec6::Zero();
    Eigen::Matrix<double, 6, 3> B = Eigen::Matrix<double, 6, 3>::Zero();
    TwoBodyAux aux;
};

inline FbMatrices eval_f_B(const MeeState& x, double mu = 1.0) {
    const auto e = eval_f_b_t(as_generic(x), mu);
    FbMatrices out;
    out.f(5) = e.f_l;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) out.B(i, j) = e.b[i][j];
    out.aux = {e.w, e.s2};
    return out;
}

// un-normalized primer vector p = -B' lam
inline Vec3 primer_vector(const MeeState& x, const Costate& cs, double mu = 1.0) {
    const auto e = eval_f_B(x, mu);
    return -e.B.transpose() * cs.lam;
}

inline constexpr double primer_degenerate_eps = 1e-14;

// velocity direction in the LVLH (radial, transverse, normal) frame; the
// fallback thrust direction at isolated zero-primer points
template <class T>
void lvlh_velocity_direction(const MeeOf<T>& x, double mu, T out[3]) {
    const T cl = cos(x.l), sl = sin(x.l);
    const T w = 1.0 + x.f * cl + x.g * sl;
    const T sqmp = sqrt(mu / x.p);
    const T vr = sqmp * (x.f * sl - x.g * cl);
    const T vt = sqmp * w;
    const T vn = sqrt(vr * vr + vt * vt);
    out[0] = vr / vn;
    out[1] = vt / vn;
    out[2] = T(0.0);
}

// scalar-generic core: switching function, throttle, thrust direction and
// Hamiltonian evaluated together. lam stays real; the template argument
// carries derivatives with respect to the state variables only.
template <class T>
struct ControlEval {
    T s;          // switching function
    T delta;
    T alpha[3];
    T primer_norm;
    bool degenerate = false;
};

template <class T>
ControlEval<T> control_eval_t(const MeeOf<T>& x, const FbEval<T>& fb, const Vec6& lam, double lam_m,
                              const Engine& engine, double rho, Throttle mode) {
    ControlEval<T> out;
    T bl[3];
    for (int j = 0; j < 3; ++j) {
        bl[j] = T(0.0);
        for (int i = 0; i < 6; ++i) bl[j] += fb.b[i][j] * lam(i);
    }
    const T nsq = bl[0] * bl[0] + bl[1] * bl[1] + bl[2] * bl[2];
    if (value_of(nsq) < primer_degenerate_eps * primer_degenerate_eps) {
        // ||B' lam|| vanishes: direction undefined, substitute the velocity
        // direction and treat the norm as the constant zero
        out.degenerate = true;
        out.primer_norm = T(0.0);
        lvlh_velocity_direction(x, 1.0, out.alpha);
    } else {
        out.primer_norm = sqrt(nsq);
        for (int j = 0; j < 3; ++j) out.alpha[j] = -bl[j] / out.primer_norm;
    }
    out.s = engine.c * out.primer_norm / x.mass + lam_m - 1.0;
    out.delta = mode == Throttle::full_on ? T(1.0) : 0.5 * (1.0 + tanh(out.s / rho));
    return out;
}

template <class T>
T hamiltonian_t(const MeeOf<T>& x, const Vec6& lam, double lam_m, const Engine& engine, double rho,
                Throttle mode, double mu = 1.0) {
    const auto fb = eval_f_b_t(x, mu);
    const auto u = control_eval_t(x, fb, lam, lam_m, engine, rho, mode);
    // lam . B alpha = -||B' lam|| at the optimal direction; keep the dot
    // product explicit so the fallback direction is also handled
    T lam_b_alpha = T(0.0);
    for (int i = 0; i < 6; ++i) {
        T bi = T(0.0);
        for (int j = 0; j < 3; ++j) bi += fb.b[i][j] * u.alpha[j];
        lam_b_alpha += lam(i) * bi;
    }
    const T thrust_term = (engine.thrust / x.mass) * u.delta * lam_b_alpha;
    return (engine.thrust / engine.c) * u.delta * (1.0 - lam_m) + lam(5) * fb.f_l + thrust_term;
}

// ---- public operations on plain states ----

inline double switching_function(const MeeState& x, const Costate& cs, const Engine& engine, double mu = 1.0) {
    if (x.mass <= 0.0) throw std::domain_error("switching_function: mass <= 0");
    const auto fb = eval_f_b_t(as_generic(x), mu);
    const auto u = control_eval_t(as_generic(x), fb, cs.lam, cs.lam_m, engine, 1.0, Throttle::full_on);
    return value_of(u.s);
}

inline ControlSample control_law(const MeeState& x, const Costate& cs, const Engine& engine, double rho,
                                 Throttle mode = Throttle::smoothed, double mu = 1.0) {
    const auto fb = eval_f_b_t(as_generic(x), mu);
    const auto u = control_eval_t(as_generic(x), fb, cs.lam, cs.lam_m, engine, rho, mode);
    ControlSample out;
    out.alpha << u.alpha[0], u.alpha[1], u.alpha[2];
    out.delta = u.delta;
    out.s_value = u.s;
    out.degenerate_primer = u.degenerate;
    return out;
}

inline double hamiltonian(const MeeState& x, const Costate& cs, const Engine& engine, double rho,
                          Throttle mode = Throttle::smoothed, double mu = 1.0) {
    return hamiltonian_t(as_generic(x), cs.lam, cs.lam_m, engine, rho, mode, mu);
}

// ---- coupled 14-dimensional state/co-state right-hand side ----
//
// layout of z: [p f g h k l m | lam(6) lam_m]

inline MeeState mee_from_z(const Vec14& z) {
    return {z(0), z(1), z(2), z(3), z(4), z(5), z(6)};
}
inline Costate costate_from_z(const Vec14& z) {
    Costate cs;
    cs.lam = z.segment<6>(7);
    cs.lam_m = z(13);
    return cs;
}
inline Vec14 pack_z(const MeeState& x, const Costate& cs) {
    Vec14 z;
    z << x.p, x.f, x.g, x.h, x.k, x.l, x.mass, cs.lam, cs.lam_m;
    return z;
}

// co-state rates are the exact gradient of the scalar Hamiltonian with
// respect to (x, m), differentiated through the control law; state rates
// are the explicit forced Gauss equations
inline Vec14 state_costate_rhs(double t, const Vec14& z, const Engine& engine, double rho,
                               Throttle mode = Throttle::smoothed, double mu = 1.0) {
    if (z(0) <= 0.0) throw DomainError("state_costate_rhs: p <= 0", t);
    if (z(6) <= 0.0) throw DomainError("state_costate_rhs: m <= 0", t);

    const MeeState x = mee_from_z(z);
    const Costate cs = costate_from_z(z);

    FbMatrices fb;
    ControlEval<double> u;
    try {
        const auto fbt = eval_f_b_t(as_generic(x), mu);
        u = control_eval_t(as_generic(x), fbt, cs.lam, cs.lam_m, engine, rho, mode);
        fb.f(5) = fbt.f_l;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 3; ++j) fb.B(i, j) = fbt.b[i][j];
    } catch (const std::domain_error& e) {
        throw DomainError(e.what(), t);
    }

    Vec14 dz;
    const Vec3 alpha(u.alpha[0], u.alpha[1], u.alpha[2]);
    dz.segment<6>(0) = fb.f + (engine.thrust / x.mass) * u.delta * (fb.B * alpha);
    dz(6) = -(engine.thrust / engine.c) * u.delta;

    using D7 = Dual<7>;
    MeeOf<D7> xd{D7::seeded(x.p, 0), D7::seeded(x.f, 1), D7::seeded(x.g, 2), D7::seeded(x.h, 3),
                 D7::seeded(x.k, 4), D7::seeded(x.l, 5), D7::seeded(x.mass, 6)};
    D7 hgrad;
    try {
        hgrad = hamiltonian_t(xd, cs.lam, cs.lam_m, engine, rho, mode, mu);
    } catch (const std::domain_error& e) {
        throw DomainError(e.what(), t);
    }
    for (int i = 0; i < 7; ++i) dz(7 + i) = -hgrad.d[i];
    return dz;
}

}  // namespace sc

#endif
