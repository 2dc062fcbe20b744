#ifndef SWITCHCRAFT_KEPLER_HPP
#define SWITCHCRAFT_KEPLER_HPP

#include "switchcraft/units.hpp"

namespace sc {

// Stumpff functions with series expansion near zero
inline double stumpff_c(double z) {
    if (std::abs(z) < 1e-7) return 0.5 - z / 24.0 + z * z / 720.0;
    if (z > 0.0) return (1.0 - std::cos(std::sqrt(z))) / z;
    const double s = std::sqrt(-z);
    return (std::cosh(s) - 1.0) / (-z);
}

inline double stumpff_s(double z) {
    if (std::abs(z) < 1e-7) return 1.0 / 6.0 - z / 120.0 + z * z / 5040.0;
    if (z > 0.0) {
        const double s = std::sqrt(z);
        return (s - std::sin(s)) / (s * s * s);
    }
    const double s = std::sqrt(-z);
    return (std::sinh(s) - s) / (s * s * s);
}

// Ballistic two-body propagation by universal variables (Battin/Vallado
// formulation); handles elliptic and hyperbolic arcs and negative dt.
inline CartesianState kepler_propagate(const CartesianState& s0, double dt, double mu = 1.0) {
    if (dt == 0.0) return s0;
    const double r0 = s0.r.norm();
    const double vr0 = s0.r.dot(s0.v) / r0;
    const double alpha = 2.0 / r0 - s0.v.squaredNorm() / mu;  // 1/a
    const double sqmu = std::sqrt(mu);

    double chi = sqmu * std::abs(alpha) > 1e-12 ? sqmu * dt * alpha : sqmu * dt / r0;
    if (std::abs(alpha) <= 1e-12) chi = sqmu * dt / r0;  // near-parabolic start

    double r = r0;
    bool converged = false;
    for (int it = 0; it < 80; ++it) {
        const double z = alpha * chi * chi;
        const double c = stumpff_c(z), s = stumpff_s(z);
        const double tof = (r0 * vr0 / sqmu) * chi * chi * c + (1.0 - alpha * r0) * chi * chi * chi * s + r0 * chi;
        r = r0 * vr0 / sqmu * chi * (1.0 - z * s) + (1.0 - alpha * r0) * chi * chi * c + r0;
        const double df = tof - sqmu * dt;
        if (std::abs(df) < 1e-12 * (std::abs(sqmu * dt) + 1.0)) {
            converged = true;
            break;
        }
        chi -= df / r;
    }
    if (!converged) throw SolveError("kepler_propagate: universal-variable iteration stalled");

    const double z = alpha * chi * chi;
    const double c = stumpff_c(z), s = stumpff_s(z);
    const double f = 1.0 - chi * chi * c / r0;
    const double g = dt - chi * chi * chi * s / sqmu;
    const double fdot = sqmu / (r * r0) * chi * (z * s - 1.0);
    const double gdot = 1.0 - chi * chi * c / r;

    CartesianState out;
    out.r = f * s0.r + g * s0.v;
    out.v = fdot * s0.r + gdot * s0.v;
    return out;
}

// classical Keplerian elements; angles in radians
struct ClassicalElements {
    double a;      // semi-major axis
    double e;
    double i;
    double raan;
    double argp;
    double mean_anomaly;
};

inline double solve_kepler_equation(double mean_anomaly, double e) {
    double m = std::fmod(mean_anomaly, two_pi);
    if (m < 0.0) m += two_pi;
    double E = e < 0.8 ? m : pi;
    for (int it = 0; it < 60; ++it) {
        const double dE = (E - e * std::sin(E) - m) / (1.0 - e * std::cos(E));
        E -= dE;
        if (std::abs(dE) < 1e-14) break;
    }
    return E;
}

inline CartesianState elements_to_cart(const ClassicalElements& el, double mu) {
    const double E = solve_kepler_equation(el.mean_anomaly, el.e);
    const double cE = std::cos(E), sE = std::sin(E);
    const double r = el.a * (1.0 - el.e * cE);
    const double xp = el.a * (cE - el.e);
    const double yp = el.a * std::sqrt(1.0 - el.e * el.e) * sE;
    const double n = std::sqrt(mu / (el.a * el.a * el.a));
    const double vxp = -el.a * n * sE / (1.0 - el.e * cE);
    const double vyp = el.a * n * std::sqrt(1.0 - el.e * el.e) * cE / (1.0 - el.e * cE);

    const double cO = std::cos(el.raan), sO = std::sin(el.raan);
    const double co = std::cos(el.argp), so = std::sin(el.argp);
    const double ci = std::cos(el.i), si = std::sin(el.i);
    Mat3 rot;
    rot << cO * co - sO * so * ci, -cO * so - sO * co * ci, sO * si,
           sO * co + cO * so * ci, -sO * so + cO * co * ci, -cO * si,
           so * si, co * si, ci;

    CartesianState out;
    out.r = rot * Vec3(xp, yp, 0.0);
    out.v = rot * Vec3(vxp, vyp, 0.0);
    (void)r;
    return out;
}

}  // namespace sc

#endif
