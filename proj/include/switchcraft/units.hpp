#ifndef SWITCHCRAFT_UNITS_HPP
#define SWITCHCRAFT_UNITS_HPP

#include "switchcraft/core.hpp"

namespace sc {

// Canonical unit system: tu = du^{3/2}/sqrt(mu) so that mu = 1 in
// normalized units. Heliocentric problems use du = 1 AU, Earth-bound
// problems du = equatorial radius (tu = 806.78557 s).
struct CanonicalUnits {
    double mu = 1.0;  // km^3/s^2
    double du = 1.0;  // km
    double tu = 1.0;  // s
    double vu = 1.0;  // km/s

    static CanonicalUnits from_mu_du(double mu_km3s2, double du_km) {
        CanonicalUnits u;
        u.mu = mu_km3s2;
        u.du = du_km;
        u.tu = std::sqrt(du_km * du_km * du_km / mu_km3s2);
        u.vu = u.du / u.tu;
        return u;
    }
    static CanonicalUnits heliocentric() { return from_mu_du(sun_mu_km3s2, astronomical_unit_km); }
    static CanonicalUnits geocentric() { return from_mu_du(earth_mu_km3s2, earth_radius_km); }
};

// position/velocity pair; units are whatever the caller is working in
// (normalized DU/VU internally, km and km/s at the scenario boundary)
struct CartesianState {
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();
};

// modified equinoctial elements plus mass; l is the true longitude and is
// allowed to accumulate beyond 2*pi inside trajectories so that the
// revolution count enters the terminal constraint directly
struct MeeState {
    double p = 1.0;
    double f = 0.0;
    double g = 0.0;
    double h = 0.0;
    double k = 0.0;
    double l = 0.0;
    double mass = 1.0;
};

struct TwoBodyAux {
    double w = 1.0;   // 1 + f cos l + g sin l
    double s2 = 1.0;  // 1 + h^2 + k^2
};

inline TwoBodyAux mee_aux(const MeeState& x) {
    return {1.0 + x.f * std::cos(x.l) + x.g * std::sin(x.l), 1.0 + x.h * x.h + x.k * x.k};
}

// equinoctial -> inertial. Exact inverse of cart_to_mee modulo 2*pi in l.
inline CartesianState mee_to_cart(const MeeState& x, double mu = 1.0) {
    const double w = 1.0 + x.f * std::cos(x.l) + x.g * std::sin(x.l);
    if (x.p <= 0.0) throw std::invalid_argument("mee_to_cart: p must be positive");
    if (w <= 0.0) throw std::invalid_argument("mee_to_cart: hyperbolic asymptote region (w <= 0)");

    const double s2 = 1.0 + x.h * x.h + x.k * x.k;
    const double a2 = x.h * x.h - x.k * x.k;
    const double cl = std::cos(x.l), sl = std::sin(x.l);
    const double r = x.p / w;
    const double sqmp = std::sqrt(mu / x.p);

    CartesianState out;
    out.r << (r / s2) * (cl + a2 * cl + 2.0 * x.h * x.k * sl),
             (r / s2) * (sl - a2 * sl + 2.0 * x.h * x.k * cl),
             (2.0 * r / s2) * (x.h * sl - x.k * cl);
    out.v << -(sqmp / s2) * (sl + a2 * sl - 2.0 * x.h * x.k * cl + x.g - 2.0 * x.f * x.h * x.k + a2 * x.g),
             -(sqmp / s2) * (-cl + a2 * cl + 2.0 * x.h * x.k * sl - x.f + 2.0 * x.g * x.h * x.k + a2 * x.f),
             (2.0 * sqmp / s2) * (x.h * cl + x.k * sl + x.f * x.h + x.g * x.k);
    return out;
}

// inertial -> equinoctial; l is normalized into [0, 2*pi) at conversion
// time, mass is passed through unchanged
inline MeeState cart_to_mee(const CartesianState& s, double mu = 1.0, double mass = 1.0) {
    const Vec3 hv = s.r.cross(s.v);
    const double hn = hv.norm();
    const double rn = s.r.norm();
    if (rn <= 0.0) throw std::invalid_argument("cart_to_mee: zero radius");
    if (hn <= 1e-12 * rn * s.v.norm() || hn == 0.0)
        throw std::invalid_argument("cart_to_mee: rectilinear orbit unsupported");

    const Vec3 hh = hv / hn;
    const double denom = 1.0 + hh.z();
    if (denom <= 1e-14)
        throw std::invalid_argument("cart_to_mee: retrograde equatorial orbit is singular in these elements");

    MeeState x;
    x.mass = mass;
    x.p = hn * hn / mu;
    x.h = -hh.y() / denom;
    x.k = hh.x() / denom;

    const double s2 = 1.0 + x.h * x.h + x.k * x.k;
    const Vec3 fhat((1.0 - x.k * x.k + x.h * x.h) / s2, 2.0 * x.h * x.k / s2, -2.0 * x.k / s2);
    const Vec3 ghat(2.0 * x.h * x.k / s2, (1.0 + x.k * x.k - x.h * x.h) / s2, 2.0 * x.h / s2);

    const Vec3 ev = s.v.cross(hv) / mu - s.r / rn;
    x.f = ev.dot(fhat);
    x.g = ev.dot(ghat);
    x.l = wrap_two_pi(std::atan2(s.r.dot(ghat), s.r.dot(fhat)));
    return x;
}

inline double specific_energy(const CartesianState& s, double mu = 1.0) {
    return 0.5 * s.v.squaredNorm() - mu / s.r.norm();
}

inline double orbital_period(const CartesianState& s, double mu = 1.0) {
    const double energy = specific_energy(s, mu);
    if (energy >= 0.0) throw std::invalid_argument("orbital_period: orbit is not bound");
    const double a = -mu / (2.0 * energy);
    return two_pi * std::sqrt(a * a * a / mu);
}

}  // namespace sc

#endif
