#ifndef SWITCHCRAFT_LAMBERT_HPP
#define SWITCHCRAFT_LAMBERT_HPP

#include <optional>

#include "switchcraft/kepler.hpp"
#include "switchcraft/trajectory.hpp"

namespace sc {

// multi-revolution Lambert targeting by universal variables: roots of the
// time-of-flight function t(z), with z confined to ((2 pi N)^2, (2 pi (N+1))^2)
// for N full revolutions. Each N >= 1 admits a left and a right solution
// around the minimum-time point; N = 0 has a single root.
enum class LambertBranch { short_way, long_way, left, right };

struct LambertSolution {
    Vec3 v1, v2;
    int n_rev = 0;
    bool long_way = false;
    LambertBranch branch = LambertBranch::short_way;
};

namespace lambert_detail {

struct Geometry {
    double r1, r2, A;
    Vec3 rv1, rv2;
    double mu;
};

inline Geometry make_geometry(const Vec3& r1, const Vec3& r2, bool long_way, double mu) {
    Geometry g{r1.norm(), r2.norm(), 0.0, r1, r2, mu};
    const double cross_n = r1.cross(r2).norm();
    const double cos_dth = std::clamp(r1.dot(r2) / (g.r1 * g.r2), -1.0, 1.0);
    if (cross_n < 1e-11 * g.r1 * g.r2 && cos_dth < 0.0)
        throw std::invalid_argument("lambert: transfer angle of pi leaves the plane undefined");
    if (cross_n < 1e-11 * g.r1 * g.r2 && cos_dth > 0.0)
        throw std::invalid_argument("lambert: zero transfer angle");
    double dth = std::acos(cos_dth);
    if (long_way) dth = two_pi - dth;
    g.A = std::sin(dth) * std::sqrt(g.r1 * g.r2 / (1.0 - std::cos(dth)));
    return g;
}

inline double y_of_z(const Geometry& g, double z) {
    return g.r1 + g.r2 + g.A * (z * stumpff_s(z) - 1.0) / std::sqrt(stumpff_c(z));
}

inline double tof_of_z(const Geometry& g, double z) {
    const double y = y_of_z(g, z);
    if (y <= 0.0) return std::numeric_limits<double>::infinity();
    const double c = stumpff_c(z);
    const double chi2 = y / c;
    return (std::pow(chi2, 1.5) * stumpff_s(z) + g.A * std::sqrt(y)) / std::sqrt(g.mu);
}

inline LambertSolution assemble(const Geometry& g, double z, int n_rev, bool long_way,
                                LambertBranch branch) {
    const double y = y_of_z(g, z);
    const double f = 1.0 - y / g.r1;
    const double gg = g.A * std::sqrt(y / g.mu);
    const double gdot = 1.0 - y / g.r2;
    LambertSolution out;
    out.v1 = (g.rv2 - f * g.rv1) / gg;
    out.v2 = (gdot * g.rv2 - g.rv1) / gg;
    out.n_rev = n_rev;
    out.long_way = long_way;
    out.branch = branch;
    return out;
}

inline std::optional<double> root_in(const Geometry& g, double z_lo, double z_hi, double tof) {
    auto fn = [&](double z) { return tof_of_z(g, z) - tof; };
    double f_lo = fn(z_lo), f_hi = fn(z_hi);
    if (!std::isfinite(f_lo)) {
        // shrink away from an infeasible (y <= 0) left edge
        for (int i = 0; i < 60 && !std::isfinite(f_lo); ++i) {
            z_lo = 0.5 * (z_lo + z_hi);
            f_lo = fn(z_lo);
        }
    }
    if (!std::isfinite(f_lo) || !std::isfinite(f_hi)) return std::nullopt;
    if ((f_lo < 0.0) == (f_hi < 0.0)) return std::nullopt;
    return detail::refine_root(fn, z_lo, z_hi, f_lo, f_hi, 1e-12 * std::max(1.0, std::abs(z_hi)),
                               1e-12 * tof);
}

}  // namespace lambert_detail

// solves the two-body boundary value problem r1 -> r2 in tof with n_rev
// complete revolutions. long_way selects a transfer angle above pi. For
// n_rev >= 1 the branch must be left or right; for n_rev = 0 it is ignored.
inline std::optional<LambertSolution> solve_lambert(const Vec3& r1, const Vec3& r2, double tof,
                                                    int n_rev, LambertBranch branch, double mu,
                                                    bool long_way = false) {
    using namespace lambert_detail;
    if (tof <= 0.0) throw std::invalid_argument("lambert: tof must be positive");
    if (branch == LambertBranch::long_way) long_way = true;
    const Geometry g = make_geometry(r1, r2, long_way, mu);

    if (n_rev == 0) {
        double z_lo = -4.0 * two_pi, z_hi = two_pi * two_pi * 0.999;
        // expand toward the hyperbolic side until the tof is bracketed
        for (int i = 0; i < 40 && tof_of_z(g, z_lo) > tof; ++i) z_lo *= 2.0;
        const auto z = root_in(g, z_lo, z_hi, tof);
        if (!z) return std::nullopt;
        return assemble(g, *z, 0, long_way, long_way ? LambertBranch::long_way : LambertBranch::short_way);
    }

    if (branch != LambertBranch::left && branch != LambertBranch::right)
        throw std::invalid_argument("lambert: multi-revolution transfers need the left or right branch");

    const double z_lo = std::pow(two_pi * n_rev, 2) * (1.0 + 1e-9);
    const double z_hi = std::pow(two_pi * (n_rev + 1), 2) * (1.0 - 1e-9);
    const double z_star = detail::minimize_scalar([&](double z) { return tof_of_z(g, z); }, z_lo, z_hi,
                                                  1e-10 * z_hi);
    if (tof_of_z(g, z_star) > tof) return std::nullopt;  // this revolution count is too slow

    const auto z = branch == LambertBranch::left ? root_in(g, z_lo, z_star, tof)
                                                 : root_in(g, z_star, z_hi, tof);
    if (!z) return std::nullopt;
    return assemble(g, *z, n_rev, long_way, branch);
}

// every solution for the given geometry and tof over all feasible
// revolution counts: exactly 2 N_max + 1 entries
inline std::vector<LambertSolution> enumerate_lambert(const Vec3& r1, const Vec3& r2, double tof,
                                                      double mu, bool long_way = false,
                                                      int n_rev_cap = 64) {
    std::vector<LambertSolution> out;
    if (auto s = solve_lambert(r1, r2, tof, 0, long_way ? LambertBranch::long_way : LambertBranch::short_way, mu, long_way))
        out.push_back(*s);
    for (int n = 1; n <= n_rev_cap; ++n) {
        auto l = solve_lambert(r1, r2, tof, n, LambertBranch::left, mu, long_way);
        auto r = solve_lambert(r1, r2, tof, n, LambertBranch::right, mu, long_way);
        if (!l && !r) break;
        if (l) out.push_back(*l);
        if (r) out.push_back(*r);
    }
    return out;
}

// true when the prograde (+z angular momentum) transfer from r1 to r2
// spans more than pi
inline bool prograde_long_way(const Vec3& r1, const Vec3& r2) { return r1.cross(r2).z() < 0.0; }

}  // namespace sc

#endif
