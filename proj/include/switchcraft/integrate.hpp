#ifndef SWITCHCRAFT_INTEGRATE_HPP
#define SWITCHCRAFT_INTEGRATE_HPP

#include <functional>
#include <vector>

#include "switchcraft/core.hpp"

namespace sc {

// Dormand-Prince 5(4) embedded pair with PI step-size control and the
// classical 4th-order dense-output interpolant (Hairer's rcont form).
namespace dopri5 {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// difference between the 5th- and 4th-order weights, used for the error estimate
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// dense-output coefficients
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace dopri5

template <int N>
struct DenseStep {
    double t0, h;
    Eigen::Matrix<double, N, 1> r1, r2, r3, r4, r5;

    Eigen::Matrix<double, N, 1> eval(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
};

// piecewise interpolant over the accepted steps of one integration
template <int N>
class DenseOutput {
public:
    using Vec = Eigen::Matrix<double, N, 1>;

    void reserve(std::size_t n) { steps_.reserve(n); }
    void push(const DenseStep<N>& s) { steps_.push_back(s); }
    bool empty() const { return steps_.empty(); }
    std::size_t size() const { return steps_.size(); }
    const DenseStep<N>& step(std::size_t i) const { return steps_[i]; }
    double t_begin() const { return steps_.front().t0; }
    double t_end() const { return steps_.back().t0 + steps_.back().h; }

    Vec eval(double t) const {
        const auto& s = steps_[locate(t)];
        return s.eval(t);
    }

    std::size_t locate(double t) const {
        std::size_t lo = 0, hi = steps_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (steps_[mid].t0 <= t)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

private:
    std::vector<DenseStep<N>> steps_;
};

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_init = 0.0;    // 0: choose automatically
    double h_max = 0.0;     // 0: span / 2
    std::size_t max_steps = 2'000'000;
    bool want_dense = false;
};

template <int N>
struct IntegrateResult {
    Eigen::Matrix<double, N, 1> y;
    double t = 0.0;
    std::size_t n_steps = 0;
    std::size_t n_rejected = 0;
    DenseOutput<N> dense;
};

// integrates y' = f(t, y) from t0 to tf (tf > t0). The RHS may throw
// DomainError; it propagates with the failure time attached.
template <int N, class Rhs>
IntegrateResult<N> integrate_dopri5(Rhs&& rhs, const Eigen::Matrix<double, N, 1>& y0, double t0,
                                    double tf, const IntegrateOptions& opt = {}) {
    using Vec = Eigen::Matrix<double, N, 1>;
    using namespace dopri5;

    const double span = tf - t0;
    if (span <= 0.0) throw std::invalid_argument("integrate_dopri5: tf must exceed t0");
    const double hmax = opt.h_max > 0.0 ? opt.h_max : 0.5 * span;

    IntegrateResult<N> res;
    res.y = y0;
    res.t = t0;
    if (opt.want_dense) res.dense.reserve(1024);

    Vec k1 = rhs(t0, res.y);
    double h = opt.h_init;
    if (h <= 0.0) {
        // crude but serviceable first guess, immediately corrected by the controller
        const double d0 = res.y.cwiseAbs().maxCoeff() + 1.0;
        const double d1n = k1.cwiseAbs().maxCoeff() + 1e-12;
        h = std::min({0.01 * d0 / d1n, hmax, span});
    }

    double err_prev = 1.0;
    const double safety = 0.9, beta = 0.04, expo = 0.2 - beta * 0.75;

    while (res.t < tf) {
        if (res.n_steps + res.n_rejected > opt.max_steps)
            throw SolveError("integrate_dopri5: step budget exhausted");
        h = std::min(h, tf - res.t);
        if (h < 1e-14 * std::max(1.0, std::abs(res.t)))
            throw DomainError("integrate_dopri5: step size underflow", res.t);

        const double t = res.t;
        const Vec& y = res.y;
        bool domain_ok = true;
        Vec k2, k3, k4, k5, k6, k7, y5;
        try {
            k2 = rhs(t + c2 * h, y + h * (a21 * k1));
            k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
            k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            y5 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            k7 = rhs(t + h, y5);
        } catch (const DomainError&) {
            // an internal stage left the domain: retry with a smaller step,
            // rethrow only when the step is already tiny
            domain_ok = false;
            if (h < 64.0 * 1e-14 * std::max(1.0, std::abs(res.t))) throw;
        }
        if (!domain_ok) {
            h *= 0.25;
            ++res.n_rejected;
            continue;
        }

        const Vec ev = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
            const double r = ev(i) / sc;
            err += r * r;
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            if (opt.want_dense) {
                DenseStep<N> ds;
                ds.t0 = t;
                ds.h = h;
                ds.r1 = y;
                ds.r2 = y5 - y;
                ds.r3 = h * k1 - ds.r2;
                ds.r4 = ds.r2 - h * k7 - ds.r3;
                ds.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                res.dense.push(ds);
            }
            res.t = t + h;
            res.y = y5;
            k1 = k7;  // FSAL
            ++res.n_steps;
            const double fac =
                safety * std::pow(err > 0.0 ? err : 1e-10, -expo) * std::pow(err_prev, beta);
            h = std::min(hmax, h * std::min(5.0, std::max(0.2, fac)));
            err_prev = std::max(err, 1e-4);
        } else {
            ++res.n_rejected;
            h *= std::max(0.1, safety * std::pow(err, -0.2));
        }
    }
    return res;
}

}  // namespace sc

#endif
