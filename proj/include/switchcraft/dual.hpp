#ifndef SWITCHCRAFT_DUAL_HPP
#define SWITCHCRAFT_DUAL_HPP

#include <array>
#include <cmath>

namespace sc {

// forward-mode dual number carrying N derivative lanes; used to evaluate
// exact gradients of the Hamiltonian with respect to the state variables
template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double value) : v(value) { d.fill(0.0); }  // NOLINT: implicit by design
    static Dual seeded(double value, int lane) {
        Dual x(value);
        x.d[lane] = 1.0;
        return x;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
};

template <int N> inline Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <int N> inline Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <int N> inline Dual<N> operator-(const Dual<N>& a) {
    Dual<N> r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}

template <int N> inline Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r;
    r.v = a.v * b.v;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
template <int N> inline Dual<N> operator*(double s, const Dual<N>& a) {
    Dual<N> r;
    r.v = s * a.v;
    for (int i = 0; i < N; ++i) r.d[i] = s * a.d[i];
    return r;
}
template <int N> inline Dual<N> operator*(const Dual<N>& a, double s) { return s * a; }

template <int N> inline Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r;
    const double inv = 1.0 / b.v;
    r.v = a.v * inv;
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
}
template <int N> inline Dual<N> operator/(double s, const Dual<N>& b) { return Dual<N>(s) / b; }
template <int N> inline Dual<N> operator/(const Dual<N>& a, double s) { return a * (1.0 / s); }
template <int N> inline Dual<N> operator+(double s, Dual<N> a) { a.v += s; return a; }
template <int N> inline Dual<N> operator+(Dual<N> a, double s) { a.v += s; return a; }
template <int N> inline Dual<N> operator-(double s, const Dual<N>& a) { return Dual<N>(s) - a; }
template <int N> inline Dual<N> operator-(Dual<N> a, double s) { a.v -= s; return a; }

template <int N> inline Dual<N> sqrt(const Dual<N>& a) {
    Dual<N> r;
    r.v = std::sqrt(a.v);
    const double f = 0.5 / r.v;
    for (int i = 0; i < N; ++i) r.d[i] = f * a.d[i];
    return r;
}
template <int N> inline Dual<N> sin(const Dual<N>& a) {
    Dual<N> r;
    r.v = std::sin(a.v);
    const double c = std::cos(a.v);
    for (int i = 0; i < N; ++i) r.d[i] = c * a.d[i];
    return r;
}
template <int N> inline Dual<N> cos(const Dual<N>& a) {
    Dual<N> r;
    r.v = std::cos(a.v);
    const double s = -std::sin(a.v);
    for (int i = 0; i < N; ++i) r.d[i] = s * a.d[i];
    return r;
}
template <int N> inline Dual<N> tanh(const Dual<N>& a) {
    Dual<N> r;
    r.v = std::tanh(a.v);
    const double f = 1.0 - r.v * r.v;
    for (int i = 0; i < N; ++i) r.d[i] = f * a.d[i];
    return r;
}

// adl-friendly helpers so templated code works for double and Dual alike
using std::cos;
using std::sin;
using std::sqrt;
using std::tanh;

inline double value_of(double x) { return x; }
template <int N> inline double value_of(const Dual<N>& x) { return x.v; }

}  // namespace sc

#endif
