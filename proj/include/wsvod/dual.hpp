#pragma once

#include <array>
#include <cmath>

namespace wsvod {

// Forward-mode dual number carrying N partial derivatives. Only the
// operations the box losses need.
template <int N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    explicit Dual(double value) : v(value) { d.fill(0.0); }

    static Dual var(double value, int slot) {
        Dual r(value);
        r.d[slot] = 1.0;
        return r;
    }

    Dual operator-() const {
        Dual r(-v);
        for (int i = 0; i < N; ++i) r.d[i] = -d[i];
        return r;
    }

    friend Dual operator+(const Dual& a, const Dual& b) {
        Dual r(a.v + b.v);
        for (int i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
        return r;
    }
    friend Dual operator-(const Dual& a, const Dual& b) {
        Dual r(a.v - b.v);
        for (int i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
        return r;
    }
    friend Dual operator*(const Dual& a, const Dual& b) {
        Dual r(a.v * b.v);
        for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
        return r;
    }
    friend Dual operator/(const Dual& a, const Dual& b) {
        Dual r(a.v / b.v);
        const double inv2 = 1.0 / (b.v * b.v);
        for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
        return r;
    }

    friend Dual operator+(const Dual& a, double b) { return a + Dual(b); }
    friend Dual operator+(double a, const Dual& b) { return Dual(a) + b; }
    friend Dual operator-(const Dual& a, double b) { return a - Dual(b); }
    friend Dual operator-(double a, const Dual& b) { return Dual(a) - b; }
    friend Dual operator*(const Dual& a, double b) { return a * Dual(b); }
    friend Dual operator*(double a, const Dual& b) { return Dual(a) * b; }
    friend Dual operator/(const Dual& a, double b) { return a / Dual(b); }
    friend Dual operator/(double a, const Dual& b) { return Dual(a) / b; }
};

template <int N>
Dual<N> sqrt(const Dual<N>& a) {
    Dual<N> r(std::sqrt(a.v));
    const double s = 0.5 / r.v;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * s;
    return r;
}

template <int N>
Dual<N> exp(const Dual<N>& a) {
    Dual<N> r(std::exp(a.v));
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * r.v;
    return r;
}

template <int N>
Dual<N> atan(const Dual<N>& a) {
    Dual<N> r(std::atan(a.v));
    const double s = 1.0 / (1.0 + a.v * a.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * s;
    return r;
}

template <int N>
Dual<N> logistic(const Dual<N>& a) {
    double s;
    if (a.v >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-a.v));
    } else {
        const double e = std::exp(a.v);
        s = e / (1.0 + e);
    }
    Dual<N> r(s);
    const double ds = s * (1.0 - s);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * ds;
    return r;
}

// max/min select by value; derivative follows the winning branch.
template <int N>
Dual<N> max(const Dual<N>& a, const Dual<N>& b) {
    return a.v >= b.v ? a : b;
}
template <int N>
Dual<N> min(const Dual<N>& a, const Dual<N>& b) {
    return a.v <= b.v ? a : b;
}
template <int N>
Dual<N> max(const Dual<N>& a, double b) {
    return max(a, Dual<N>(b));
}
template <int N>
Dual<N> min(const Dual<N>& a, double b) {
    return min(a, Dual<N>(b));
}

}  // namespace wsvod
