// jet.hpp: order-3 forward-mode derivatives (value plus first three u-derivatives).

#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace tfld {

// Truncated Taylor data of a smooth real function at a point: f, f', f'', f'''.
// Arithmetic follows the Leibniz/chain rules exactly, so derivatives of composite
// expressions (the form-factor family and the thermal weights) are closed-form.
struct Jet3 {
    std::array<double, 4> d{0.0, 0.0, 0.0, 0.0};

    Jet3() = default;
    explicit Jet3(double value) : d{value, 0.0, 0.0, 0.0} {}
    Jet3(double value, double d1, double d2, double d3) : d{value, d1, d2, d3} {}

    // Identity function u at the point u0.
    static Jet3 variable(double u0) { return Jet3{u0, 1.0, 0.0, 0.0}; }

    double value() const { return d[0]; }
    double deriv(std::size_t order) const { return d[order]; }
};

inline Jet3 operator+(const Jet3& a, const Jet3& b) {
    return {a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2], a.d[3] + b.d[3]};
}

inline Jet3 operator-(const Jet3& a, const Jet3& b) {
    return {a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2], a.d[3] - b.d[3]};
}

inline Jet3 operator-(const Jet3& a) { return {-a.d[0], -a.d[1], -a.d[2], -a.d[3]}; }

inline Jet3 operator*(double s, const Jet3& a) {
    return {s * a.d[0], s * a.d[1], s * a.d[2], s * a.d[3]};
}

inline Jet3 operator*(const Jet3& a, double s) { return s * a; }

inline Jet3 operator*(const Jet3& a, const Jet3& b) {
    return {a.d[0] * b.d[0],
            a.d[1] * b.d[0] + a.d[0] * b.d[1],
            a.d[2] * b.d[0] + 2.0 * a.d[1] * b.d[1] + a.d[0] * b.d[2],
            a.d[3] * b.d[0] + 3.0 * a.d[2] * b.d[1] + 3.0 * a.d[1] * b.d[2] + a.d[0] * b.d[3]};
}

// Composition f(g) given the Taylor data of f at g.value(): Faà di Bruno to order 3.
inline Jet3 compose(const std::array<double, 4>& f, const Jet3& g) {
    const double g1 = g.d[1], g2 = g.d[2], g3 = g.d[3];
    return {f[0],
            f[1] * g1,
            f[2] * g1 * g1 + f[1] * g2,
            f[3] * g1 * g1 * g1 + 3.0 * f[2] * g1 * g2 + f[1] * g3};
}

inline Jet3 exp(const Jet3& a) {
    const double e = std::exp(a.d[0]);
    return compose({e, e, e, e}, a);
}

// expm1 keeps precision of e^a - 1 near a = 0; derivatives coincide with exp.
inline Jet3 expm1(const Jet3& a) {
    const double e = std::exp(a.d[0]);
    return compose({std::expm1(a.d[0]), e, e, e}, a);
}

inline Jet3 reciprocal(const Jet3& a) {
    const double x = a.d[0];
    const double ix = 1.0 / x;
    return compose({ix, -ix * ix, 2.0 * ix * ix * ix, -6.0 * ix * ix * ix * ix}, a);
}

inline Jet3 operator/(const Jet3& a, const Jet3& b) { return a * reciprocal(b); }

inline Jet3 sqrt(const Jet3& a) {
    const double r = std::sqrt(a.d[0]);
    const double x = a.d[0];
    return compose({r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)}, a);
}

// a^p for a > 0 and arbitrary real exponent.
inline Jet3 pow(const Jet3& a, double p) {
    const double x = a.d[0];
    const double v = std::pow(x, p);
    return compose({v,
                    p * v / x,
                    p * (p - 1.0) * v / (x * x),
                    p * (p - 1.0) * (p - 2.0) * v / (x * x * x)},
                   a);
}

} // namespace tfld
