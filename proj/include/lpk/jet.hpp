#pragma once

#include <array>
#include <cmath>

namespace lpk {

/// Truncated Taylor series f(t0 + e) = sum_k c[k] e^k, used to get exact derivatives of the
/// smooth cutoffs without finite differences.
struct Jet {
    static constexpr int order = 12;
    std::array<double, order + 1> c{};

    static Jet constant(double v)
    {
        Jet j;
        j.c[0] = v;
        return j;
    }

    static Jet variable(double t0)
    {
        Jet j;
        j.c[0] = t0;
        j.c[1] = 1.0;
        return j;
    }

    double value() const { return c[0]; }

    /// k-th derivative at the expansion point.
    double derivative(int k) const
    {
        double fact = 1.0;
        for (int i = 2; i <= k; ++i) fact *= i;
        return c[k] * fact;
    }
};

inline Jet operator+(Jet a, const Jet& b)
{
    for (int k = 0; k <= Jet::order; ++k) a.c[k] += b.c[k];
    return a;
}

inline Jet operator-(Jet a, const Jet& b)
{
    for (int k = 0; k <= Jet::order; ++k) a.c[k] -= b.c[k];
    return a;
}

inline Jet operator*(double s, Jet a)
{
    for (auto& v : a.c) v *= s;
    return a;
}

inline Jet operator+(double s, Jet a)
{
    a.c[0] += s;
    return a;
}

inline Jet operator*(const Jet& a, const Jet& b)
{
    Jet r;
    for (int k = 0; k <= Jet::order; ++k) {
        double s = 0.0;
        for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
        r.c[k] = s;
    }
    return r;
}

inline Jet operator/(const Jet& a, const Jet& b)
{
    Jet r;
    for (int k = 0; k <= Jet::order; ++k) {
        double s = a.c[k];
        for (int i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
        r.c[k] = s / b.c[0];
    }
    return r;
}

inline Jet exp(const Jet& a)
{
    Jet r;
    r.c[0] = std::exp(a.c[0]);
    // r' = a' r  =>  k r_k = sum_{i=1..k} i a_i r_{k-i}
    for (int k = 1; k <= Jet::order; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += i * a.c[i] * r.c[k - i];
        r.c[k] = s / k;
    }
    return r;
}

/// a^p for a.c[0] > 0.
inline Jet pow(const Jet& a, double p)
{
    Jet r;
    r.c[0] = std::pow(a.c[0], p);
    // a r' = p a' r  =>  sum_i a_i (k-i) r_{k-i} = p sum_i i a_i r_{k-i}
    for (int k = 1; k <= Jet::order; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += (p * i - (k - i)) * a.c[i] * r.c[k - i];
        r.c[k] = s / (k * a.c[0]);
    }
    return r;
}

} // namespace lpk
