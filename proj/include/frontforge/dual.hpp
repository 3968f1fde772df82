#pragma once

// Forward-mode dual numbers with N directional slots. Nesting Dual<Dual<double, N>, N>
// yields exact second derivatives, and so on; the fixture maps are written once as
// templates on the scalar and evaluated at whatever order a computation needs.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <type_traits>

namespace frontforge {

template <typename T, int N>
struct Dual {
    using value_type = T;
    static constexpr int slots = N;

    T v{};
    std::array<T, N> d{};

    Dual() { d.fill(T(0)); }

    template <typename U>
        requires std::is_arithmetic_v<U>
    Dual(U x) : v(T(static_cast<double>(x))) {
        d.fill(T(0));
    }

    Dual(const T& x)
        requires(!std::is_arithmetic_v<T>)
        : v(x) {
        d.fill(T(0));
    }

    /// Variable seeded along slot `k`.
    static Dual variable(const T& x, int k) {
        Dual r(x);
        r.d[k] = T(1);
        return r;
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
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const T inv = T(1) / o.v;
        const T q = v * inv;
        for (int i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
        v = q;
        return *this;
    }
};

template <typename T>
struct is_dual : std::false_type {};
template <typename T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

/// Innermost double value of a (possibly nested) dual.
template <typename T>
double value_of(const T& x) {
    if constexpr (is_dual<T>::value) {
        return value_of(x.v);
    } else {
        return static_cast<double>(x);
    }
}

template <typename T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) {
    return a += b;
}
template <typename T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) {
    return a -= b;
}
template <typename T, int N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) {
    return a *= b;
}
template <typename T, int N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) {
    return a /= b;
}
template <typename T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}
template <typename T, int N>
Dual<T, N> operator+(const Dual<T, N>& a) {
    return a;
}

template <typename T, int N>
Dual<T, N> operator+(Dual<T, N> a, double b) {
    a.v += b;
    return a;
}
template <typename T, int N>
Dual<T, N> operator+(double b, Dual<T, N> a) {
    a.v += b;
    return a;
}
template <typename T, int N>
Dual<T, N> operator-(Dual<T, N> a, double b) {
    a.v -= b;
    return a;
}
template <typename T, int N>
Dual<T, N> operator-(double b, const Dual<T, N>& a) {
    return Dual<T, N>(b) - a;
}
template <typename T, int N>
Dual<T, N> operator*(Dual<T, N> a, double b) {
    a.v *= b;
    for (int i = 0; i < N; ++i) a.d[i] *= b;
    return a;
}
template <typename T, int N>
Dual<T, N> operator*(double b, Dual<T, N> a) {
    return a * b;
}
template <typename T, int N>
Dual<T, N> operator/(Dual<T, N> a, double b) {
    return a * (1.0 / b);
}
template <typename T, int N>
Dual<T, N> operator/(double b, const Dual<T, N>& a) {
    return Dual<T, N>(b) / a;
}

template <typename T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value_of(a) < value_of(b);
}
template <typename T, int N>
bool operator>(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value_of(a) > value_of(b);
}
template <typename T, int N>
bool operator<=(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value_of(a) <= value_of(b);
}
template <typename T, int N>
bool operator>=(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value_of(a) >= value_of(b);
}
template <typename T, int N>
bool operator==(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value_of(a) == value_of(b);
}
template <typename T, int N>
bool operator!=(const Dual<T, N>& a, const Dual<T, N>& b) {
    return !(a == b);
}

namespace detail {
template <typename T, int N>
Dual<T, N> chain(const Dual<T, N>& x, const T& fv, const T& dfv) {
    Dual<T, N> r(fv);
    for (int i = 0; i < N; ++i) r.d[i] = dfv * x.d[i];
    return r;
}
}  // namespace detail

template <typename T, int N>
Dual<T, N> sin(const Dual<T, N>& x) {
    using std::cos;
    using std::sin;
    return detail::chain(x, T(sin(x.v)), T(cos(x.v)));
}
template <typename T, int N>
Dual<T, N> cos(const Dual<T, N>& x) {
    using std::cos;
    using std::sin;
    return detail::chain(x, T(cos(x.v)), T(-sin(x.v)));
}
template <typename T, int N>
Dual<T, N> exp(const Dual<T, N>& x) {
    using std::exp;
    const T e = exp(x.v);
    return detail::chain(x, e, e);
}
template <typename T, int N>
Dual<T, N> log(const Dual<T, N>& x) {
    using std::log;
    return detail::chain(x, T(log(x.v)), T(T(1) / x.v));
}
template <typename T, int N>
Dual<T, N> sqrt(const Dual<T, N>& x) {
    using std::sqrt;
    const T s = sqrt(x.v);
    return detail::chain(x, s, T(T(0.5) / s));
}
template <typename T, int N>
Dual<T, N> atan(const Dual<T, N>& x) {
    using std::atan;
    return detail::chain(x, T(atan(x.v)), T(T(1) / (T(1) + x.v * x.v)));
}
template <typename T, int N>
Dual<T, N> sinh(const Dual<T, N>& x) {
    using std::cosh;
    using std::sinh;
    return detail::chain(x, T(sinh(x.v)), T(cosh(x.v)));
}
template <typename T, int N>
Dual<T, N> cosh(const Dual<T, N>& x) {
    using std::cosh;
    using std::sinh;
    return detail::chain(x, T(cosh(x.v)), T(sinh(x.v)));
}
template <typename T, int N>
Dual<T, N> tanh(const Dual<T, N>& x) {
    using std::tanh;
    const T th = tanh(x.v);
    return detail::chain(x, th, T(T(1) - th * th));
}
template <typename T, int N>
Dual<T, N> abs(const Dual<T, N>& x) {
    return value_of(x) < 0.0 ? -x : x;
}
template <typename T, int N>
Dual<T, N> abs2(const Dual<T, N>& x) {
    return x * x;
}

/// Lift a point to duals whose slot k carries d/dp_k.
template <int N, typename T>
Eigen::Matrix<Dual<T, N>, Eigen::Dynamic, 1> seed(const Eigen::Matrix<T, Eigen::Dynamic, 1>& p) {
    Eigen::Matrix<Dual<T, N>, Eigen::Dynamic, 1> out(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) out(k) = Dual<T, N>::variable(p(k), static_cast<int>(k));
    return out;
}

}  // namespace frontforge

namespace Eigen {

template <typename T, int N>
struct NumTraits<frontforge::Dual<T, N>> : GenericNumTraits<frontforge::Dual<T, N>> {
    using Real = frontforge::Dual<T, N>;
    using NonInteger = Real;
    using Nested = Real;
    using Literal = Real;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = (N + 1) * NumTraits<T>::ReadCost,
        AddCost = (N + 1) * NumTraits<T>::AddCost,
        MulCost = (2 * N + 1) * NumTraits<T>::MulCost
    };
    static Real epsilon() { return Real(NumTraits<double>::epsilon()); }
    static Real dummy_precision() { return Real(1e-12); }
    static Real highest() { return Real(NumTraits<double>::highest()); }
    static Real lowest() { return Real(NumTraits<double>::lowest()); }
    static int digits10() { return NumTraits<double>::digits10(); }
};

template <typename T, int N, typename BinOp>
struct ScalarBinaryOpTraits<frontforge::Dual<T, N>, double, BinOp> {
    using ReturnType = frontforge::Dual<T, N>;
};
template <typename T, int N, typename BinOp>
struct ScalarBinaryOpTraits<double, frontforge::Dual<T, N>, BinOp> {
    using ReturnType = frontforge::Dual<T, N>;
};

}  // namespace Eigen
