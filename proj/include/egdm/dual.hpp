#pragma once

/**
 * @file dual.hpp
 * @brief Forward-mode automatic differentiation with nestable dual numbers.
 *
 * A Dual<T> carries a value and one directional derivative. Nesting
 * (Dual<Dual<double>>) gives mixed second directional derivatives: seed the
 * inner tangent with direction b, the outer tangent with direction a, and the
 * outer tangent's inner tangent holds d²f{a,b}.
 *
 * Branching code (clamps, upwind choices, quadrature ranges) decides on
 * value_of(x), so every evaluation differentiates the branch it executes.
 */

#include <cmath>
#include <type_traits>

namespace egdm {

template <class T>
struct Dual {
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value), d(0.0) {}  // NOLINT: implicit by design of scalar promotion
  constexpr Dual(T value, T tangent) : v(value), d(tangent) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    T inv = T(1.0) / o.v;
    v *= inv;
    d = (d - v * o.d) * inv;
    return *this;
  }
};

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T> double value_of(const Dual<T>& x) { return value_of(x.v); }

/// Scalar types the model code is instantiated for.
template <class S>
concept Scalar = std::is_same_v<S, double> || is_dual<S>::value;

template <class T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }

template <class T> Dual<T> operator+(Dual<T> a, double b) { a.v += b; return a; }
template <class T> Dual<T> operator+(double b, Dual<T> a) { a.v += b; return a; }
template <class T> Dual<T> operator-(Dual<T> a, double b) { a.v -= b; return a; }
template <class T> Dual<T> operator-(double b, const Dual<T>& a) { return {b - a.v, -a.d}; }
template <class T> Dual<T> operator*(Dual<T> a, double b) { a.v *= b; a.d *= b; return a; }
template <class T> Dual<T> operator*(double b, Dual<T> a) { a.v *= b; a.d *= b; return a; }
template <class T> Dual<T> operator/(Dual<T> a, double b) { a.v /= b; a.d /= b; return a; }
template <class T> Dual<T> operator/(double b, const Dual<T>& a) {
  T inv = T(1.0) / a.v;
  T val = b * inv;
  return {val, -val * a.d * inv};
}

template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return value_of(a) < value_of(b); }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return value_of(a) > value_of(b); }
template <class T> bool operator<(const Dual<T>& a, double b) { return value_of(a) < b; }
template <class T> bool operator>(const Dual<T>& a, double b) { return value_of(a) > b; }
template <class T> bool operator<=(const Dual<T>& a, double b) { return value_of(a) <= b; }
template <class T> bool operator>=(const Dual<T>& a, double b) { return value_of(a) >= b; }

using std::exp;
using std::expm1;
using std::log;
using std::sqrt;
using std::pow;
using std::tanh;
using std::abs;

template <class T> Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, e * a.d};
}
template <class T> Dual<T> expm1(const Dual<T>& a) {
  return {expm1(a.v), exp(a.v) * a.d};
}
template <class T> Dual<T> log(const Dual<T>& a) { return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T> Dual<T> pow(const Dual<T>& a, double b) {
  T p = pow(a.v, b - 1.0);
  return {p * a.v, b * p * a.d};
}
/// a^b with both arguments active; requires a > 0.
template <class T> Dual<T> pow(const Dual<T>& a, const Dual<T>& b) { return exp(b * log(a)); }
template <class T> Dual<T> pow(double a, const Dual<T>& b) { return exp(b * std::log(a)); }
template <class T> Dual<T> tanh(const Dual<T>& a) {
  T t = tanh(a.v);
  return {t, (1.0 - t * t) * a.d};
}
/// |a| with derivative sign(a)·a' and the + branch at a = 0.
template <class T> Dual<T> abs(const Dual<T>& a) { return value_of(a) < 0.0 ? -a : a; }

/// Value, first tangent and mixed second tangent of a Dual<Dual<double>>.
struct HyperParts {
  double value;
  double d_outer;
  double d_inner;
  double d_mixed;
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

inline Dual2 make_hyper(double value, double outer, double inner, double mixed) {
  return Dual2{Dual1{value, inner}, Dual1{outer, mixed}};
}

inline HyperParts parts(const Dual2& x) { return {x.v.v, x.d.v, x.v.d, x.d.d}; }

}  // namespace egdm
