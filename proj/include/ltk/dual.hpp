#pragma once

// Forward-mode dual scalars.  Dual<T> carries a value and one directional
// derivative; nesting Dual<Dual<double>> gives exact mixed second
// derivatives where a Hamiltonian is itself built from derivatives.

#include <Eigen/Core>

#include <cmath>
#include <type_traits>

namespace ltk {

template <class T>
struct Dual;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

/// Nesting depth: 0 for double, 1 for Dual<double>, ...
template <class T>
struct dual_depth : std::integral_constant<int, 0> {};
template <class T>
struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};

template <class T>
inline constexpr int dual_depth_v = dual_depth<T>::value;

template <class T>
struct Dual {
  T val{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v), eps(0.0) {}  // NOLINT: implicit lift of constants
  constexpr Dual(T v, T e)
    requires(!std::is_same_v<T, double>)
      : val(std::move(v)), eps(std::move(e)) {}
  constexpr Dual(double v, double e)
    requires std::is_same_v<T, double>
      : val(v), eps(e) {}
  explicit constexpr Dual(const T& v)
    requires(!std::is_same_v<T, double>)
      : val(v), eps(0.0) {}

  Dual& operator+=(const Dual& o) {
    val += o.val;
    eps += o.eps;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    eps -= o.eps;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    eps = eps * o.val + val * o.eps;
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    T q = val / o.val;
    eps = (eps - q * o.eps) / o.val;
    val = q;
    return *this;
  }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

/// Innermost real value of a (possibly nested) dual.
inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.val);
}

template <class T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) {
  return a += b;
}
template <class T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) {
  return a -= b;
}
template <class T>
Dual<T> operator*(Dual<T> a, const Dual<T>& b) {
  return a *= b;
}
template <class T>
Dual<T> operator/(Dual<T> a, const Dual<T>& b) {
  return a /= b;
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
  Dual<T> r;
  r.val = -a.val;
  r.eps = -a.eps;
  return r;
}
template <class T>
Dual<T> operator+(const Dual<T>& a) {
  return a;
}

// Mixed arithmetic with plain constants.
template <class T>
Dual<T> operator+(Dual<T> a, double b) {
  a.val += b;
  return a;
}
template <class T>
Dual<T> operator+(double a, Dual<T> b) {
  b.val += a;
  return b;
}
template <class T>
Dual<T> operator-(Dual<T> a, double b) {
  a.val -= b;
  return a;
}
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) {
  return Dual<T>(a) - b;
}
template <class T>
Dual<T> operator*(Dual<T> a, double b) {
  a.val *= b;
  a.eps *= b;
  return a;
}
template <class T>
Dual<T> operator*(double a, Dual<T> b) {
  return b * a;
}
template <class T>
Dual<T> operator/(Dual<T> a, double b) {
  a.val /= b;
  a.eps /= b;
  return a;
}
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) {
  return Dual<T>(a) / b;
}

// Comparisons act on the real value; they only steer control flow
// (branches, domain checks) and never carry derivative information.
template <class T>
bool operator<(const Dual<T>& a, const Dual<T>& b) {
  return value_of(a) < value_of(b);
}
template <class T>
bool operator>(const Dual<T>& a, const Dual<T>& b) {
  return value_of(a) > value_of(b);
}
template <class T>
bool operator==(const Dual<T>& a, const Dual<T>& b) {
  return a.val == b.val && a.eps == b.eps;
}

template <class T>
Dual<T> exp(const Dual<T>& x) {
  using std::exp;
  T e = exp(x.val);
  return Dual<T>(e, x.eps * e);
}
template <class T>
Dual<T> log(const Dual<T>& x) {
  using std::log;
  return Dual<T>(log(x.val), x.eps / x.val);
}
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  T s = sqrt(x.val);
  return Dual<T>(s, x.eps / (2.0 * s));
}
template <class T>
Dual<T> sin(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return Dual<T>(sin(x.val), x.eps * cos(x.val));
}
template <class T>
Dual<T> cos(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return Dual<T>(cos(x.val), -(x.eps * sin(x.val)));
}
template <class T>
Dual<T> abs(const Dual<T>& x) {
  return value_of(x) < 0.0 ? -x : x;
}
/// Real exponent; base must be positive unless the exponent is integral.
template <class T>
Dual<T> pow(const Dual<T>& x, double a) {
  using std::pow;
  return Dual<T>(pow(x.val, a), x.eps * (a * pow(x.val, a - 1.0)));
}
template <class T>
Dual<T> pow(const Dual<T>& x, const Dual<T>& a) {
  return exp(a * log(x));
}

/// x^n by repeated squaring; exact derivative at x = 0 for n >= 1.
template <class T>
T ipow(T x, long n) {
  if (n < 0) return T(1.0) / ipow(x, -n);
  T r(1.0);
  while (n > 0) {
    if (n & 1) r = r * x;
    x = x * x;
    n >>= 1;
  }
  return r;
}

template <class T>
bool isfinite(const Dual<T>& x) {
  using std::isfinite;
  return isfinite(x.val) && isfinite(x.eps);
}

}  // namespace ltk

namespace Eigen {

template <class T>
struct NumTraits<ltk::Dual<T>> : NumTraits<double> {
  using Real = ltk::Dual<T>;
  using NonInteger = ltk::Dual<T>;
  using Nested = ltk::Dual<T>;
  using Literal = ltk::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2 * NumTraits<T>::ReadCost,
    AddCost = 2 * NumTraits<T>::AddCost,
    MulCost = 3 * NumTraits<T>::MulCost
  };
};

}  // namespace Eigen
