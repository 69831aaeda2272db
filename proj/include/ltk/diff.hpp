#pragma once

// Scalar functions that can be evaluated over plain reals or nested dual
// scalars, with an exact forward-mode gradient and an independent
// central-difference oracle.

#include <ltk/dual.hpp>
#include <ltk/errors.hpp>

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>

namespace ltk {

template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Eigen::Index;
using Eigen::VectorXd;

/// Scalar types a ScalarFn can be evaluated over.
template <class T>
concept FieldScalar = std::is_same_v<T, double> || std::is_same_v<T, D1> ||
                      std::is_same_v<T, D2> || std::is_same_v<T, D3>;

/// Deepest scalar a nested gradient may be requested over.
inline constexpr int kMaxGradDepth = 2;

class ScalarFn {
 public:
  enum class Origin { builtin, expression, derived };

  ScalarFn() = default;

  /// Wraps a generic callable `f(const Vec<T>&) -> T` instantiable for every
  /// FieldScalar T.
  template <class F>
  ScalarFn(Index dim, F f, Origin origin = Origin::builtin, std::string name = {})
      : impl_(std::make_shared<Model<F>>(std::move(f))),
        dim_(dim),
        origin_(origin),
        name_(std::move(name)) {}

  template <FieldScalar T>
  T operator()(const Vec<T>& x) const {
    if (!impl_) throw Error("evaluating an empty ScalarFn");
    if (x.size() != dim_)
      throw DimensionError("ScalarFn '" + name_ + "' expects dimension " + std::to_string(dim_) +
                           ", got " + std::to_string(x.size()));
    return impl_->eval(x);
  }

  Index dim() const { return dim_; }
  Origin origin() const { return origin_; }
  const std::string& name() const { return name_; }
  explicit operator bool() const { return static_cast<bool>(impl_); }

  ScalarFn renamed(std::string name) const {
    ScalarFn r = *this;
    r.name_ = std::move(name);
    return r;
  }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual double eval(const Vec<double>& x) const = 0;
    virtual D1 eval(const Vec<D1>& x) const = 0;
    virtual D2 eval(const Vec<D2>& x) const = 0;
    virtual D3 eval(const Vec<D3>& x) const = 0;
  };

  template <class F>
  struct Model final : Concept {
    explicit Model(F f) : f(std::move(f)) {}
    double eval(const Vec<double>& x) const override { return f(x); }
    D1 eval(const Vec<D1>& x) const override { return f(x); }
    D2 eval(const Vec<D2>& x) const override { return f(x); }
    D3 eval(const Vec<D3>& x) const override { return f(x); }
    F f;
  };

  std::shared_ptr<const Concept> impl_;
  Index dim_ = 0;
  Origin origin_ = Origin::builtin;
  std::string name_;
};

/// Scalar type of an Eigen vector argument inside a generic lambda.
template <class V>
using scalar_of = typename std::decay_t<V>::Scalar;

template <FieldScalar T>
Vec<T> lift(const VectorXd& x) {
  Vec<T> r(x.size());
  for (Index i = 0; i < x.size(); ++i) r[i] = T(x[i]);
  return r;
}

inline VectorXd values_of(const VectorXd& x) { return x; }
template <class T>
VectorXd values_of(const Vec<T>& x) {
  VectorXd r(x.size());
  for (Index i = 0; i < x.size(); ++i) r[i] = value_of(x[i]);
  return r;
}

/// Exact gradient over scalar T, one directional dual pass per coordinate.
/// Also returns the function value through `value` when non-null.
template <FieldScalar T>
Vec<T> grad(const ScalarFn& f, const Vec<T>& x, T* value = nullptr) {
  if constexpr (dual_depth_v<T> > kMaxGradDepth) {
    (void)f;
    (void)x;
    (void)value;
    throw DomainError("derivative nesting deeper than supported scalar depth");
  } else {
    using DT = Dual<T>;
    Vec<DT> xd(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      xd[i].val = x[i];
      xd[i].eps = T(0.0);
    }
    Vec<T> g(x.size());
    if (x.size() == 0 && value) *value = f(x);
    for (Index i = 0; i < x.size(); ++i) {
      xd[i].eps = T(1.0);
      DT r = f(xd);
      g[i] = r.eps;
      if (i == 0 && value) *value = r.val;
      xd[i].eps = T(0.0);
    }
    return g;
  }
}

inline VectorXd grad(const ScalarFn& f, const VectorXd& x) { return grad<double>(f, x); }

/// Default central-difference step for coordinate value xi.
inline double fd_step(double xi) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(xi));
}

/// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h with a fixed step h.
VectorXd fd_grad(const ScalarFn& f, const VectorXd& x, double h);

/// Central differences with the per-coordinate default step.
VectorXd fd_grad(const ScalarFn& f, const VectorXd& x);

/// Adds a set of functions of equal dimension.
ScalarFn sum(const std::vector<ScalarFn>& terms, std::string name = {});

/// Pointwise product.
ScalarFn product(const ScalarFn& a, const ScalarFn& b, std::string name = {});

/// a + c*b with constant c.
ScalarFn axpy(const ScalarFn& a, double c, const ScalarFn& b, std::string name = {});

/// Constant function of the given dimension.
ScalarFn constant(Index dim, double c);

/// Weighted sum of partial derivatives Σ_i w_i ∂f/∂x_i, evaluated over T,
/// using the scalar one nesting level deeper.
template <FieldScalar T>
T weighted_partial(const ScalarFn& f, const Vec<T>& x, const Eigen::VectorXd& w) {
  if constexpr (dual_depth_v<T> > kMaxGradDepth) {
    (void)f;
    (void)x;
    (void)w;
    throw DomainError("derivative nesting deeper than supported scalar depth");
  } else {
    using DT = Dual<T>;
    Vec<DT> xd(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      xd[i].val = x[i];
      xd[i].eps = T(w[i]);
    }
    return f(xd).eps;
  }
}

}  // namespace ltk
