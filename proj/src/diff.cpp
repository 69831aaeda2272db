#include <ltk/diff.hpp>

namespace ltk {

VectorXd fd_grad(const ScalarFn& f, const VectorXd& x, double h) {
  if (!(h > 0.0)) throw PreconditionError("fd_grad: step must be positive");
  VectorXd g(x.size());
  VectorXd xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

VectorXd fd_grad(const ScalarFn& f, const VectorXd& x) {
  VectorXd g(x.size());
  VectorXd xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

ScalarFn sum(const std::vector<ScalarFn>& terms, std::string name) {
  if (terms.empty()) throw PreconditionError("sum of zero functions has no dimension");
  const Index dim = terms.front().dim();
  for (const auto& t : terms)
    if (t.dim() != dim) throw DimensionError("sum: mismatched dimensions");
  return ScalarFn(
      dim,
      [terms](const auto& x) {
        using T = scalar_of<decltype(x)>;
        T acc(0.0);
        for (const auto& t : terms) acc = acc + t(x);
        return acc;
      },
      ScalarFn::Origin::derived, std::move(name));
}

ScalarFn product(const ScalarFn& a, const ScalarFn& b, std::string name) {
  if (a.dim() != b.dim()) throw DimensionError("product: mismatched dimensions");
  return ScalarFn(
      a.dim(), [a, b](const auto& x) { return a(x) * b(x); }, ScalarFn::Origin::derived,
      std::move(name));
}

ScalarFn axpy(const ScalarFn& a, double c, const ScalarFn& b, std::string name) {
  if (a.dim() != b.dim()) throw DimensionError("axpy: mismatched dimensions");
  return ScalarFn(
      a.dim(), [a, c, b](const auto& x) { return a(x) + c * b(x); }, ScalarFn::Origin::derived,
      std::move(name));
}

ScalarFn constant(Index dim, double c) {
  return ScalarFn(
      dim,
      [c](const auto& x) {
        using T = scalar_of<decltype(x)>;
        return T(c);
      },
      ScalarFn::Origin::builtin, "const");
}

}  // namespace ltk
