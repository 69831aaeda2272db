#include <ltk/brackets.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace ltk {

namespace {

template <class T>
T bracket_from_gradients(const Vec<T>& g1, const Vec<T>& g2) {
  const Index n = g1.size() / 2;
  T s(0.0);
  for (Index i = 0; i < n; ++i) s += g1[n + i] * g2[i] - g1[i] * g2[n + i];
  return s;
}

void require_phase_pair(const ScalarFn& K1, const ScalarFn& K2, const char* what) {
  if (K1.dim() != K2.dim() || K1.dim() % 2 != 0)
    throw DimensionError(std::string(what) + ": both functions must act on the same (q, p)");
}

VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x) {
  VectorXd g(x.size());
  VectorXd xs = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i]);
    xs[i] = x[i] + h;
    const double fp = f(xs);
    xs[i] = x[i] - h;
    const double fm = f(xs);
    xs[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double scale_of(const PhasePoint& pt) {
  return std::max(1.0, pt.q().cwiseAbs().maxCoeff() * pt.p().cwiseAbs().maxCoeff());
}

}  // namespace

double poisson(const ScalarFn& K1, const ScalarFn& K2, const PhasePoint& pt) {
  require_phase_pair(K1, K2, "poisson");
  const VectorXd x = pt.state();
  return bracket_from_gradients<double>(grad(K1, x), grad(K2, x));
}

ScalarFn poisson_fn(const ScalarFn& K1, const ScalarFn& K2) {
  require_phase_pair(K1, K2, "poisson_fn");
  return ScalarFn(
      K1.dim(),
      [K1, K2](const auto& x) {
        using T = scalar_of<decltype(x)>;
        return bracket_from_gradients<T>(grad<T>(K1, x), grad<T>(K2, x));
      },
      ScalarFn::Origin::derived, "{" + K1.name() + "," + K2.name() + "}");
}

double jacobi(const ScalarFn& Khat1, const ScalarFn& Khat2, const ContactPoint& cpt) {
  const ScalarFn K1 = homogenize(Khat1, cpt.chart);
  const ScalarFn K2 = homogenize(Khat2, cpt.chart);
  return poisson(K1, K2, lift(cpt));
}

ScalarFn jacobi_fn(const ScalarFn& Khat1, const ScalarFn& Khat2, int chart) {
  return dehomogenize(poisson_fn(homogenize(Khat1, chart), homogenize(Khat2, chart)), chart);
}

BracketReport bracket_report(const ScalarFn& K1, const ScalarFn& K2, const PhasePoint& pt) {
  BracketReport r;
  r.value = poisson(K1, K2, pt);
  r.euler_K1 = euler_residual(K1, pt, 1, EulerField::Z);
  r.euler_K2 = euler_residual(K2, pt, 1, EulerField::Z);
  r.euler_bracket = euler_residual(poisson_fn(K1, K2), pt, 1, EulerField::Z);
  return r;
}

DegreeCheckReport degree_check(int degree1, const ScalarFn& K1, int degree2, const ScalarFn& K2,
                               const std::vector<PhasePoint>& pts) {
  auto valid = [](int d) { return d == 0 || d == 1; };
  if (!valid(degree1) || !valid(degree2))
    throw PreconditionError("degree_check: declared degrees must be 0 or 1");
  DegreeCheckReport rep;
  rep.degree1 = degree1;
  rep.degree2 = degree2;
  const ScalarFn B = poisson_fn(K1, K2);
  const int expected = degree1 + degree2 - 1;
  for (const auto& pt : pts) {
    const VectorXd x = pt.state();
    const double k1 = K1(x), k2 = K2(x);
    rep.max_input_residual =
        std::max({rep.max_input_residual,
                  std::abs(euler_residual(K1, pt, degree1, EulerField::Z)) / (1.0 + std::abs(k1)),
                  std::abs(euler_residual(K2, pt, degree2, EulerField::Z)) / (1.0 + std::abs(k2))});
    const double b = B(x);
    if (expected >= 0) {
      rep.max_bracket_residual = std::max(
          rep.max_bracket_residual,
          std::abs(euler_residual(B, pt, expected, EulerField::Z)) / (1.0 + std::abs(b)));
    } else {
      rep.max_bracket_residual = std::max(rep.max_bracket_residual, std::abs(b));
      rep.max_degree_minus1 =
          std::max(rep.max_degree_minus1,
                   std::abs(euler_residual(B, pt, -1, EulerField::Z)) / (1.0 + std::abs(b)));
    }
  }
  return rep;
}

double jacobi_identity_residual(const ScalarFn& K1, const ScalarFn& K2, const ScalarFn& K3,
                                const PhasePoint& pt, NestingMethod method) {
  require_phase_pair(K1, K2, "jacobi_identity_residual");
  require_phase_pair(K2, K3, "jacobi_identity_residual");
  const VectorXd x = pt.state();
  auto outer = [&](const ScalarFn& A, const ScalarFn& B, const ScalarFn& C) {
    const VectorXd gc = grad(C, x);
    VectorXd gab;
    if (method == NestingMethod::nested_dual) {
      gab = grad(poisson_fn(A, B), x);
    } else {
      gab = fd_gradient(
          [&](const VectorXd& y) { return bracket_from_gradients<double>(grad(A, y), grad(B, y)); }, x);
    }
    return bracket_from_gradients<double>(gab, gc);
  };
  return outer(K1, K2, K3) + outer(K2, K3, K1) + outer(K3, K1, K2);
}

double leibniz_defect(const ScalarFn& Khat1, const ScalarFn& Khat2, const ScalarFn& Khat3,
                      const ContactPoint& cpt) {
  const VectorXd y = cpt.state();
  const ScalarFn prod = product(Khat2, Khat3);
  return jacobi(Khat1, prod, cpt) - jacobi(Khat1, Khat2, cpt) * Khat3(y) -
         Khat2(y) * jacobi(Khat1, Khat3, cpt);
}

double correspondence_residual(const ScalarFn& K1, const ScalarFn& K2, const PhasePoint& pt) {
  require_phase_pair(K1, K2, "correspondence_residual");
  const VectorXd lb = lie_bracket([&](const VectorXd& x) { return hamiltonian_field(K1, x); },
                                  [&](const VectorXd& x) { return hamiltonian_field(K2, x); },
                                  pt.state());
  const VectorXd xb = hamiltonian_field(poisson_fn(K1, K2), pt.state());
  return (lb - xb).cwiseAbs().maxCoeff();
}

double tangency_closure_residual(const GeneratingFunction& gf, const ScalarFn& K1,
                                 const ScalarFn& K2, const std::vector<VectorXd>& samples) {
  double m = 0.0;
  for (const VectorXd& z : samples) {
    const PhasePoint pt = liouville_point(gf, z);
    m = std::max(m, std::abs(poisson(K1, K2, pt)) / scale_of(pt));
  }
  return m;
}

}  // namespace ltk
