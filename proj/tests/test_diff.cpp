#include <doctest.h>

#include <ltk/diff.hpp>
#include <ltk/expr.hpp>

#include "support.hpp"

#include <cmath>
#include <vector>

using namespace ltk;
using ltk::testing::Gen;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(Index(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ScalarFn square0() {
  return ScalarFn(1, [](const auto& x) { return x[0] * x[0]; });
}

}  // namespace

TEST_CASE("dual arithmetic carries first derivatives") {
  D1 x(3.0, 1.0);
  D1 y = x * x + 2.0 * x - 1.0 / x;
  CHECK(y.val == doctest::Approx(9.0 + 6.0 - 1.0 / 3.0));
  CHECK(y.eps == doctest::Approx(6.0 + 2.0 + 1.0 / 9.0));

  D1 e = exp(D1(0.0, 1.0));
  CHECK(e.val == doctest::Approx(1.0));
  CHECK(e.eps == doctest::Approx(1.0));

  D1 s = sqrt(D1(4.0, 1.0));
  CHECK(s.eps == doctest::Approx(0.25));

  D1 l = log(D1(2.0, 1.0));
  CHECK(l.eps == doctest::Approx(0.5));
}

TEST_CASE("nested duals give second derivatives") {
  // f(x) = x^3 at x = 2: f'' = 12.
  D2 x;
  x.val = D1(2.0, 1.0);
  x.eps = D1(1.0, 0.0);
  D2 f = x * x * x;
  CHECK(f.eps.eps == doctest::Approx(12.0));
  CHECK(dual_depth_v<D3> == 3);
}

TEST_CASE("grad examples") {
  CHECK(grad(square0(), vec({3.0}))[0] == doctest::Approx(6.0));

  ScalarFn prod(2, [](const auto& x) { return x[0] * x[1]; });
  const VectorXd g = grad(prod, vec({2.0, 5.0}));
  CHECK(g[0] == doctest::Approx(5.0));
  CHECK(g[1] == doctest::Approx(2.0));

  const VectorXd z = grad(constant(3, 7.0), vec({1.0, -2.0, 4.0}));
  CHECK(z.isZero(0.0));
}

TEST_CASE("grad reports the function value and rejects wrong dimension") {
  double v = 0.0;
  grad<double>(square0(), vec({3.0}), &v);
  CHECK(v == 9.0);
  CHECK_THROWS_AS(grad(square0(), vec({1.0, 2.0})), DimensionError);
}

TEST_CASE("grad nesting is bounded") {
  Vec<D3> x(1);
  x[0] = D3(1.0);
  CHECK_THROWS_AS(grad<D3>(square0(), x), DomainError);
}

TEST_CASE("fd_grad examples") {
  CHECK(std::abs(fd_grad(square0(), vec({3.0}), 1e-5)[0] - 6.0) < 1e-8);
  ScalarFn e(1, [](const auto& x) {
    using std::exp;
    return exp(x[0]);
  });
  CHECK(std::abs(fd_grad(e, vec({0.0}), 1e-5)[0] - 1.0) < 1e-9);
}

TEST_CASE("weighted_partial is a directional derivative") {
  ScalarFn f(2, [](const auto& x) { return x[0] * x[0] * x[1]; });
  const VectorXd x = vec({2.0, 3.0});
  const VectorXd w = vec({1.0, -2.0});
  const VectorXd g = grad(f, x);
  CHECK(weighted_partial<double>(f, x, w) == doctest::Approx(g.dot(w)));
}

TEST_CASE("combinators") {
  const VectorXd x = vec({2.0});
  ScalarFn a = square0();
  ScalarFn b(1, [](const auto& y) { return 3.0 * y[0]; });
  CHECK(sum({a, b})(x) == doctest::Approx(10.0));
  CHECK(product(a, b)(x) == doctest::Approx(24.0));
  CHECK(axpy(a, -2.0, b)(x) == doctest::Approx(-8.0));
  CHECK(grad(product(a, b), x)[0] == doctest::Approx(36.0));
}

TEST_CASE("property: grad agrees with fd_grad on the expression corpus") {
  const std::vector<std::string> corpus = {
      "x0^2*x1 - 3*x2",
      "exp(x0/2)*sin(x1) + cos(x2)",
      "sqrt(x0^2 + x1^2 + 1)",
      "ln(x0^2 + 1) * x1 / (x2^2 + 2)",
      "pow(x0^2 + 1, 1.5) - abs(x1 - 7)",
      "(x0 - x1)^3 / (1 + x2^4)",
  };
  expr::Layout l;
  l.slot("x0", 0).slot("x1", 1).slot("x2", 2);
  Gen gen(101);
  for (const auto& src : corpus) {
    const ScalarFn f = expr::compile(src, l, src);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const VectorXd x = gen.vector(3, -2.0, 2.0);
      const VectorXd g = grad(f, x);
      const VectorXd h = fd_grad(f, x);
      for (Index i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(g[i] - h[i]) / std::max(1.0, std::abs(g[i])));
    }
    INFO(src);
    CHECK(worst < 1e-6);
  }
}
