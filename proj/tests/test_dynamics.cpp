#include <doctest.h>

#include <ltk/dynamics.hpp>

#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace ltk;
using ltk::testing::Gen;
using ltk::testing::max_abs;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(Index(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ScalarFn phase(const std::string& src, Index n) { return expr::compile(src, phase_layout(n), src); }
ScalarFn contact(const std::string& src, Index n, int chart = 0) {
  return expr::compile(src, contact_layout(n, chart), src);
}
ScalarFn reduced(const std::string& src, Index n, int chart, Index ref) {
  return expr::compile(src, reduced_layout(n, chart, ref), src);
}

HamiltonianSpec registered(const std::string& src, Index n, std::uint64_t seed = 1) {
  Gen gen(seed);
  std::vector<PhasePoint> probes;
  for (int k = 0; k < 16; ++k) probes.push_back(gen.phase_point(n, 0, 0.5, 2.0));
  return register_hamiltonian(phase(src, n), src, probes);
}

/// Degree-1 Hamiltonians on T*R^3, defined for q > 0 and p0 < 0.
const std::vector<std::string>& corpus() {
  static const std::vector<std::string> c = {
      "p1",
      "-p0*q1",
      "p0*q1 - p1*q0",
      "p1*q2 - p2^2/p0",
      "sin(q0)*p1 + q1*p2",
      "p1*p2/(-p0) + q2*p0",
  };
  return c;
}

}  // namespace

TEST_CASE("hamiltonian_field examples") {
  const PhasePoint pt(vec({0.3, -0.7}), vec({1.5, 2.5}));
  const TangentVector a = hamiltonian_field(phase("p1", 2), pt);
  CHECK(a.vq == vec({0.0, 1.0}));
  CHECK(a.vp == vec({0.0, 0.0}));

  const TangentVector b = hamiltonian_field(phase("-p0*q1", 2), pt);
  CHECK(b.vq == vec({0.7, 0.0}));
  CHECK(b.vp == vec({0.0, 1.5}));

  const TangentVector c = hamiltonian_field(phase("p0*q1 - p1*q0", 2), pt);
  CHECK(c.vq == vec({-0.7, -0.3}));
  CHECK(c.vp == vec({2.5, -1.5}));
}

TEST_CASE("register_hamiltonian rejects wrong degrees") {
  Gen gen(3);
  std::vector<PhasePoint> probes;
  for (int k = 0; k < 8; ++k) probes.push_back(gen.phase_point(2, 0));
  CHECK_THROWS_AS(register_hamiltonian(phase("p0^2", 2), "p0^2", probes), PreconditionError);
  CHECK_NOTHROW(register_hamiltonian(phase("-p0*q1", 2), "", probes));
  CHECK_THROWS_AS(register_hamiltonian(phase("-p0*q1^2", 2), "", probes, true), PreconditionError);
  CHECK(register_hamiltonian(phase("-p0*q1", 2), "", probes, true).degree1_q);
  CHECK_NOTHROW(unchecked_hamiltonian(phase("p0^2", 2), "control"));
}

TEST_CASE("contact_field examples") {
  const VectorXd y = vec({0.4, -1.1, 2.0});  // q0, q1, gamma1
  CHECK(contact_field(contact("gamma1", 2), 0, y) == vec({0.0, 1.0, 0.0}));
  const VectorXd v = contact_field(contact("q0", 2), 0, y);
  CHECK(v[0] == doctest::Approx(-0.4));
  CHECK(v[1] == 0.0);
  CHECK(v[2] == doctest::Approx(-2.0));
}

TEST_CASE("property: contact field is the projection of the homogenized Hamiltonian field") {
  const std::vector<std::vector<std::string>> srcs = {
      {"gamma1", "q0", "q0*gamma1^2 - q1", "exp(q1)*gamma2 + sin(gamma1)*q0"},
      {"gamma0", "q1*gamma0^2 - q0*gamma2", "exp(q0)*gamma2 + cos(q2)"},
  };
  Gen gen(19);
  for (int chart = 0; chart < 2; ++chart)
    for (const auto& src : srcs[std::size_t(chart)]) {
      const ScalarFn Khat = contact(src, 3, chart);
      const ScalarFn K = homogenize(Khat, chart);
      for (int k = 0; k < 100; ++k) {
        const ContactPoint cpt{chart, gen.vector(3, -2, 2), gen.vector(2, -2, 2)};
        const PhasePoint pt = lift(cpt);
        const TangentVector X = hamiltonian_field(K, pt);
        // gamma_j = p_j/(-p_c) at p_c = -1.
        VectorXd expect(5);
        expect.head(3) = X.vq;
        Index s = 3;
        for (Index j : complement(3, chart)) expect[s++] = X.vp[j] + pt.p()[j] * X.vp[chart];
        const VectorXd got = contact_field(Khat, cpt);
        INFO(src);
        CHECK(max_abs(got - expect) <= 1e-10 * std::max(1.0, max_abs(expect)));
      }
    }
}

TEST_CASE("reduced_layout names") {
  const ScalarFn f = reduced("eps0 + 10*eps2 + 100*gamma1 + 1000*gamma2", 3, 0, 1);
  CHECK(f(vec({1.0, 2.0, 3.0, 4.0})) == doctest::Approx(1.0 + 20.0 + 300.0 + 4000.0));
}

TEST_CASE("reduced_field examples") {
  // Chart 0, reference 1: y = (eps0, eps2, gamma1, gamma2).
  const VectorXd y = vec({0.5, 1.5, 2.0, -0.5});
  const VectorXd c = reduced_field(reduced("3", 3, 0, 1), 0, 1, y);
  CHECK(c == vec({-3.0, 0.0, -3.0, 0.0}));

  // K̄ = gamma1 lifts to K = q1 p1: eps_j = q_j/q1 for j != 1 decays, gamma1 = p1/(-p0) decays.
  const VectorXd g = reduced_field(reduced("gamma1", 3, 0, 1), 0, 1, y);
  CHECK(g[0] == doctest::Approx(-0.5));
  CHECK(g[1] == doctest::Approx(-1.5));
  CHECK(g[2] == doctest::Approx(-2.0));
  CHECK(g[3] == doctest::Approx(0.0));
}

TEST_CASE("reduce_hamiltonian and lift_reduced are inverse") {
  const ScalarFn Kbar = reduced("gamma1*eps2 + eps0*gamma2^2", 3, 0, 1);
  const ScalarFn K = lift_reduced(Kbar, 0, 1);
  const ScalarFn back = reduce_hamiltonian(K, 0, 1);
  Gen gen(37);
  for (int k = 0; k < 50; ++k) {
    const VectorXd y = gen.vector(4, -2, 2);
    CHECK(back(y) == doctest::Approx(Kbar(y)).epsilon(1e-12));
    const PhasePoint pt(gen.vector(3, 0.5, 2), gen.costate(3, 0));
    CHECK(std::abs(euler_residual(K, pt, 1, EulerField::Z)) <= 1e-9 * (1 + std::abs(K(pt.state()))));
    CHECK(std::abs(euler_residual(K, pt, 1, EulerField::W)) <= 1e-9 * (1 + std::abs(K(pt.state()))));
  }
}

TEST_CASE("property: reduced field equals the projection of the full field") {
  const std::vector<std::string> srcs = {"gamma1", "3", "gamma1*eps2 + eps0*gamma2^2",
                                         "exp(eps2)*gamma1 - eps0*gamma2", "sin(eps0)*gamma2^2 + eps2"};
  Gen gen(43);
  for (const auto& src : srcs) {
    const ScalarFn Kbar = reduced(src, 3, 0, 1);
    const ScalarFn K = lift_reduced(Kbar, 0, 1);
    for (int k = 0; k < 30; ++k) {
      const PhasePoint pt(gen.vector(3, 0.5, 2), gen.costate(3, 0, 0.3));
      const VectorXd x = pt.state();
      const VectorXd X = hamiltonian_field(K, x);
      const double h = 1e-6;
      const VectorXd proj = (reduce(PhasePoint::from_state(x + h * X), 0, 1).state() -
                             reduce(PhasePoint::from_state(x - h * X), 0, 1).state()) /
                            (2 * h);
      const VectorXd got = reduced_field(Kbar, reduce(pt, 0, 1));
      INFO(src);
      CHECK(max_abs(got - proj) <= 1e-6 * std::max(1.0, max_abs(proj)));
    }
  }
}

TEST_CASE("reduced trajectories match projected full trajectories") {
  const ScalarFn Kbar = reduced("gamma1*eps2 - eps0*gamma2/(1 + eps2^2)", 3, 0, 1);
  const ScalarFn K = lift_reduced(Kbar, 0, 1);
  const PhasePoint pt0(vec({0.8, 1.2, 0.6}), vec({-1.5, 0.4, 0.9}));
  const Trajectory full = integrate(hamiltonian_flow_field(K), pt0.state(), 1.0, 1e-3);
  const Field rf = [Kbar](double, const VectorXd& y) { return reduced_field(Kbar, 0, 1, y); };
  const Trajectory red = integrate(rf, reduce(pt0, 0, 1).state(), 1.0, 1e-3);
  REQUIRE(full.size() == red.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < full.size(); ++k)
    worst = std::max(worst, max_abs(reduce(PhasePoint::from_state(full.x[k]), 0, 1).state() - red.x[k]));
  CHECK(worst <= 1e-6);
}

TEST_CASE("integrate examples") {
  SUBCASE("rotation closes its orbit") {
    const Field f = hamiltonian_flow_field(phase("p0*q1 - p1*q0", 2));
    const VectorXd x0 = vec({1.0, 0.0, 0.0, 1.0});
    const Trajectory tr = integrate(f, x0, 2 * std::numbers::pi, 1e-3);
    CHECK(max_abs(tr.final_state() - x0) <= 1e-8);
  }
  SUBCASE("zero field") {
    const Field f = [](double, const VectorXd& x) { return VectorXd::Zero(x.size()).eval(); };
    const Trajectory tr = integrate(f, vec({1.0, 2.0}), 1.0, 0.1);
    CHECK(tr.size() == 11);
    for (const auto& x : tr.x) CHECK(x == vec({1.0, 2.0}));
  }
  SUBCASE("constant field is integrated exactly") {
    const Field f = hamiltonian_flow_field(phase("p1", 2));
    const Trajectory tr = integrate(f, vec({0.0, 0.25, -1.0, 1.0}), 1.0, 0.125);
    for (std::size_t k = 0; k < tr.size(); ++k) CHECK(tr.x[k][1] == 0.25 + tr.t[k]);
  }
  SUBCASE("grid is uniform and strictly increasing") {
    const Trajectory tr = integrate(hamiltonian_flow_field(phase("p1", 2)), vec({0, 0, -1, 1}), 1.0, 0.3);
    CHECK(tr.size() == 4);
    CHECK(tr.t.back() == doctest::Approx(1.0));
    for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr.t[k] > tr.t[k - 1]);
  }
  SUBCASE("domain errors carry the time") {
    const Field f = hamiltonian_flow_field(phase("p0*ln(q0)", 1));
    try {
      integrate(f, vec({0.5, 1.0}), 5.0, 1e-3);
      FAIL("expected an integration error");
    } catch (const IntegrationError& e) {
      CHECK(e.time() > 0.0);
      CHECK(e.time() < 5.0);
    }
  }
  CHECK_THROWS_AS(integrate(hamiltonian_flow_field(phase("p1", 2)), vec({0, 0, -1, 1}), 1.0, 0.0),
                  PreconditionError);
}

TEST_CASE("monitors are evaluated at every grid point") {
  const ScalarFn K = phase("p0*q1 - p1*q0", 2);
  const Trajectory tr = integrate(hamiltonian_flow_field(K), vec({1.0, 0.5, -0.5, 1.0}), 1.0, 0.01,
                                  hamiltonian_monitors(K));
  REQUIRE(tr.monitors.size() == tr.size());
  CHECK(tr.monitor_names == std::vector<std::string>{"K", "alpha_res"});
  CHECK(tr.column("K").size() == tr.size());
  CHECK_THROWS(tr.column("nope"));
}

TEST_CASE("property: K is conserved and alpha(X_K) = K along the flow") {
  for (const auto& src : corpus()) {
    const HamiltonianSpec H = registered(src, 3);
    const PhasePoint pt0(vec({0.9, 1.1, 0.7}), vec({-1.2, 0.5, 0.3}));
    const Trajectory tr = integrate(hamiltonian_flow_field(H.K), pt0.state(), 10.0, 1e-3,
                                    hamiltonian_monitors(H.K));
    const auto K = tr.column("K");
    const auto a = tr.column("alpha_res");
    double drift = 0.0, ares = 0.0;
    for (std::size_t k = 0; k < K.size(); ++k) {
      drift = std::max(drift, std::abs(K[k] - K[0]));
      ares = std::max(ares, std::abs(a[k]) / (1.0 + std::abs(K[k])));
    }
    INFO(src);
    CHECK(drift <= 1e-6 * (1.0 + std::abs(K[0])));
    CHECK(ares <= 1e-9);
  }
}

TEST_CASE("property: the Lie derivative of alpha along X_K vanishes") {
  Gen gen(47);
  for (const auto& src : corpus()) {
    const HamiltonianSpec H = registered(src, 3);
    for (int k = 0; k < 50; ++k) {
      const PhasePoint pt(gen.vector(3, 0.5, 2), gen.costate(3, 0, 0.3));
      INFO(src);
      CHECK(max_abs(lie_derivative_alpha(H.K, pt.state())) <= 1e-6);
    }
  }
  // Degree 2 fails.
  CHECK(max_abs(lie_derivative_alpha(phase("p0^2", 1), vec({0.0, 1.5}))) > 1.0);
}

TEST_CASE("lie_bracket of linear fields") {
  // X = (x1, 0), Y = (0, x0): DY·X - DX·Y = (0, x1) - (x0, 0).
  auto X = [](const VectorXd& x) { return vec({x[1], 0.0}); };
  auto Y = [](const VectorXd& x) { return vec({0.0, x[0]}); };
  const VectorXd b = lie_bracket(X, Y, vec({2.0, 3.0}));
  CHECK(b[0] == doctest::Approx(-2.0));
  CHECK(b[1] == doctest::Approx(3.0));
}

TEST_CASE("commutator_residual examples") {
  const PhasePoint pt(vec({0.4, 1.3}), vec({-1.7, 0.6}));
  CHECK(max_abs(commutator_residual(registered("p1", 2), pt, EulerField::Z)) <= 1e-9);
  CHECK(max_abs(commutator_residual(registered("-p0*q1", 2), pt, EulerField::Z)) <= 1e-7);
  const VectorXd r = commutator_residual(unchecked_hamiltonian(phase("p0^2", 2), "p0^2"), pt, EulerField::Z);
  CHECK(std::abs(r[0]) == doctest::Approx(2 * 1.7).epsilon(1e-6));
  CHECK(max_abs(r.tail(3)) <= 1e-7);
  // -p0*q1 is also degree 1 in q.
  CHECK(max_abs(commutator_residual(registered("-p0*q1", 2), pt, EulerField::W)) <= 1e-7);
  CHECK(max_abs(commutator_residual(registered("-p0*q1^2", 2), pt, EulerField::W)) > 1e-3);
}

TEST_CASE("property: degree-1 fields commute with Z on the corpus") {
  Gen gen(53);
  for (const auto& src : corpus()) {
    const HamiltonianSpec H = registered(src, 3);
    for (int k = 0; k < 30; ++k) {
      const PhasePoint pt(gen.vector(3, 0.5, 2), gen.costate(3, 0, 0.3));
      INFO(src);
      CHECK(max_abs(commutator_residual(H, pt, EulerField::Z)) <= 1e-6);
    }
  }
}

TEST_CASE("flow_transport_check examples") {
  const ScalarFn F = expr::compile("q1^2", generating_layout(0, {1}, {}));
  const GeneratingFunction gf = make_generating_function(2, 0, {1}, {}, F, false, {{-1, 1}, {-2, -0.5}});
  Gen gen(59);
  const auto samples = sample_params(gf, 10, gen.engine());

  const FlowTransportReport moved = flow_transport_check(gf, registered("p1", 2), 0.5, samples);
  CHECK(moved.samples == samples.size());
  CHECK(moved.max_alpha < 1e-6);
  CHECK_FALSE(moved.invariance_checked);

  const FlowTransportReport still = flow_transport_check(gf, registered("p1", 2), 0.0, samples);
  CHECK(still.max_alpha < 1e-9);

  // Vanishes on L, so L is invariant.
  const FlowTransportReport inv = flow_transport_check(gf, registered("p0*(q0 - q1^2)", 2), 1.0, samples);
  CHECK(inv.invariance_checked);
  CHECK(inv.max_membership < 1e-6);
  CHECK(inv.max_alpha < 1e-6);
}

TEST_CASE("scaling_commutation_check examples") {
  const PhasePoint pt(vec({0.5, 1.5}), vec({-1.0, 0.7}));
  CHECK(scaling_commutation_check(registered("-p0*q1", 2), pt, 1.0, 1.0) == 0.0);
  CHECK(scaling_commutation_check(registered("-p0*q1", 2), pt, 2.0, 1.0) < 1e-8);
  const double bad = scaling_commutation_check(unchecked_hamiltonian(phase("p0^2", 2), "p0^2"), pt, 2.0, 1.0);
  // q0 moves at rate 2 p0: lambda = 2 shifts q0 by an extra 2(lambda - 1)|p0| t.
  CHECK(bad == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_THROWS_AS(scaling_commutation_check(registered("p1", 2), pt, 0.0, 1.0), PreconditionError);
}

TEST_CASE("property: flows commute with costate scaling on the corpus") {
  Gen gen(61);
  for (const auto& src : corpus()) {
    const HamiltonianSpec H = registered(src, 3);
    for (double lambda : {0.5, 2.0, -1.0}) {
      const PhasePoint pt(gen.vector(3, 0.8, 1.5), gen.costate(3, 0, 0.5));
      INFO(src);
      CHECK(scaling_commutation_check(H, pt, lambda, 1.0) <= 1e-8);
    }
  }
}
