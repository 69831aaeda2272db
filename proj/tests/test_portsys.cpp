#include <doctest.h>

#include <ltk/portsys.hpp>

#include "support.hpp"

#include <cmath>

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

InputSignal sine(double amp) {
  return [amp](double t) { return vec({amp * std::sin(t)}); };
}

// Reference solutions of the gas piston ODE (E, S, V, pi) from the default
// initial state, integrated with an adaptive high-order scheme at rtol 1e-13.
const VectorXd kPistonSine10 =
    vec({2.003031799026243, 0.04592642284031679, 0.8013744536771662, -0.11445964394799467});
const VectorXd kPistonFree10 =
    vec({2.0, 0.049982650402448627, 0.8026951811678025, -0.023524066514009588});
const VectorXd kPistonFree50 =
    vec({2.0, 0.050338783876066634, 0.7999998830033355, -1.0098805229002892e-06});

}  // namespace

TEST_CASE("outputs examples") {
  const PortSystem gas = gas_piston_damper({.m = 2.0});
  const PhasePoint pt = liouville_point(gas.gf, vec({0.0, 1.0, 3.0, -1.0}));
  const Outputs o = outputs(gas, pt);
  CHECK(o.y_p[0] == doctest::Approx(1.5));
  CHECK(o.y_e[0] == 0.0);
  const Outputs o7 = outputs(gas, scale_costate(pt, 7.0));
  CHECK(std::abs(o7.y_p[0] - o.y_p[0]) <= 1e-12);

  const PortSystem heat = heat_compartment();
  const Outputs h = outputs(heat, liouville_point(heat.gf, vec({0.0, -1.0})));
  CHECK(h.y_e[0] == doctest::Approx(1.0));
  CHECK(h.y_p[0] == doctest::Approx(1.0));
  const Outputs h2 = outputs(heat, liouville_point(heat.gf, vec({std::log(2.0), -3.0})));
  CHECK(h2.y_e[0] == doctest::Approx(0.5));

  CHECK_THROWS_AS(outputs(heat, PhasePoint(vec({1, 2, 3}), vec({-1, 1, 1}))), DimensionError);
}

TEST_CASE("assemble_K matches the displayed gas-piston Hamiltonian") {
  const PortSystem gas = gas_piston_damper();
  // Defaults: m = 1, d = 0.5, U = V^(-2/3) exp(S/1.5), load 1.
  const std::string U = "(1/q2)^(2/3)*exp(q1/1.5)";
  const std::string UV = "(-(2/3)*" + U + "/q2 + 1)";
  const std::string US = "(" + U + "/1.5)";
  const std::string display = "p2*q3 + p3*(-" + UV + " - 0.5*q3) + p1*0.5*q3^2/" + US + " + (p3 + p0*q3)*u";
  Gen gen(3);
  for (double u : {0.0, 1.0, -0.3}) {
    expr::Layout l = phase_layout(4);
    l.with_params({{"u", u}});
    const ScalarFn ref = expr::compile(display, l);
    const HamiltonianSpec K = assemble_K(gas, vec({u}));
    for (int k = 0; k < 50; ++k) {
      const VectorXd x = gen.vector(8, 0.5, 2.0);
      CHECK(K.K(x) == doctest::Approx(ref(x)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(assemble_K(gas, vec({1.0, 2.0})), DimensionError);
}

TEST_CASE("assemble_K is affine in u") {
  const PortSystem gas = gas_piston_damper();
  Gen gen(5);
  for (int k = 0; k < 50; ++k) {
    const VectorXd x = gen.vector(8, 0.5, 2.0);
    const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
    const double lhs = assemble_K(gas, vec({a + b})).K(x);
    const double rhs = assemble_K(gas, vec({a})).K(x) + assemble_K(gas, vec({b})).K(x) - gas.Ka.K(x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(assemble_K(gas, vec({0.0})).K(x) == gas.Ka.K(x));
  }
}

TEST_CASE("gas piston starts at the documented state") {
  const PortSystem gas = gas_piston_damper();
  const PhasePoint x0 = liouville_point(gas.gf, gas.initial);
  CHECK(x0.q() == vec({2.0, 0.0, 1.0, 0.0}));
  CHECK(gas.Ka.K(x0.state()) == doctest::Approx(0.0));
}

TEST_CASE("gas piston driven by a sinusoidal force") {
  const PortSystem gas = gas_piston_damper();
  const SimulationResult r = simulate(gas, gas.initial, sine(0.1), 10.0, 1e-3);
  const VectorXd q = r.traj.final_state().head(4);
  CHECK(max_abs(q - kPistonSine10) <= 1e-8);
  CHECK(r.first_law_residual <= 1e-5 * (1.0 + std::abs(r.delta_E)));
  CHECK(r.delta_E == doctest::Approx(kPistonSine10[0] - 2.0).epsilon(1e-6));
  CHECK(r.second_law_min_step >= -1e-9);
  CHECK(r.max_membership <= 1e-6);
  const auto names = r.traj.monitor_names;
  CHECK(names == std::vector<std::string>{"E", "S", "y_p1", "y_e1", "K_res", "alpha_res", "membership"});
  for (double k : r.traj.column("K_res")) CHECK(std::abs(k) <= 1e-9);
}

TEST_CASE("free gas piston comes to rest") {
  const PortSystem gas = gas_piston_damper();
  const SimulationResult r10 = simulate(gas, gas.initial, zero_input(gas), 10.0, 1e-3);
  CHECK(max_abs(r10.traj.final_state().head(4) - kPistonFree10) <= 1e-8);

  const SimulationResult r = simulate(gas, gas.initial, zero_input(gas), 50.0, 1e-3);
  CHECK(max_abs(r.traj.final_state().head(4) - kPistonFree50) <= 1e-8);
  double drift = 0.0;
  for (double e : r.traj.column("E")) drift = std::max(drift, std::abs(e - 2.0));
  CHECK(drift <= 1e-6 * 2.0);
  const auto S = r.traj.column("S");
  double worst = 0.0;
  for (std::size_t k = 1; k < S.size(); ++k) worst = std::min(worst, S[k] - S[k - 1]);
  CHECK(worst >= -1e-9);
  CHECK(std::abs(r.traj.final_state()[3]) <= 1e-4);
}

TEST_CASE("entropy representation of the gas piston gives the same motion") {
  const PortSystem gas = gas_piston_damper({.chart = 1});
  CHECK(gas.gf.chart == 1);
  const SimulationResult r = simulate(gas, gas.initial, sine(0.1), 10.0, 1e-3);
  CHECK(max_abs(r.traj.final_state().head(4) - kPistonSine10) <= 1e-8);
  CHECK(validate(gas, 50).pass());
}

TEST_CASE("heat compartment") {
  const PortSystem c = heat_compartment({.C = 2.0, .T_ref = 1.5}, 3.0);
  const PhasePoint x0 = liouville_point(c.gf, c.initial);
  CHECK(x0.q()[0] == doctest::Approx(2.0 * 3.0));  // E = C·T
  CHECK(outputs(c, x0).y_e[0] == doctest::Approx(1.0 / 3.0));
  // A constant heat inflow raises the energy linearly.
  const SimulationResult r = simulate(c, c.initial, [](double) { return vec({0.5}); }, 2.0, 1e-3);
  CHECK(r.delta_E == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.first_law_residual <= 1e-10);
  CHECK(r.delta_S == doctest::Approx(2.0 * std::log((6.0 + 1.0) / 6.0)).epsilon(1e-8));
  CHECK(std::abs(r.second_law_min_step) <= 1e-9);
}

TEST_CASE("heat exchanger") {
  const PortSystem hx = heat_exchanger();
  CHECK(hx.inputs() == 0);
  CHECK(hx.energy == std::vector<Index>{0, 2});
  CHECK(hx.entropy == std::vector<Index>{1, 3});
  CHECK(hx.initial[0] == doctest::Approx(std::log(2.0)));
  CHECK(hx.initial[1] == doctest::Approx(0.0));

  const SimulationResult r = simulate(hx, hx.initial, zero_input(hx), 20.0, 1e-3);
  auto temps = [](const VectorXd& x) { return std::pair{std::exp(x[1]), std::exp(x[3])}; };
  double drift = 0.0;
  for (double e : r.traj.column("E")) drift = std::max(drift, std::abs(e - 3.0));
  CHECK(drift <= 1e-8);
  const auto [T1, T2] = temps(r.traj.final_state());
  CHECK(std::abs(T1 - T2) <= 1e-6);
  CHECK(r.delta_S == doctest::Approx(2 * std::log(1.5) - std::log(2.0)).epsilon(1e-4));
  CHECK(r.second_law_min_step >= -1e-9);

  // T1 - T2 decays as exp(-2λt/C).
  for (std::size_t k = 0; k < r.traj.size(); k += 1000) {
    const auto [a, b] = temps(r.traj.x[k]);
    CHECK(std::abs((a - b) - std::exp(-2.0 * r.traj.t[k])) <= 1e-9);
  }
}

TEST_CASE("unprojected runs drift off L along the expanding costate mode") {
  // The flow contracts temperature differences at rate 2λ/C, so the conjugate
  // transverse mode grows at the same rate.
  const PortSystem hx = heat_exchanger();
  const SimulationResult a = simulate(hx, hx.initial, zero_input(hx), 5.0, 1e-3, false);
  const auto m = a.traj.column("membership");
  CHECK(m.back() > 100.0 * m[1000]);
  CHECK_THROWS_AS(simulate(hx, hx.initial, zero_input(hx), 20.0, 1e-3, false), IntegrationError);
  // Projection keeps the one-step drift at roundoff and leaves the motion unchanged.
  const SimulationResult b = simulate(hx, hx.initial, zero_input(hx), 5.0, 1e-3);
  CHECK(b.max_membership <= 1e-12);
  CHECK(max_abs(a.traj.final_state().head(4) - b.traj.final_state().head(4)) <= 1e-8);
}

TEST_CASE("composed heat exchanger Hamiltonian") {
  const HeatExchangerParams p{.c1 = {.C = 1.0, .T_ref = 1.0}, .c2 = {.C = 2.0, .T_ref = 0.5}, .lambda = 0.7};
  const PortSystem hx = heat_exchanger(p);
  Gen gen(7);
  for (int k = 0; k < 50; ++k) {
    const VectorXd q = gen.vector(4, -1, 1);
    const double pE = gen.uniform(-2, -0.5), pS1 = gen.uniform(-2, 2), pS2 = gen.uniform(-2, 2);
    VectorXd x(8);
    x << q, pE, pS1, pE, pS2;
    const double E1 = std::exp(q[1]), E2 = 0.5 * std::exp(q[3] / 2.0);
    const double display = 0.7 * (pS1 / E1 - pS2 / E2) * (E2 - E1);
    CHECK(std::abs(hx.Ka.K(x) - display) <= 1e-12 * std::max(1.0, std::abs(display)));
    // Independent costates add the energy exchange term.
    x[6] = pE + 0.25;
    CHECK(hx.Ka.K(x) == doctest::Approx(display + 0.7 * (E1 - E2) * 0.25).epsilon(1e-12));
  }
}

TEST_CASE("interconnect: zero feedback and rejections") {
  const PortSystem c1 = heat_compartment(), c2 = heat_compartment({.C = 2.0});
  const ScalarFn zero = constant(4, 0.0);
  const PortSystem z = interconnect(c1, c2, {{zero}, {zero}});
  Gen gen(11);
  for (int k = 0; k < 20; ++k) CHECK(z.Ka.K(gen.vector(8, -1, 1)) == 0.0);
  CHECK(z.params.count("1.C") == 1);
  CHECK(z.params.at("2.C").value == 2.0);

  CHECK_THROWS_AS(interconnect(c1, c2, {{zero}, {}}), DimensionError);
  CHECK_THROWS_AS(interconnect(c1, c2, {{constant(3, 0.0)}, {zero}}), DimensionError);

  // Heat flowing from cold to hot.
  auto anti = [](double sign) {
    return ScalarFn(4, [sign](const auto& y) { return sign * (1.0 / y[1] - 1.0 / y[3]); });
  };
  CHECK_THROWS_AS(interconnect(c1, c2, {{anti(1.0)}, {anti(-1.0)}}), PreconditionError);
}

TEST_CASE("product generating function") {
  const PortSystem c1 = heat_compartment(), c2 = heat_compartment({.C = 2.0});
  const GeneratingFunction g = product_generating_function(c1.gf, c2.gf);
  CHECK(g.dim == 4);
  CHECK(g.I == std::vector<Index>{1, 3});
  CHECK(g.J == std::vector<Index>{2});
  const VectorXd z = product_params(c1.gf, c2.gf, vec({0.3, -1.5}), vec({0.2, -0.8}));
  CHECK(z == vec({0.3, 0.2, -1.5, -0.8}));
  const PhasePoint a = liouville_point(c1.gf, vec({0.3, -1.5}));
  const PhasePoint b = liouville_point(c2.gf, vec({0.2, -0.8}));
  const PhasePoint ab = liouville_point(g, z);
  CHECK(max_abs(ab.q() - vec({a.q()[0], a.q()[1], b.q()[0], b.q()[1]})) <= 1e-14);
  CHECK(max_abs(ab.p() - vec({a.p()[0], a.p()[1], b.p()[0], b.p()[1]})) <= 1e-14);
}

TEST_CASE("all built-ins validate") {
  for (const auto& name : builtin_names()) {
    const ValidationReport rep = validate(builtin(name), 100);
    INFO(name);
    CHECK(rep.samples == 100);
    for (const auto& c : rep.checks) {
      INFO(c.name << " " << c.max_residual);
      CHECK(c.pass);
    }
    CHECK(rep.pass());
  }
  CHECK_THROWS_AS(validate(heat_exchanger(), 5).get("outputs_projective"), PreconditionError);
  CHECK(validate(ideal_gas_SVN(), 5).get("gibbs_duhem_sum_qp").pass);
}

TEST_CASE("sign-flipped damping fails the Second Law") {
  const PortSystem good = gas_piston_damper();
  GasPistonParams bad_params;
  bad_params.d = -0.5;
  HamiltonianSpec Ka = unchecked_hamiltonian(gas_piston_autonomous(bad_params), "Ka");
  const PortSystem bad = make_port_system("broken", good.gf, Ka, good.Kc, {0}, {1}, {}, good.initial);
  const ValidationReport rep = validate(bad, 100);
  CHECK_FALSE(rep.get("second_law").pass);
  CHECK(rep.get("first_law").pass);
  CHECK(rep.get("K_vanishes_on_L").pass);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("make_port_system rejects Hamiltonians not vanishing on L") {
  const PortSystem gas = gas_piston_damper();
  const HamiltonianSpec Kp = unchecked_hamiltonian(phase("p1", 4), "p1");
  CHECK_THROWS_AS(make_port_system("x", gas.gf, Kp, {}, {0}, {1}, {}, gas.initial), PreconditionError);
  CHECK_THROWS_AS(make_port_system("x", gas.gf, gas.Ka, {}, {0}, {1}, {}, vec({1.0})), DimensionError);
}

TEST_CASE("ideal gas with mole number") {
  const PortSystem g = ideal_gas_SVN();
  CHECK(g.gf.q_homogeneous);
  Gen gen(13);
  const GibbsDuhemReport gd = gibbs_duhem_check(g.gf, sample_params(g.gf, 100, gen.engine()));
  CHECK(gd.max_sum_qp <= 1e-10);
  CHECK(gd.max_beta <= 1e-9);
  const SimulationResult r = simulate(g, g.initial, sine(0.2), 5.0, 1e-3);
  CHECK(r.first_law_residual <= 1e-6);
  CHECK(std::abs(r.delta_S) <= 1e-10);
  CHECK(r.second_law_min_step >= -1e-9);
  CHECK(r.max_membership <= 1e-8);
}

TEST_CASE("flow of Ka keeps L invariant") {
  Gen gen(17);
  for (const auto& name : {"gas_piston_damper", "ideal_gas_SVN"}) {
    const PortSystem sys = builtin(name);
    const auto samples = sample_params(sys.gf, 5, gen.engine());
    const FlowTransportReport r = flow_transport_check(sys.gf, sys.Ka, 1.0, samples);
    INFO(name);
    CHECK(r.invariance_checked);
    CHECK(r.max_membership <= 1e-6);
    CHECK(r.max_alpha <= 1e-6);
  }
}

TEST_CASE("builtin overrides") {
  CHECK(builtin("gas_piston_damper", {{"m", 3.0}}).params.at("m").value == 3.0);
  CHECK(builtin("heat_exchanger", {{"lambda", 2.0}}).params.at("lambda").value == 2.0);
  CHECK_THROWS_AS(builtin("nope"), PreconditionError);
  CHECK_THROWS_AS(builtin("gas_piston_damper", {{"mass", 1.0}}), PreconditionError);
  CHECK_THROWS_AS(builtin("gas_piston_damper", {{"m", 0.0}}), PreconditionError);
  CHECK_THROWS_AS(builtin("gas_piston_damper", {{"chart", 2.0}}), PreconditionError);
  CHECK_THROWS_AS(builtin("heat_compartment", {{"C", -1.0}}), PreconditionError);
}
