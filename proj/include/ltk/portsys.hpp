#pragma once

// Port-thermodynamic systems: a Liouville submanifold of state properties
// together with a Hamiltonian K = Ka + Σ_k Kc_k u_k, degree 1 in p and zero
// on L, with power and entropy-flow conjugate outputs
//
//   y_p[k] = Σ_{i ∈ energy} ∂Kc_k/∂p_i,   y_e[k] = Σ_{i ∈ entropy} ∂Kc_k/∂p_i.

#include <ltk/dynamics.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace ltk {

struct Parameter {
  double value = 0.0;
  std::string unit;
};

struct PortSystem {
  std::string name;
  GeneratingFunction gf;
  HamiltonianSpec Ka;
  std::vector<HamiltonianSpec> Kc;
  std::vector<Index> energy{0};
  std::vector<Index> entropy{1};
  std::map<std::string, Parameter> params;
  /// Member parameters (q_I, p_c, p_J) used when no initial state is given.
  VectorXd initial;

  Index dim() const { return gf.dim; }
  std::size_t inputs() const { return Kc.size(); }
};

/// Members of L at sampled parameters plus copies with jittered costates,
/// for homogeneity probes.
std::vector<PhasePoint> probe_points(const GeneratingFunction& gf, std::size_t count,
                                     std::uint64_t seed);

/// Checks dimensions, index sets and that Ka and every Kc vanish on L at
/// sampled members (≤ 1e-9 · max(1, |q|·|p|)).
PortSystem make_port_system(std::string name, GeneratingFunction gf, HamiltonianSpec Ka,
                            std::vector<HamiltonianSpec> Kc, std::vector<Index> energy,
                            std::vector<Index> entropy, std::map<std::string, Parameter> params,
                            VectorXd initial);

/// Σ_{i ∈ idx} ∂K/∂p_i at x, over any field scalar.
template <FieldScalar T>
T summed_costate_partial(const ScalarFn& K, const Vec<T>& x, const std::vector<Index>& idx) {
  const Index n = x.size() / 2;
  VectorXd w = VectorXd::Zero(2 * n);
  for (Index i : idx) w[n + i] = 1.0;
  return weighted_partial<T>(K, x, w);
}

struct Outputs {
  VectorXd y_p;
  VectorXd y_e;
};

Outputs outputs(const PortSystem& sys, const PhasePoint& pt);

/// Ka + Σ_k Kc_k u_k.
HamiltonianSpec assemble_K(const PortSystem& sys, const VectorXd& u);

using InputSignal = std::function<VectorXd(double t)>;

/// u ≡ 0 with the system's input count.
InputSignal zero_input(const PortSystem& sys);

struct SimulationResult {
  /// Monitors: E, S, y_p1.., y_e1.., K_res, alpha_res, membership.
  Trajectory traj;
  std::vector<VectorXd> u;
  std::size_t inputs = 0;
  double delta_E = 0.0;
  double work_supplied = 0.0;        ///< trapezoid ∫ y_p·u dt
  double first_law_residual = 0.0;   ///< |ΔE - ∫ y_p·u dt|
  double delta_S = 0.0;
  double entropy_supplied = 0.0;     ///< trapezoid ∫ y_e·u dt
  double second_law_min_step = 0.0;  ///< min over steps of ΔS_k - ∫_k y_e·u dt
  double max_membership = 0.0;
};

/// Integrates X_{Ka + Kc·u(t)} from the member with the given parameters.
/// With project_to_L every step is mapped back to the member with the same
/// parameters and the membership monitor holds the one-step drift; otherwise
/// it holds the accumulated drift.  Drift above 1e-5 aborts with
/// IntegrationError.
SimulationResult simulate(const PortSystem& sys, const VectorXd& params, const InputSignal& u,
                          double t_end, double dt, bool project_to_L = true);

inline constexpr double kMembershipAbort = 1e-5;

/// Feedback u1(y), u2(y) as functions of y = (y_p¹, y_e¹, y_p², y_e²).
struct Feedback {
  std::vector<ScalarFn> u1;
  std::vector<ScalarFn> u2;
};

/// Product-space composition with the feedback substituted into the control
/// Hamiltonians.  The result has no remaining ports.
PortSystem interconnect(const PortSystem& sys1, const PortSystem& sys2, const Feedback& fb,
                        std::string name = {});

/// Product of two generating functions on Q1 × Q2 in the first system's chart.
GeneratingFunction product_generating_function(const GeneratingFunction& g1,
                                               const GeneratingFunction& g2);
/// Member parameters of the product from member parameters of the factors.
VectorXd product_params(const GeneratingFunction& g1, const GeneratingFunction& g2,
                        const VectorXd& z1, const VectorXd& z2);

struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  std::size_t samples = 0;
  bool pass() const;
  const CheckResult& get(const std::string& name) const;
};

/// K vanishing on L, First and Second Law constraints, degree-1 residuals,
/// the energy-chart and entropy-chart forms of the Law constraints, and
/// Gibbs-Duhem for q-homogeneous state properties.
ValidationReport validate(const PortSystem& sys, std::size_t n_samples, std::uint64_t seed = 1);

// Built-in systems.

struct GasPistonParams {
  double m = 1.0;
  double d = 0.5;
  double U0 = 1.0;
  double V0 = 1.0;
  double S0 = 0.0;
  double R = 1.0;
  double cv = 1.5;
  double p_ext = 1.0;  ///< constant load on the piston
  int chart = 0;       ///< 0: energy representation, 1: entropy representation
};

/// q = (E, S, V, π); stored energy U_gas(S,V) + p_ext·V + π²/2m.
PortSystem gas_piston_damper(const GasPistonParams& p = {});
/// Autonomous Hamiltonian of the gas piston for any damping (including
/// nonphysical negative values).
ScalarFn gas_piston_autonomous(const GasPistonParams& p);

struct HeatCompartmentParams {
  double C = 1.0;
  double T_ref = 1.0;
};

/// q = (E, S), E(S) = C·T_ref·exp(S/C).
PortSystem heat_compartment(const HeatCompartmentParams& p = {}, double T0 = 1.0);

struct HeatExchangerParams {
  HeatCompartmentParams c1;
  HeatCompartmentParams c2;
  double lambda = 1.0;
  double T1 = 2.0;
  double T2 = 1.0;
};

/// Two compartments coupled by Fourier conduction -u1 = u2 = λ(1/y_e1 - 1/y_e2).
PortSystem heat_exchanger(const HeatExchangerParams& p = {});

struct IdealGasSVNParams {
  double cv = 1.5;
  double R = 1.0;
  double T_ref = 1.0;
  double v0 = 1.0;
  double s0 = 0.0;
};

/// q = (E, S, V, N) with U(S,V,N) degree 1; one port u acting as a volume
/// strain rate, Kc = q_V (p_V + p_E ∂U/∂V).
PortSystem ideal_gas_SVN(const IdealGasSVNParams& p = {});

std::vector<std::string> builtin_names();

/// Built-in by name with parameter overrides; unknown names or parameters
/// throw PreconditionError.
PortSystem builtin(const std::string& name, const std::map<std::string, double>& overrides = {});

}  // namespace ltk
