#pragma once

// Homogeneous Hamiltonian dynamics on T*Q, its projection to contact
// dynamics in a chart, the further reduction by the W scaling, and a fixed
// step integrator with pull-based monitors.

#include <ltk/submanifold.hpp>

#include <functional>
#include <string>
#include <vector>

namespace ltk {

/// A Hamiltonian K(q, p), degree 1 in p (and optionally in q).
struct HamiltonianSpec {
  ScalarFn K;
  std::string name;
  bool degree1_q = false;

  Index dim() const { return K.dim() / 2; }
};

/// Checks the declared homogeneity at the probe points (Euler residual
/// ≤ 1e-9·(1+|K|)) and throws PreconditionError otherwise.
HamiltonianSpec register_hamiltonian(ScalarFn K, std::string name,
                                     const std::vector<PhasePoint>& probes, bool degree1_q = false);

/// No homogeneity check; for negative controls.
HamiltonianSpec unchecked_hamiltonian(ScalarFn K, std::string name);

/// vq = ∂K/∂p, vp = -∂K/∂q.
TangentVector hamiltonian_field(const ScalarFn& K, const PhasePoint& pt);
VectorXd hamiltonian_field(const ScalarFn& K, const VectorXd& x);

/// (q̇, γ̇) of the contact Hamiltonian K̂(q, gamma) in the point's chart.
VectorXd contact_field(const ScalarFn& Khat, const ContactPoint& cpt);
VectorXd contact_field(const ScalarFn& Khat, int chart, const VectorXd& y);

/// (ε̇, γ̇) for K̄(eps, gamma) on the doubly projected space, where the full
/// Hamiltonian is K = -p_c · q_r · K̄(q/q_r, p/(-p_c)).
VectorXd reduced_field(const ScalarFn& Kbar, const ReducedPoint& r);
VectorXd reduced_field(const ScalarFn& Kbar, int chart, Index ref, const VectorXd& y);

/// Expression layout for K̄: eps_j (j != ref), then gamma_j (j != chart).
expr::Layout reduced_layout(Index dim, int chart, Index ref);

/// K̄(eps, gamma) = K(q, p) at q_r = 1, p_c = -1.
ScalarFn reduce_hamiltonian(const ScalarFn& K, int chart, Index ref);

/// K(q, p) = -p_c · q_r · K̄(q/q_r, p/(-p_c)), the inverse of reduce_hamiltonian.
ScalarFn lift_reduced(const ScalarFn& Kbar, int chart, Index ref);

using Field = std::function<VectorXd(double t, const VectorXd& x)>;

struct Monitor {
  std::string name;
  std::function<double(double t, const VectorXd& x)> eval;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<VectorXd> x;
  std::vector<std::string> monitor_names;
  /// monitors[k][m]: monitor m at grid point k.
  std::vector<std::vector<double>> monitors;

  std::size_t size() const { return t.size(); }
  const VectorXd& final_state() const { return x.back(); }
  /// Column of a named monitor.
  std::vector<double> column(const std::string& name) const;
};

/// Map applied to the state after every step, before the monitors.
using StepHook = std::function<VectorXd(double t, const VectorXd& x)>;

/// Classical RK4 with steps = round(t_end/dt) uniform steps.  Domain errors
/// and non-finite states raise IntegrationError with the time.
Trajectory integrate(const Field& field, const VectorXd& x0, double t_end, double dt,
                     const std::vector<Monitor>& monitors = {}, const StepHook& post_step = {});

/// Final state only, no storage.
VectorXd flow(const Field& field, const VectorXd& x0, double t_end, double dt);

Field hamiltonian_flow_field(const ScalarFn& K);

/// Standard monitors for Hamiltonian runs: K and α(X_K) - K.
std::vector<Monitor> hamiltonian_monitors(const ScalarFn& K);

/// [X, Y] = DY·X - DX·Y at x by central differences with step
/// 1e-5·(1+|x|∞) along normalised directions.
VectorXd lie_bracket(const std::function<VectorXd(const VectorXd&)>& X,
                     const std::function<VectorXd(const VectorXd&)>& Y, const VectorXd& x);

/// Z(x) = (0, p), W(x) = (q, 0).
VectorXd euler_field(EulerField kind, const VectorXd& x);

/// [X_K, Z] or [X_K, W] at pt.
VectorXd commutator_residual(const HamiltonianSpec& K, const PhasePoint& pt, EulerField kind);

/// Components (dq, dp) of the one-form L_X α at x, for X = X_K, by central
/// differences of the field.
VectorXd lie_derivative_alpha(const ScalarFn& K, const VectorXd& x);

struct FlowTransportReport {
  std::size_t samples = 0;
  double max_alpha = 0.0;       ///< max |α| on transported tangents / scale
  double max_membership = 0.0;  ///< max |membership residual| (only when K|_L = 0)
  double max_K_on_L = 0.0;      ///< max |K| at the initial samples
  bool invariance_checked = false;
};

/// Transports each sampled member (and its parameter neighbours) to time t
/// and checks the Liouville property of the image; when K vanishes on L also
/// checks that the image stays on L.
FlowTransportReport flow_transport_check(const GeneratingFunction& gf, const HamiltonianSpec& K,
                                         double t, const std::vector<VectorXd>& samples,
                                         double dt = 1e-3);

/// |φ_t(q, λp) - (q(t), λ p(t))|∞ where (q(t), p(t)) = φ_t(q, p).
double scaling_commutation_check(const HamiltonianSpec& K, const PhasePoint& pt, double lambda,
                                 double t, double dt = 1e-3);

}  // namespace ltk
