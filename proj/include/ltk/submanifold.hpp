#pragma once

// Liouville submanifolds L ⊂ T*Q given by a generating function
//
//   F(q_I, p_c, p_J) = -p_c · F̂(q_I, p_J / (-p_c)),
//   L = { q_c = -∂F/∂p_c,  q_J = -∂F/∂p_J,  p_I = ∂F/∂q_I },
//
// for a partition I ∪ J of the non-chart indices, and their Legendre
// projections.  Members are always produced from parameters
// z = (q_I, p_c, p_J), in that order with I and J ascending.

#include <ltk/geometry.hpp>

#include <random>
#include <utility>
#include <vector>

namespace ltk {

struct GeneratingFunction {
  Index dim = 0;  // n + 1
  int chart = 0;
  std::vector<Index> I;
  std::vector<Index> J;
  /// Function of (q_I, gamma_J).
  ScalarFn Fhat;
  /// Declared degree-1 homogeneity of F̂ in q_I.
  bool q_homogeneous = false;
  /// Sampling ranges for the parameters (q_I, p_c, p_J).
  std::vector<std::pair<double, double>> box;

  Index num_params() const { return dim; }
};

/// Validates the partition, the dimension of F̂, the sampling box, and (when
/// declared) q-homogeneity of F̂ at sampled parameters.
GeneratingFunction make_generating_function(Index dim, int chart, std::vector<Index> I,
                                            std::vector<Index> J, ScalarFn Fhat,
                                            bool q_homogeneous,
                                            std::vector<std::pair<double, double>> box);

/// Expression layout for F̂: q_i (i ∈ I), gamma_j (j ∈ J).
expr::Layout generating_layout(int chart, const std::vector<Index>& I, const std::vector<Index>& J);

struct SubmanifoldSample {
  VectorXd params;
  PhasePoint point;
};

/// F(q_I, p_c, p_J) = -p_c F̂(q_I, p_J/(-p_c)).
ScalarFn lift_generating_function(const GeneratingFunction& gf);

PhasePoint liouville_point(const GeneratingFunction& gf, const VectorXd& params);

/// Point of the Legendre submanifold from (q_I, gamma_J).
ContactPoint legendre_point(const GeneratingFunction& gf, const VectorXd& qI_gammaJ);

/// Parameters (q_I, p_c, p_J) read off a phase point.
VectorXd params_of(const GeneratingFunction& gf, const PhasePoint& pt);

/// [q_c + ∂F/∂p_c, q_J + ∂F/∂p_J, p_I - ∂F/∂q_I] at pt; zero iff pt ∈ L.
VectorXd membership_residual(const GeneratingFunction& gf, const PhasePoint& pt);

/// Central-difference spanning set of the tangent space at the member with
/// the given parameters, step 1e-5·max(1, |z_k|).
std::vector<TangentVector> tangent_basis(const GeneratingFunction& gf, const VectorXd& params);

/// Uniform samples from the parameter box.
std::vector<VectorXd> sample_params(const GeneratingFunction& gf, std::size_t count,
                                    std::mt19937_64& rng);

/// Max |alpha| over the tangent basis at the member with these parameters,
/// divided by the point scale max(1, |q|∞·|p|∞).
double alpha_vanishing_residual(const GeneratingFunction& gf, const VectorXd& params);

struct GibbsDuhemReport {
  std::size_t samples = 0;
  double max_sum_qp = 0.0;     ///< max |Σ q_i p_i| / scale
  double max_beta = 0.0;       ///< max |β(v)| / scale over tangent vectors
  double max_w_tangency = 0.0; ///< max |d/dμ residual(μq, p)| at μ = 1, / scale
};

/// Requires q_homogeneous and I nonempty.
GibbsDuhemReport gibbs_duhem_check(const GeneratingFunction& gf,
                                   const std::vector<VectorXd>& samples);

/// Reference extensive index of the specific form: the first index of I.
Index specific_reference(const GeneratingFunction& gf);

/// F̄(eps) = F̂ with q_ref = 1 and the other q_I replaced by eps (ascending
/// order of I without the reference).  Requires J = ∅ and q_homogeneous.
ScalarFn specific_form(const GeneratingFunction& gf);

/// |F̂(q_I) - q_ref · F̄(q_I/q_ref)| / max(1, |F̂|).
double specific_identity_residual(const GeneratingFunction& gf, const VectorXd& qI);

/// Point of the doubly projected space: eps_j = q_j/q_ref for j != ref and
/// gamma_j = p_j/(-p_c) for j != chart, both ascending in j.
struct ReducedPoint {
  int chart = 0;
  Index ref = 1;
  VectorXd eps;
  VectorXd gamma;

  Index dim() const { return eps.size() + 1; }
  VectorXd state() const;
  static ReducedPoint from_state(int chart, Index ref, const VectorXd& y);
};

ReducedPoint reduced_point(const GeneratingFunction& gf, const VectorXd& qI);

/// Projection of a full phase point.
ReducedPoint reduce(const PhasePoint& pt, int chart, Index ref);

/// |q_ref| below this fraction of max|q| is rejected.
inline constexpr double kReferenceThreshold = 1e-12;

}  // namespace ltk
