#pragma once

// Poisson bracket of functions on T*Q and the Jacobi bracket it induces on
// contact Hamiltonians.  Sign convention:
//
//   {K1, K2} = Σ_i (∂K1/∂p_i ∂K2/∂q_i - ∂K1/∂q_i ∂K2/∂p_i),
//
// for which [X_K1, X_K2] = X_{K1,K2} with [X, Y] = DY·X - DX·Y.

#include <ltk/dynamics.hpp>

#include <vector>

namespace ltk {

double poisson(const ScalarFn& K1, const ScalarFn& K2, const PhasePoint& pt);

/// The bracket as a function, differentiable through nested duals (one
/// further level of derivatives is available on top of it).
ScalarFn poisson_fn(const ScalarFn& K1, const ScalarFn& K2);

/// {K̂1, K̂2}_J: the Poisson bracket of the homogenized pair, dehomogenized.
double jacobi(const ScalarFn& Khat1, const ScalarFn& Khat2, const ContactPoint& cpt);
ScalarFn jacobi_fn(const ScalarFn& Khat1, const ScalarFn& Khat2, int chart);

struct BracketReport {
  double value = 0.0;
  double euler_K1 = 0.0;       ///< degree-1 residual of K1
  double euler_K2 = 0.0;       ///< degree-1 residual of K2
  double euler_bracket = 0.0;  ///< degree-1 residual of the bracket
};

BracketReport bracket_report(const ScalarFn& K1, const ScalarFn& K2, const PhasePoint& pt);

struct DegreeCheckReport {
  int degree1 = 1;
  int degree2 = 1;
  double max_input_residual = 0.0;  ///< declared degrees of K1, K2, relative
  /// (1,1): degree-1 residual of the bracket; (1,0)/(0,1): degree-0
  /// residual; (0,0): |bracket|.  Relative to 1 + |bracket|.
  double max_bracket_residual = 0.0;
  /// (0,0) only: degree -1 residual of the bracket.
  double max_degree_minus1 = 0.0;
};

/// Degree propagation of the bracket for declared degrees in {0, 1}.
DegreeCheckReport degree_check(int degree1, const ScalarFn& K1, int degree2, const ScalarFn& K2,
                               const std::vector<PhasePoint>& pts);

enum class NestingMethod { finite_difference, nested_dual };

/// {{K1,K2},K3} + {{K2,K3},K1} + {{K3,K1},K2} at pt.  The default
/// differentiates the inner brackets by central differences.
double jacobi_identity_residual(const ScalarFn& K1, const ScalarFn& K2, const ScalarFn& K3,
                                const PhasePoint& pt,
                                NestingMethod method = NestingMethod::finite_difference);

/// {K̂1, K̂2·K̂3}_J - {K̂1,K̂2}_J·K̂3 - K̂2·{K̂1,K̂3}_J.
double leibniz_defect(const ScalarFn& Khat1, const ScalarFn& Khat2, const ScalarFn& Khat3,
                      const ContactPoint& cpt);

/// |[X_K1, X_K2] - X_{K1,K2}|∞ with the Lie bracket by finite differences.
double correspondence_residual(const ScalarFn& K1, const ScalarFn& K2, const PhasePoint& pt);

/// max |{K1,K2}| / scale over members with the given parameters.
double tangency_closure_residual(const GeneratingFunction& gf, const ScalarFn& K1,
                                 const ScalarFn& K2, const std::vector<VectorXd>& samples);

}  // namespace ltk
