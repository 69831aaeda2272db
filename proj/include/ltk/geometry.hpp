#pragma once

// The cotangent bundle without zero section T*Q, Q = R^{n+1}: phase points,
// the Liouville form alpha = Σ p_i dq_i, the form beta = Σ q_i dp_i, the Euler
// fields Z = Σ p_i ∂/∂p_i and W = Σ q_i ∂/∂q_i, and projective charts.
//
// Index conventions: state vectors are x = (q_0..q_n, p_0..p_n).  A chart c
// normalises by the costate p_c; its intensive coordinates are
// gamma_j = p_j / (-p_c) for j != c, stored in ascending j.

#include <ltk/diff.hpp>
#include <ltk/expr.hpp>

#include <vector>

namespace ltk {

/// |p_c| below this fraction of max|p_i| makes chart c degenerate.
inline constexpr double kChartThreshold = 1e-12;

struct TangentVector {
  VectorXd vq;
  VectorXd vp;

  VectorXd state() const;
  static TangentVector from_state(const VectorXd& v);
};

class PhasePoint {
 public:
  PhasePoint(VectorXd q, VectorXd p);

  static PhasePoint from_state(const VectorXd& x);

  const VectorXd& q() const { return q_; }
  const VectorXd& p() const { return p_; }
  /// Number of extensive variables, n + 1.
  Index dim() const { return q_.size(); }
  /// Concatenated (q, p).
  VectorXd state() const;

 private:
  VectorXd q_;
  VectorXd p_;
};

struct ContactPoint {
  int chart = 0;
  VectorXd q;
  VectorXd gamma;

  Index dim() const { return q.size(); }
  /// Concatenated (q, gamma), the argument layout of contact Hamiltonians.
  VectorXd state() const;
  static ContactPoint from_state(int chart, const VectorXd& y);
};

enum class EulerField { Z, W };

/// Indices 0..dim-1 with `skip` removed, ascending.
std::vector<Index> complement(Index dim, Index skip);

template <class DerivedP, class DerivedV>
double liouville_pairing(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedV>& vq) {
  return p.dot(vq);
}

double alpha(const PhasePoint& pt, const TangentVector& v);
double beta(const PhasePoint& pt, const TangentVector& v);

/// Σ p_i ∂K/∂p_i - r K (Z) or Σ q_i ∂K/∂q_i - r K (W), K a function of (q, p).
double euler_residual(const ScalarFn& K, const PhasePoint& pt, int r, EulerField wrt);

/// Chart with the largest-magnitude costate.
int best_chart(const VectorXd& p);
bool chart_valid(const VectorXd& p, int chart);

ContactPoint project(const PhasePoint& pt, int chart);

/// Representative of a contact point with p_chart = -1.
PhasePoint lift(const ContactPoint& cpt);

PhasePoint scale_costate(const PhasePoint& pt, double lambda);

/// Projective normal form: costates divided by the largest |p_i| (sign kept).
PhasePoint canonical(const PhasePoint& pt);

/// K(q, p) = -p_c · K̂(q, p_j/(-p_c)); K̂ is a function of (q, gamma).
ScalarFn homogenize(const ScalarFn& Khat, int chart);

/// K̂(q, gamma) = K(q, p) at p_c = -1, p_j = gamma_j.  When probe points are
/// given, degree-1 homogeneity of K is checked there and a warning logged if
/// it fails.
ScalarFn dehomogenize(const ScalarFn& K, int chart, const std::vector<PhasePoint>& probes = {});

/// Expression layouts: q0.., p0.. for phase functions; q0.., gamma_j for
/// contact functions in the given chart.
expr::Layout phase_layout(Index dim);
expr::Layout contact_layout(Index dim, int chart);

}  // namespace ltk
