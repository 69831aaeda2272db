#pragma once

// Seeded generators and small helpers shared by the unit and property tests.

#include <ltk/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace ltk::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  VectorXd vector(Index n, double a, double b) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

  /// Costates in [-2, 2] with |p_chart| ≥ ratio · max|p_i|.
  VectorXd costate(Index n, int chart, double ratio = 0.1) {
    for (;;) {
      VectorXd p = vector(n, -2.0, 2.0);
      if (std::abs(p[chart]) >= ratio * p.cwiseAbs().maxCoeff() && std::abs(p[chart]) > 1e-3) return p;
    }
  }

  PhasePoint phase_point(Index n, int chart, double qlo = -2.0, double qhi = 2.0) {
    return PhasePoint(vector(n, qlo, qhi), costate(n, chart));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// |a - b| within abs or rel tolerance, whichever is larger.
inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace ltk::testing
