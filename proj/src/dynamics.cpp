#include <ltk/dynamics.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ltk {

namespace {

Index slot_without(Index j, Index skip) { return j < skip ? j : j - 1; }

double point_scale(const VectorXd& x) {
  const Index n = x.size() / 2;
  return std::max(1.0, x.head(n).cwiseAbs().maxCoeff() * x.tail(n).cwiseAbs().maxCoeff());
}

bool all_finite(const VectorXd& v) { return v.allFinite(); }

}  // namespace

HamiltonianSpec register_hamiltonian(ScalarFn K, std::string name,
                                     const std::vector<PhasePoint>& probes, bool degree1_q) {
  if (K.dim() % 2 != 0) throw DimensionError("Hamiltonian '" + name + "' must be a function of (q, p)");
  for (const auto& pt : probes) {
    const double k = K(pt.state());
    const double tol = 1e-9 * (1.0 + std::abs(k));
    const double rz = euler_residual(K, pt, 1, EulerField::Z);
    if (!(std::abs(rz) <= tol)) {
      std::ostringstream os;
      os << "Hamiltonian '" << name << "' is not degree 1 in p (Euler residual " << rz << ")";
      throw PreconditionError(os.str());
    }
    if (degree1_q) {
      const double rw = euler_residual(K, pt, 1, EulerField::W);
      if (!(std::abs(rw) <= tol)) {
        std::ostringstream os;
        os << "Hamiltonian '" << name << "' is not degree 1 in q (Euler residual " << rw << ")";
        throw PreconditionError(os.str());
      }
    }
  }
  return {K.renamed(name), std::move(name), degree1_q};
}

HamiltonianSpec unchecked_hamiltonian(ScalarFn K, std::string name) {
  return {K.renamed(name), std::move(name), false};
}

VectorXd hamiltonian_field(const ScalarFn& K, const VectorXd& x) {
  const Index n = x.size() / 2;
  const VectorXd g = grad(K, x);
  VectorXd v(2 * n);
  v.head(n) = g.tail(n);
  v.tail(n) = -g.head(n);
  return v;
}

TangentVector hamiltonian_field(const ScalarFn& K, const PhasePoint& pt) {
  return TangentVector::from_state(hamiltonian_field(K, pt.state()));
}

VectorXd contact_field(const ScalarFn& Khat, int chart, const VectorXd& y) {
  const Index n = (y.size() + 1) / 2;
  if (Khat.dim() != y.size()) throw DimensionError("contact_field: K̂ dimension mismatch");
  double k = 0.0;
  const VectorXd g = grad<double>(Khat, y, &k);
  const std::vector<Index> others = complement(n, chart);
  const auto gamma = y.tail(n - 1);
  const auto dgamma = g.tail(n - 1);
  VectorXd v(y.size());
  v[chart] = gamma.dot(dgamma) - k;
  for (std::size_t s = 0; s < others.size(); ++s) {
    const Index j = others[s];
    const Index gs = static_cast<Index>(s);
    v[j] = dgamma[gs];
    v[n + gs] = -g[j] - gamma[gs] * g[chart];
  }
  return v;
}

VectorXd contact_field(const ScalarFn& Khat, const ContactPoint& cpt) {
  return contact_field(Khat, cpt.chart, cpt.state());
}

VectorXd reduced_field(const ScalarFn& Kbar, int chart, Index ref, const VectorXd& y) {
  if (Kbar.dim() != y.size()) throw DimensionError("reduced_field: K̄ dimension mismatch");
  if (chart == ref) throw PreconditionError("reduced_field: reference index must differ from chart");
  const Index m = y.size() / 2;  // n
  const Index n = m + 1;
  double k = 0.0;
  const VectorXd g = grad<double>(Kbar, y, &k);
  const auto eps = y.head(m);
  const auto gamma = y.tail(m);
  const auto deps = g.head(m);
  const auto dgamma = g.tail(m);

  const Index ec = slot_without(chart, ref);
  const Index gr = slot_without(ref, chart);
  const double dK_dgr = dgamma[gr];
  const double dK_dec = deps[ec];

  VectorXd v(y.size());
  for (Index j = 0; j < n; ++j) {
    if (j == ref) continue;
    const Index es = slot_without(j, ref);
    if (j == chart)
      v[es] = gamma.dot(dgamma) - k - eps[es] * dK_dgr;
    else
      v[es] = dgamma[slot_without(j, chart)] - eps[es] * dK_dgr;
  }
  for (Index j = 0; j < n; ++j) {
    if (j == chart) continue;
    const Index gs = slot_without(j, chart);
    if (j == ref)
      v[m + gs] = eps.dot(deps) - k - gamma[gs] * dK_dec;
    else
      v[m + gs] = -deps[slot_without(j, ref)] - gamma[gs] * dK_dec;
  }
  return v;
}

VectorXd reduced_field(const ScalarFn& Kbar, const ReducedPoint& r) {
  return reduced_field(Kbar, r.chart, r.ref, r.state());
}

expr::Layout reduced_layout(Index dim, int chart, Index ref) {
  expr::Layout l;
  Index k = 0;
  for (Index j : complement(dim, int(ref))) l.slot("eps" + std::to_string(j), k++);
  for (Index j : complement(dim, chart)) l.slot("gamma" + std::to_string(j), k++);
  return l;
}

ScalarFn reduce_hamiltonian(const ScalarFn& K, int chart, Index ref) {
  if (K.dim() % 2 != 0) throw DimensionError("reduce_hamiltonian: K must be a function of (q, p)");
  const Index n = K.dim() / 2;
  if (chart == ref) throw PreconditionError("reduce_hamiltonian: reference index must differ from chart");
  return ScalarFn(
      2 * (n - 1),
      [K, chart, ref, n](const auto& y) {
        using T = scalar_of<decltype(y)>;
        Vec<T> x(2 * n);
        Index s = 0;
        for (Index j = 0; j < n; ++j) x[j] = j == ref ? T(1.0) : y[s++];
        for (Index j = 0; j < n; ++j) x[n + j] = j == chart ? T(-1.0) : y[s++];
        return K(x);
      },
      ScalarFn::Origin::derived, "reduced(" + K.name() + ")");
}

ScalarFn lift_reduced(const ScalarFn& Kbar, int chart, Index ref) {
  const Index m = Kbar.dim() / 2;
  const Index n = m + 1;
  if (chart == ref) throw PreconditionError("lift_reduced: reference index must differ from chart");
  return ScalarFn(
      2 * n,
      [Kbar, chart, ref, n, m](const auto& x) {
        using T = scalar_of<decltype(x)>;
        const T& qr = x[ref];
        const T neg_pc = -x[n + chart];
        if (value_of(qr) == 0.0 || value_of(neg_pc) == 0.0)
          throw DomainError("reduced Hamiltonian lifted where q_ref or p_chart vanishes");
        Vec<T> y(2 * m);
        Index s = 0;
        for (Index j = 0; j < n; ++j)
          if (j != ref) y[s++] = x[j] / qr;
        for (Index j = 0; j < n; ++j)
          if (j != chart) y[s++] = x[n + j] / neg_pc;
        return neg_pc * qr * Kbar(y);
      },
      ScalarFn::Origin::derived, "lift(" + Kbar.name() + ")");
}

std::vector<double> Trajectory::column(const std::string& name) const {
  const auto it = std::find(monitor_names.begin(), monitor_names.end(), name);
  if (it == monitor_names.end()) throw PreconditionError("trajectory has no monitor '" + name + "'");
  const std::size_t m = static_cast<std::size_t>(it - monitor_names.begin());
  std::vector<double> c;
  c.reserve(monitors.size());
  for (const auto& row : monitors) c.push_back(row[m]);
  return c;
}

namespace {

long step_count(double t_end, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("integrate: dt must be positive");
  if (!(t_end >= 0.0)) throw PreconditionError("integrate: t_end must be nonnegative");
  return std::max(0L, std::lround(t_end / dt));
}

VectorXd eval_field(const Field& f, double t, const VectorXd& x) {
  VectorXd v;
  try {
    v = f(t, x);
  } catch (const IntegrationError&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrationError(t, e.what());
  }
  if (!all_finite(v)) throw IntegrationError(t, "non-finite vector field value");
  return v;
}

VectorXd rk4_step(const Field& f, double t, const VectorXd& x, double h) {
  const VectorXd k1 = eval_field(f, t, x);
  const VectorXd k2 = eval_field(f, t + 0.5 * h, x + 0.5 * h * k1);
  const VectorXd k3 = eval_field(f, t + 0.5 * h, x + 0.5 * h * k2);
  const VectorXd k4 = eval_field(f, t + h, x + h * k3);
  VectorXd next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!all_finite(next)) throw IntegrationError(t + h, "non-finite state");
  return next;
}

std::vector<double> eval_monitors(const std::vector<Monitor>& monitors, double t, const VectorXd& x) {
  std::vector<double> row;
  row.reserve(monitors.size());
  for (const auto& m : monitors) {
    try {
      row.push_back(m.eval(t, x));
    } catch (const IntegrationError&) {
      throw;
    } catch (const std::exception& e) {
      throw IntegrationError(t, "monitor '" + m.name + "': " + e.what());
    }
  }
  return row;
}

}  // namespace

Trajectory integrate(const Field& field, const VectorXd& x0, double t_end, double dt,
                     const std::vector<Monitor>& monitors, const StepHook& post_step) {
  const long steps = step_count(t_end, dt);
  const double h = steps > 0 ? t_end / double(steps) : 0.0;
  if (!all_finite(x0)) throw IntegrationError(0.0, "non-finite initial state");
  Trajectory tr;
  for (const auto& m : monitors) tr.monitor_names.push_back(m.name);
  tr.t.reserve(std::size_t(steps) + 1);
  tr.x.reserve(std::size_t(steps) + 1);
  tr.t.push_back(0.0);
  tr.x.push_back(x0);
  tr.monitors.push_back(eval_monitors(monitors, 0.0, x0));
  VectorXd x = x0;
  for (long k = 0; k < steps; ++k) {
    const double t = double(k) * h;
    x = rk4_step(field, t, x, h);
    const double tn = double(k + 1) * h;
    if (post_step) {
      try {
        x = post_step(tn, x);
      } catch (const IntegrationError&) {
        throw;
      } catch (const std::exception& e) {
        throw IntegrationError(tn, e.what());
      }
    }
    tr.t.push_back(tn);
    tr.x.push_back(x);
    tr.monitors.push_back(eval_monitors(monitors, tn, x));
  }
  return tr;
}

VectorXd flow(const Field& field, const VectorXd& x0, double t_end, double dt) {
  const long steps = step_count(t_end, dt);
  const double h = steps > 0 ? t_end / double(steps) : 0.0;
  VectorXd x = x0;
  for (long k = 0; k < steps; ++k) x = rk4_step(field, double(k) * h, x, h);
  return x;
}

Field hamiltonian_flow_field(const ScalarFn& K) {
  return [K](double, const VectorXd& x) { return hamiltonian_field(K, x); };
}

std::vector<Monitor> hamiltonian_monitors(const ScalarFn& K) {
  return {
      {"K", [K](double, const VectorXd& x) { return K(x); }},
      {"alpha_res",
       [K](double, const VectorXd& x) {
         const Index n = x.size() / 2;
         const VectorXd v = hamiltonian_field(K, x);
         return x.tail(n).dot(v.head(n)) - K(x);
       }},
  };
}

VectorXd lie_bracket(const std::function<VectorXd(const VectorXd&)>& X,
                     const std::function<VectorXd(const VectorXd&)>& Y, const VectorXd& x) {
  const double h = 1e-5 * (1.0 + x.cwiseAbs().maxCoeff());
  auto directional = [&](const std::function<VectorXd(const VectorXd&)>& F, const VectorXd& dir) {
    const double len = dir.norm();
    if (len == 0.0) return VectorXd::Zero(x.size()).eval();
    const VectorXd u = dir / len;
    return ((F(x + h * u) - F(x - h * u)) * (len / (2.0 * h))).eval();
  };
  const VectorXd Xx = X(x);
  const VectorXd Yx = Y(x);
  return directional(Y, Xx) - directional(X, Yx);
}

VectorXd euler_field(EulerField kind, const VectorXd& x) {
  const Index n = x.size() / 2;
  VectorXd v = VectorXd::Zero(x.size());
  if (kind == EulerField::Z)
    v.tail(n) = x.tail(n);
  else
    v.head(n) = x.head(n);
  return v;
}

VectorXd commutator_residual(const HamiltonianSpec& K, const PhasePoint& pt, EulerField kind) {
  const ScalarFn f = K.K;
  return lie_bracket([f](const VectorXd& x) { return hamiltonian_field(f, x); },
                     [kind](const VectorXd& x) { return euler_field(kind, x); }, pt.state());
}

VectorXd lie_derivative_alpha(const ScalarFn& K, const VectorXd& x) {
  const Index n = x.size() / 2;
  const double h = 1e-5 * (1.0 + x.cwiseAbs().maxCoeff());
  const VectorXd X = hamiltonian_field(K, x);
  const auto p = x.tail(n);
  VectorXd r(2 * n);
  VectorXd xs = x;
  for (Index k = 0; k < 2 * n; ++k) {
    xs[k] = x[k] + h;
    const VectorXd fp = hamiltonian_field(K, xs);
    xs[k] = x[k] - h;
    const VectorXd fm = hamiltonian_field(K, xs);
    xs[k] = x[k];
    const double dpXq = p.dot((fp.head(n) - fm.head(n)) / (2.0 * h));
    r[k] = k < n ? X[n + k] + dpXq : dpXq;
  }
  return r;
}

FlowTransportReport flow_transport_check(const GeneratingFunction& gf, const HamiltonianSpec& K,
                                         double t, const std::vector<VectorXd>& samples, double dt) {
  FlowTransportReport rep;
  const Field f = hamiltonian_flow_field(K.K);
  auto transport = [&](const VectorXd& z) {
    try {
      return flow(f, liouville_point(gf, z).state(), t, dt);
    } catch (const IntegrationError& e) {
      std::ostringstream os;
      os << "flow_transport_check: sample with parameters [" << z.transpose() << "]: " << e.what();
      throw IntegrationError(e.time(), os.str());
    }
  };

  double kmax = 0.0;
  for (const VectorXd& z : samples) {
    const PhasePoint pt = liouville_point(gf, z);
    kmax = std::max(kmax, std::abs(K.K(pt.state())) / point_scale(pt.state()));
  }
  rep.max_K_on_L = kmax;
  rep.invariance_checked = kmax <= 1e-9;

  for (const VectorXd& z : samples) {
    const VectorXd xt = transport(z);
    const PhasePoint pt = PhasePoint::from_state(xt);
    VectorXd zs = z;
    double amax = 0.0;
    for (Index k = 0; k < z.size(); ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(z[k]));
      zs[k] = z[k] + h;
      const VectorXd xp = transport(zs);
      zs[k] = z[k] - h;
      const VectorXd xm = transport(zs);
      zs[k] = z[k];
      const TangentVector v = TangentVector::from_state((xp - xm) / (2.0 * h));
      amax = std::max(amax, std::abs(alpha(pt, v)));
    }
    rep.max_alpha = std::max(rep.max_alpha, amax / point_scale(xt));
    if (rep.invariance_checked)
      rep.max_membership =
          std::max(rep.max_membership, membership_residual(gf, pt).cwiseAbs().maxCoeff());
    ++rep.samples;
  }
  return rep;
}

double scaling_commutation_check(const HamiltonianSpec& K, const PhasePoint& pt, double lambda,
                                 double t, double dt) {
  if (lambda == 0.0) throw PreconditionError("scaling_commutation_check: lambda must be nonzero");
  const Field f = hamiltonian_flow_field(K.K);
  const Index n = pt.dim();
  const VectorXd a = flow(f, scale_costate(pt, lambda).state(), t, dt);
  VectorXd b = flow(f, pt.state(), t, dt);
  b.tail(n) *= lambda;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace ltk
