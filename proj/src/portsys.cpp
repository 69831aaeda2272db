#include <ltk/portsys.hpp>
#include <ltk/log.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace ltk {

namespace {

double point_scale(const PhasePoint& pt) {
  return std::max(1.0, pt.q().cwiseAbs().maxCoeff() * pt.p().cwiseAbs().maxCoeff());
}

void check_index_set(const std::vector<Index>& idx, Index dim, const char* what) {
  if (idx.empty()) throw PreconditionError(std::string("port system: empty ") + what + " index set");
  for (Index i : idx)
    if (i < 0 || i >= dim)
      throw PreconditionError(std::string("port system: ") + what + " index out of range");
}

std::string format_vector(const VectorXd& v) {
  std::ostringstream os;
  os << "[";
  for (Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

template <class T>
Vec<T> take(const Vec<T>& x, Index qoff, Index n, Index total) {
  Vec<T> r(2 * n);
  for (Index i = 0; i < n; ++i) {
    r[i] = x[qoff + i];
    r[n + i] = x[total + qoff + i];
  }
  return r;
}

}  // namespace

std::vector<PhasePoint> probe_points(const GeneratingFunction& gf, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.8, 1.25);
  std::vector<PhasePoint> pts;
  for (const VectorXd& z : sample_params(gf, count, rng)) {
    const PhasePoint pt = liouville_point(gf, z);
    pts.push_back(pt);
    VectorXd p = pt.p();
    for (Index i = 0; i < p.size(); ++i) p[i] *= jitter(rng);
    pts.emplace_back(pt.q(), p);
  }
  return pts;
}

PortSystem make_port_system(std::string name, GeneratingFunction gf, HamiltonianSpec Ka,
                            std::vector<HamiltonianSpec> Kc, std::vector<Index> energy,
                            std::vector<Index> entropy, std::map<std::string, Parameter> params,
                            VectorXd initial) {
  const Index n = gf.dim;
  if (Ka.K.dim() != 2 * n) throw DimensionError("port system '" + name + "': Ka has wrong dimension");
  for (const auto& k : Kc)
    if (k.K.dim() != 2 * n)
      throw DimensionError("port system '" + name + "': control Hamiltonian '" + k.name +
                           "' has wrong dimension");
  check_index_set(energy, n, "energy");
  check_index_set(entropy, n, "entropy");
  if (initial.size() != n) throw DimensionError("port system '" + name + "': initial parameters");

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  for (const VectorXd& z : sample_params(gf, 32, rng)) {
    const PhasePoint pt = liouville_point(gf, z);
    const double s = point_scale(pt);
    auto require_zero = [&](const HamiltonianSpec& h) {
      const double v = h.K(pt.state());
      if (!(std::abs(v) <= 1e-9 * s))
        throw PreconditionError("port system '" + name + "': " + h.name + " = " + std::to_string(v) +
                                " on L at parameters " + format_vector(z));
    };
    require_zero(Ka);
    for (const auto& k : Kc) require_zero(k);
  }
  return {std::move(name), std::move(gf), std::move(Ka), std::move(Kc), std::move(energy),
          std::move(entropy), std::move(params), std::move(initial)};
}

Outputs outputs(const PortSystem& sys, const PhasePoint& pt) {
  if (pt.dim() != sys.dim()) throw DimensionError("outputs: dimension mismatch");
  if (chart_valid(pt.p(), sys.gf.chart)) {
    const double r = membership_residual(sys.gf, pt).cwiseAbs().maxCoeff();
    if (r > 1e-6)
      logging::warn("outputs of '" + sys.name + "' evaluated off L (membership residual " +
                    std::to_string(r) + ")");
  }
  const VectorXd x = pt.state();
  Outputs o;
  o.y_p.resize(Index(sys.inputs()));
  o.y_e.resize(Index(sys.inputs()));
  for (std::size_t k = 0; k < sys.inputs(); ++k) {
    o.y_p[Index(k)] = summed_costate_partial<double>(sys.Kc[k].K, x, sys.energy);
    o.y_e[Index(k)] = summed_costate_partial<double>(sys.Kc[k].K, x, sys.entropy);
  }
  return o;
}

HamiltonianSpec assemble_K(const PortSystem& sys, const VectorXd& u) {
  if (u.size() != Index(sys.inputs()))
    throw DimensionError("assemble_K: expected " + std::to_string(sys.inputs()) + " inputs, got " +
                         std::to_string(u.size()));
  std::vector<ScalarFn> Kc;
  for (const auto& k : sys.Kc) Kc.push_back(k.K);
  const ScalarFn Ka = sys.Ka.K;
  const VectorXd uu = u;
  ScalarFn K(
      Ka.dim(),
      [Ka, Kc, uu](const auto& x) {
        auto s = Ka(x);
        for (std::size_t k = 0; k < Kc.size(); ++k) s += Kc[k](x) * uu[Index(k)];
        return s;
      },
      ScalarFn::Origin::derived, "K");
  return {K, "K", false};
}

InputSignal zero_input(const PortSystem& sys) {
  const Index m = Index(sys.inputs());
  return [m](double) { return VectorXd::Zero(m).eval(); };
}

SimulationResult simulate(const PortSystem& sys, const VectorXd& params, const InputSignal& u,
                          double t_end, double dt, bool project_to_L) {
  const Index n = sys.dim();
  const std::size_t m = sys.inputs();
  const PortSystem* S = &sys;
  auto input = [u, m](double t) {
    VectorXd v = u(t);
    if (v.size() != Index(m))
      throw DimensionError("input signal: expected " + std::to_string(m) + " components");
    return v;
  };
  auto K_at = [S, input](double t, const VectorXd& x) {
    const VectorXd ut = input(t);
    double k = S->Ka.K(x);
    for (std::size_t i = 0; i < S->Kc.size(); ++i) k += ut[Index(i)] * S->Kc[i].K(x);
    return k;
  };
  auto field_at = [S, input](double t, const VectorXd& x) {
    const VectorXd ut = input(t);
    VectorXd v = hamiltonian_field(S->Ka.K, x);
    for (std::size_t i = 0; i < S->Kc.size(); ++i)
      if (ut[Index(i)] != 0.0) v += ut[Index(i)] * hamiltonian_field(S->Kc[i].K, x);
    return v;
  };

  std::vector<Monitor> mons;
  mons.push_back({"E", [S, n](double, const VectorXd& x) {
                    double e = 0.0;
                    for (Index i : S->energy) e += x[i];
                    (void)n;
                    return e;
                  }});
  mons.push_back({"S", [S](double, const VectorXd& x) {
                    double s = 0.0;
                    for (Index i : S->entropy) s += x[i];
                    return s;
                  }});
  for (std::size_t k = 0; k < m; ++k)
    mons.push_back({"y_p" + std::to_string(k + 1), [S, k](double, const VectorXd& x) {
                      return summed_costate_partial<double>(S->Kc[k].K, x, S->energy);
                    }});
  for (std::size_t k = 0; k < m; ++k)
    mons.push_back({"y_e" + std::to_string(k + 1), [S, k](double, const VectorXd& x) {
                      return summed_costate_partial<double>(S->Kc[k].K, x, S->entropy);
                    }});
  mons.push_back({"K_res", K_at});
  mons.push_back({"alpha_res", [K_at, field_at, n](double t, const VectorXd& x) {
                    const VectorXd v = field_at(t, x);
                    return x.tail(n).dot(v.head(n)) - K_at(t, x);
                  }});
  auto drift = [S](double t, const VectorXd& x) {
    const double r = membership_residual(S->gf, PhasePoint::from_state(x)).cwiseAbs().maxCoeff();
    if (!(r <= kMembershipAbort)) {
      std::ostringstream os;
      os << "state left L: membership residual " << r << " exceeds " << kMembershipAbort;
      throw IntegrationError(t, os.str());
    }
    return r;
  };
  auto last_drift = std::make_shared<double>(0.0);
  StepHook retract;
  if (project_to_L) {
    retract = [S, drift, last_drift](double t, const VectorXd& x) {
      *last_drift = drift(t, x);
      return liouville_point(S->gf, params_of(S->gf, PhasePoint::from_state(x))).state();
    };
    mons.push_back({"membership", [last_drift](double, const VectorXd&) { return *last_drift; }});
  } else {
    mons.push_back({"membership", drift});
  }

  const VectorXd x0 = liouville_point(sys.gf, params).state();
  SimulationResult res;
  res.inputs = m;
  res.traj = integrate(field_at, x0, t_end, dt, mons, retract);

  const Trajectory& tr = res.traj;
  const std::size_t N = tr.size();
  res.u.reserve(N);
  for (double t : tr.t) res.u.push_back(input(t));

  const std::size_t iE = 0, iS = 1, iyp = 2, iye = 2 + m;
  const std::size_t imem = tr.monitor_names.size() - 1;
  auto dot_out = [&](std::size_t k, std::size_t base) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += tr.monitors[k][base + j] * res.u[k][Index(j)];
    return s;
  };
  res.delta_E = tr.monitors[N - 1][iE] - tr.monitors[0][iE];
  res.delta_S = tr.monitors[N - 1][iS] - tr.monitors[0][iS];
  res.second_law_min_step = N > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t k = 0; k < N; ++k) res.max_membership = std::max(res.max_membership, tr.monitors[k][imem]);
  for (std::size_t k = 0; k + 1 < N; ++k) {
    const double h = tr.t[k + 1] - tr.t[k];
    res.work_supplied += 0.5 * h * (dot_out(k, iyp) + dot_out(k + 1, iyp));
    const double supplied = 0.5 * h * (dot_out(k, iye) + dot_out(k + 1, iye));
    res.entropy_supplied += supplied;
    const double dS = tr.monitors[k + 1][iS] - tr.monitors[k][iS];
    res.second_law_min_step = std::min(res.second_law_min_step, dS - supplied);
  }
  res.first_law_residual = std::abs(res.delta_E - res.work_supplied);
  return res;
}

GeneratingFunction product_generating_function(const GeneratingFunction& g1,
                                               const GeneratingFunction& g2) {
  const Index N1 = g1.dim, N2 = g2.dim;
  std::vector<Index> I = g1.I;
  for (Index i : g2.I) I.push_back(i + N1);
  std::vector<Index> J = g1.J;
  J.push_back(g2.chart + N1);
  for (Index j : g2.J) J.push_back(j + N1);
  std::sort(J.begin(), J.end());

  const Index ni1 = Index(g1.I.size()), ni2 = Index(g2.I.size());
  const Index ni = ni1 + ni2;
  auto pos_in_J = [&J](Index j) { return Index(std::find(J.begin(), J.end(), j) - J.begin()); };
  std::vector<Index> j1pos, j2pos;
  for (Index j : g1.J) j1pos.push_back(pos_in_J(j));
  for (Index j : g2.J) j2pos.push_back(pos_in_J(j + N1));
  const Index c2pos = pos_in_J(g2.chart + N1);

  const ScalarFn F1 = g1.Fhat, F2 = g2.Fhat;
  ScalarFn Fhat(
      ni + Index(J.size()),
      [F1, F2, ni1, ni2, ni, j1pos, j2pos, c2pos](const auto& w) {
        using T = scalar_of<decltype(w)>;
        Vec<T> a1(ni1 + Index(j1pos.size()));
        for (Index k = 0; k < ni1; ++k) a1[k] = w[k];
        for (std::size_t k = 0; k < j1pos.size(); ++k) a1[ni1 + Index(k)] = w[ni + j1pos[k]];
        const T& gc2 = w[ni + c2pos];
        Vec<T> a2(ni2 + Index(j2pos.size()));
        for (Index k = 0; k < ni2; ++k) a2[k] = w[ni1 + k];
        for (std::size_t k = 0; k < j2pos.size(); ++k) a2[ni2 + Index(k)] = -w[ni + j2pos[k]] / gc2;
        return F1(a1) - gc2 * F2(a2);
      },
      ScalarFn::Origin::derived, "(" + g1.Fhat.name() + ")x(" + g2.Fhat.name() + ")");

  std::vector<std::pair<double, double>> box;
  for (Index k = 0; k < ni1; ++k) box.push_back(g1.box[k]);
  for (Index k = 0; k < ni2; ++k) box.push_back(g2.box[k]);
  box.push_back(g1.box[ni1]);
  for (Index j : J) {
    if (j < N1) {
      const Index k = Index(std::find(g1.J.begin(), g1.J.end(), j) - g1.J.begin());
      box.push_back(g1.box[ni1 + 1 + k]);
    } else if (j == g2.chart + N1) {
      box.push_back(g2.box[ni2]);
    } else {
      const Index k = Index(std::find(g2.J.begin(), g2.J.end(), j - N1) - g2.J.begin());
      box.push_back(g2.box[ni2 + 1 + k]);
    }
  }
  (void)N2;
  return make_generating_function(N1 + N2, g1.chart, I, J, Fhat,
                                  g1.q_homogeneous && g2.q_homogeneous, box);
}

VectorXd product_params(const GeneratingFunction& g1, const GeneratingFunction& g2,
                        const VectorXd& z1, const VectorXd& z2) {
  const Index N1 = g1.dim;
  const Index ni1 = Index(g1.I.size()), ni2 = Index(g2.I.size());
  std::vector<Index> J = g1.J;
  J.push_back(g2.chart + N1);
  for (Index j : g2.J) J.push_back(j + N1);
  std::sort(J.begin(), J.end());
  VectorXd z(g1.dim + g2.dim);
  Index s = 0;
  for (Index k = 0; k < ni1; ++k) z[s++] = z1[k];
  for (Index k = 0; k < ni2; ++k) z[s++] = z2[k];
  z[s++] = z1[ni1];
  for (Index j : J) {
    if (j < N1) {
      const Index k = Index(std::find(g1.J.begin(), g1.J.end(), j) - g1.J.begin());
      z[s++] = z1[ni1 + 1 + k];
    } else if (j == g2.chart + N1) {
      z[s++] = z2[ni2];
    } else {
      const Index k = Index(std::find(g2.J.begin(), g2.J.end(), j - N1) - g2.J.begin());
      z[s++] = z2[ni2 + 1 + k];
    }
  }
  return z;
}

PortSystem interconnect(const PortSystem& sys1, const PortSystem& sys2, const Feedback& fb,
                        std::string name) {
  const Index N1 = sys1.dim(), N2 = sys2.dim(), N = N1 + N2;
  const std::size_t m1 = sys1.inputs(), m2 = sys2.inputs();
  if (fb.u1.size() != m1 || fb.u2.size() != m2)
    throw DimensionError("interconnect: feedback must give one input per port");
  const Index ny = Index(2 * (m1 + m2));
  for (const auto* list : {&fb.u1, &fb.u2})
    for (const ScalarFn& f : *list)
      if (f.dim() != ny)
        throw DimensionError("interconnect: feedback functions take (y_p1, y_e1, y_p2, y_e2) of length " +
                             std::to_string(ny));
  if (name.empty()) name = sys1.name + "+" + sys2.name;

  std::vector<ScalarFn> Kc1, Kc2;
  for (const auto& k : sys1.Kc) Kc1.push_back(k.K);
  for (const auto& k : sys2.Kc) Kc2.push_back(k.K);
  const ScalarFn Ka1 = sys1.Ka.K, Ka2 = sys2.Ka.K;
  const std::vector<Index> E1 = sys1.energy, S1 = sys1.entropy, E2 = sys2.energy, S2 = sys2.entropy;
  const std::vector<ScalarFn> u1 = fb.u1, u2 = fb.u2;

  ScalarFn Ka(
      2 * N,
      [=](const auto& x) {
        using T = scalar_of<decltype(x)>;
        const Vec<T> x1 = take<T>(x, 0, N1, N);
        const Vec<T> x2 = take<T>(x, N1, N2, N);
        Vec<T> y(ny);
        Index s = 0;
        for (const auto& k : Kc1) y[s++] = summed_costate_partial<T>(k, x1, E1);
        for (const auto& k : Kc1) y[s++] = summed_costate_partial<T>(k, x1, S1);
        for (const auto& k : Kc2) y[s++] = summed_costate_partial<T>(k, x2, E2);
        for (const auto& k : Kc2) y[s++] = summed_costate_partial<T>(k, x2, S2);
        T K = Ka1(x1) + Ka2(x2);
        for (std::size_t k = 0; k < Kc1.size(); ++k) K += Kc1[k](x1) * u1[k](y);
        for (std::size_t k = 0; k < Kc2.size(); ++k) K += Kc2[k](x2) * u2[k](y);
        return K;
      },
      ScalarFn::Origin::derived, "Ka");

  GeneratingFunction gf = product_generating_function(sys1.gf, sys2.gf);
  std::vector<Index> energy = E1, entropy = S1;
  for (Index i : E2) energy.push_back(i + N1);
  for (Index i : S2) entropy.push_back(i + N1);

  std::mt19937_64 rng(0xc0ffee);
  double worst = std::numeric_limits<double>::infinity();
  VectorXd worst_z;
  for (const VectorXd& z : sample_params(gf, 64, rng)) {
    const double v = summed_costate_partial<double>(Ka, liouville_point(gf, z).state(), entropy);
    if (v < worst) {
      worst = v;
      worst_z = z;
    }
  }
  if (worst < -1e-12)
    throw PreconditionError("interconnect '" + name + "': composed Ka violates the Second Law (" +
                            std::to_string(worst) + ") at parameters " + format_vector(worst_z));

  HamiltonianSpec Ka_spec = register_hamiltonian(Ka, "Ka", probe_points(gf, 8, 11));
  std::map<std::string, Parameter> params;
  for (const auto& [k, v] : sys1.params) params["1." + k] = v;
  for (const auto& [k, v] : sys2.params) params["2." + k] = v;
  VectorXd init = product_params(sys1.gf, sys2.gf, sys1.initial, sys2.initial);
  return make_port_system(std::move(name), std::move(gf), std::move(Ka_spec), {}, std::move(energy),
                          std::move(entropy), std::move(params), std::move(init));
}

bool ValidationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult& ValidationReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw PreconditionError("validation report has no check '" + name + "'");
}

namespace {

/// Σ_{i ∈ idx} ∂K/∂p_i written in chart c through K̂ = dehomogenize(K, c):
/// (Σ γ ∂K̂/∂γ - K̂) for i = c and ∂K̂/∂γ_i otherwise.
double chart_form(const ScalarFn& Khat, const ContactPoint& cpt, const std::vector<Index>& idx) {
  const Index n = cpt.dim();
  const VectorXd y = cpt.state();
  double k = 0.0;
  const VectorXd g = grad<double>(Khat, y, &k);
  double s = 0.0;
  for (Index i : idx) {
    if (i == cpt.chart)
      s += cpt.gamma.dot(g.tail(n - 1)) - k;
    else
      s += g[n + (i < cpt.chart ? i : i - 1)];
  }
  return s;
}

}  // namespace

ValidationReport validate(const PortSystem& sys, std::size_t n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<VectorXd> samples = sample_params(sys.gf, n_samples, rng);
  std::uniform_real_distribution<double> jitter(0.8, 1.25);

  double k_on_L = 0.0, first = 0.0, second_min = std::numeric_limits<double>::infinity();
  double euler = 0.0, form_e = 0.0, form_s_min = std::numeric_limits<double>::infinity();
  double out_inv = 0.0;
  const ScalarFn Khat_e = dehomogenize(sys.Ka.K, int(sys.energy.front()));
  const ScalarFn Khat_s = dehomogenize(sys.Ka.K, int(sys.entropy.front()));
  std::vector<const HamiltonianSpec*> all{&sys.Ka};
  for (const auto& k : sys.Kc) all.push_back(&k);

  for (const VectorXd& z : samples) {
    const PhasePoint pt = liouville_point(sys.gf, z);
    const VectorXd x = pt.state();
    const double scale = point_scale(pt);
    VectorXd pj = pt.p();
    for (Index i = 0; i < pj.size(); ++i) pj[i] *= jitter(rng);
    const PhasePoint off(pt.q(), pj);

    for (const auto* h : all) {
      k_on_L = std::max(k_on_L, std::abs(h->K(x)) / scale);
      for (const PhasePoint& q : {pt, off}) {
        const double kv = h->K(q.state());
        euler = std::max(euler, std::abs(euler_residual(h->K, q, 1, EulerField::Z)) / (1.0 + std::abs(kv)));
        if (h->degree1_q)
          euler = std::max(euler, std::abs(euler_residual(h->K, q, 1, EulerField::W)) / (1.0 + std::abs(kv)));
      }
    }
    first = std::max(first, std::abs(summed_costate_partial<double>(sys.Ka.K, x, sys.energy)));
    second_min = std::min(second_min, summed_costate_partial<double>(sys.Ka.K, x, sys.entropy));

    form_e = std::max(form_e, std::abs(chart_form(Khat_e, project(pt, int(sys.energy.front())), sys.energy)));
    form_s_min = std::min(form_s_min, chart_form(Khat_s, project(pt, int(sys.entropy.front())), sys.entropy));

    if (sys.inputs() > 0) {
      const Outputs a = outputs(sys, pt);
      const Outputs b = outputs(sys, scale_costate(pt, 7.0));
      const double d = std::max((a.y_p - b.y_p).cwiseAbs().maxCoeff(), (a.y_e - b.y_e).cwiseAbs().maxCoeff());
      const double mag = std::max(a.y_p.cwiseAbs().maxCoeff(), a.y_e.cwiseAbs().maxCoeff());
      out_inv = std::max(out_inv, d / (1.0 + mag));
    }
  }
  if (samples.empty()) second_min = form_s_min = 0.0;

  ValidationReport rep;
  rep.samples = samples.size();
  auto add = [&rep](std::string name, double r, double tol) {
    rep.checks.push_back({std::move(name), r, tol, r <= tol});
  };
  add("K_vanishes_on_L", k_on_L, 1e-9);
  add("first_law", first, 1e-8);
  add("second_law", std::max(0.0, -second_min), 1e-12);
  add("euler_degree1", euler, 1e-9);
  add("energy_chart_form", form_e, 1e-8);
  add("entropy_chart_form", std::max(0.0, -form_s_min), 1e-12);
  if (sys.inputs() > 0) add("outputs_projective", out_inv, 1e-12);
  if (sys.gf.q_homogeneous && !sys.gf.I.empty()) {
    const GibbsDuhemReport gd = gibbs_duhem_check(sys.gf, samples);
    add("gibbs_duhem_sum_qp", gd.max_sum_qp, 1e-10);
    add("gibbs_duhem_beta", gd.max_beta, 1e-9);
  }
  return rep;
}

// Built-ins.

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw PreconditionError(std::string(what) + " must be positive");
}
void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw PreconditionError(std::string(what) + " must be nonnegative");
}

struct GasLaw {
  GasPistonParams p;

  template <class T>
  T U_gas(const T& S, const T& V) const {
    using std::exp;
    using std::pow;
    return p.U0 * pow(p.V0 / V, p.R / p.cv) * exp((S - p.S0) / p.cv);
  }
};

}  // namespace

ScalarFn gas_piston_autonomous(const GasPistonParams& p) {
  const GasLaw law{p};
  return ScalarFn(
      8,
      [law](const auto& x) {
        const auto& P = law.p;
        const auto S = x[1];
        const auto V = x[2];
        const auto pi = x[3];
        const auto Ug = law.U_gas(S, V);
        const auto U_S = Ug / P.cv;
        const auto U_V = -(P.R / P.cv) * Ug / V + P.p_ext;
        const auto v = pi / P.m;
        return x[6] * v + x[7] * (-U_V - P.d * v) + x[5] * (P.d * v * v / U_S);
      },
      ScalarFn::Origin::builtin, "Ka");
}

PortSystem gas_piston_damper(const GasPistonParams& p) {
  require_positive(p.m, "gas_piston_damper: m");
  require_nonnegative(p.d, "gas_piston_damper: d");
  require_positive(p.U0, "gas_piston_damper: U0");
  require_positive(p.V0, "gas_piston_damper: V0");
  require_positive(p.R, "gas_piston_damper: R");
  require_positive(p.cv, "gas_piston_damper: cv");
  require_nonnegative(p.p_ext, "gas_piston_damper: p_ext");
  if (p.chart != 0 && p.chart != 1) throw PreconditionError("gas_piston_damper: chart must be 0 or 1");
  const GasLaw law{p};

  ScalarFn F0(
      3,
      [law](const auto& w) {
        const auto& P = law.p;
        return law.U_gas(w[0], w[1]) + P.p_ext * w[1] + w[2] * w[2] / (2.0 * P.m);
      },
      ScalarFn::Origin::builtin, "U(S,V)+pi^2/2m");
  GeneratingFunction gf0 = make_generating_function(
      4, 0, {1, 2, 3}, {}, F0, false, {{-1.0, 1.0}, {0.5, 2.0}, {-1.0, 1.0}, {-2.0, -0.5}});
  VectorXd init0(4);
  init0 << 0.0, 1.0, 0.0, -1.0;

  GeneratingFunction gf = gf0;
  VectorXd init = init0;
  if (p.chart == 1) {
    ScalarFn F1(
        3,
        [law](const auto& w) {
          using std::log;
          const auto& P = law.p;
          const auto Ug = w[0] - w[2] * w[2] / (2.0 * P.m) - P.p_ext * w[1];
          if (!(value_of(Ug) > 0.0))
            throw DomainError("gas_piston_damper: E below kinetic and load energy");
          return P.S0 + P.cv * log(Ug / P.U0) + P.R * log(w[1] / P.V0);
        },
        ScalarFn::Origin::builtin, "S(E,V,pi)");
    const double lo = 1.0 / (2.0 * p.m) + 2.0 * p.p_ext + 0.5 * p.U0;
    gf = make_generating_function(4, 1, {0, 2, 3}, {}, F1, false,
                                  {{lo, lo + 2.5 * p.U0}, {0.5, 2.0}, {-1.0, 1.0}, {0.5, 2.0}});
    const PhasePoint x0 = liouville_point(gf0, init0);
    init << x0.q()[0], x0.q()[2], x0.q()[3], x0.p()[1];
  }

  const std::vector<PhasePoint> probes = probe_points(gf, 8, 3);
  HamiltonianSpec Ka = register_hamiltonian(gas_piston_autonomous(p), "Ka", probes);
  ScalarFn kc(
      8, [m = p.m](const auto& x) { return x[7] + x[4] * x[3] / m; }, ScalarFn::Origin::builtin,
      "Kc");
  HamiltonianSpec Kc = register_hamiltonian(kc, "Kc", probes);

  std::map<std::string, Parameter> params{
      {"m", {p.m, "kg"}},         {"d", {p.d, "N s/m"}},     {"U0", {p.U0, "J"}},
      {"V0", {p.V0, "m^3"}},      {"S0", {p.S0, "J/K"}},     {"R", {p.R, "J/K"}},
      {"cv", {p.cv, "J/K"}},      {"p_ext", {p.p_ext, "Pa"}}, {"chart", {double(p.chart), "-"}},
  };
  return make_port_system("gas_piston_damper", std::move(gf), std::move(Ka), {std::move(Kc)}, {0},
                          {1}, std::move(params), init);
}

PortSystem heat_compartment(const HeatCompartmentParams& p, double T0) {
  require_positive(p.C, "heat_compartment: C");
  require_positive(p.T_ref, "heat_compartment: T_ref");
  require_positive(T0, "heat_compartment: T0");
  const double C = p.C, Tr = p.T_ref;
  ScalarFn E(
      1,
      [C, Tr](const auto& w) {
        using std::exp;
        return C * Tr * exp(w[0] / C);
      },
      ScalarFn::Origin::builtin, "E(S)");
  GeneratingFunction gf = make_generating_function(2, 0, {1}, {}, E, false, {{-1.0, 1.0}, {-2.0, -0.5}});
  const std::vector<PhasePoint> probes = probe_points(gf, 8, 5);
  HamiltonianSpec Ka = register_hamiltonian(constant(4, 0.0), "Ka", probes);
  ScalarFn kc(
      4,
      [C, Tr](const auto& x) {
        using std::exp;
        return x[3] / (Tr * exp(x[1] / C)) + x[2];
      },
      ScalarFn::Origin::builtin, "Kc");
  HamiltonianSpec Kc = register_hamiltonian(kc, "Kc", probes);
  VectorXd init(2);
  init << C * std::log(T0 / Tr), -1.0;
  return make_port_system("heat_compartment", std::move(gf), std::move(Ka), {std::move(Kc)}, {0}, {1},
                          {{"C", {C, "J/K"}}, {"T_ref", {Tr, "K"}}, {"T0", {T0, "K"}}}, init);
}

PortSystem heat_exchanger(const HeatExchangerParams& p) {
  require_positive(p.lambda, "heat_exchanger: lambda");
  const PortSystem c1 = heat_compartment(p.c1, p.T1);
  const PortSystem c2 = heat_compartment(p.c2, p.T2);
  const double lambda = p.lambda;
  // y = (y_p1, y_e1, y_p2, y_e2); y_e = 1/T.
  auto flow = [lambda](double sign) {
    return ScalarFn(
        4, [lambda, sign](const auto& y) { return sign * lambda * (1.0 / y[1] - 1.0 / y[3]); },
        ScalarFn::Origin::builtin, sign < 0 ? "u1" : "u2");
  };
  PortSystem sys = interconnect(c1, c2, {{flow(-1.0)}, {flow(1.0)}}, "heat_exchanger");
  sys.params["lambda"] = {lambda, "W/K"};
  return sys;
}

PortSystem ideal_gas_SVN(const IdealGasSVNParams& p) {
  require_positive(p.cv, "ideal_gas_SVN: cv");
  require_positive(p.R, "ideal_gas_SVN: R");
  require_positive(p.T_ref, "ideal_gas_SVN: T_ref");
  require_positive(p.v0, "ideal_gas_SVN: v0");
  auto U = [p](const auto& S, const auto& V, const auto& N) {
    using std::exp;
    using std::pow;
    return N * p.cv * p.T_ref * pow(N * p.v0 / V, p.R / p.cv) * exp((S / N - p.s0) / p.cv);
  };
  ScalarFn F(
      3, [U](const auto& w) { return U(w[0], w[1], w[2]); }, ScalarFn::Origin::builtin, "U(S,V,N)");
  GeneratingFunction gf = make_generating_function(4, 0, {1, 2, 3}, {}, F, true,
                                                   {{-1.0, 1.0}, {0.5, 2.0}, {0.5, 2.0}, {-2.0, -0.5}});
  const std::vector<PhasePoint> probes = probe_points(gf, 8, 7);
  HamiltonianSpec Ka = register_hamiltonian(constant(8, 0.0), "Ka", probes, true);
  const double ratio = p.R / p.cv;
  ScalarFn kc(
      8,
      [U, ratio](const auto& x) {
        const auto U_V = -ratio * U(x[1], x[2], x[3]) / x[2];
        return x[2] * (x[6] + x[4] * U_V);
      },
      ScalarFn::Origin::builtin, "Kc");
  HamiltonianSpec Kc = register_hamiltonian(kc, "Kc", probes, true);
  VectorXd init(4);
  init << 0.0, 1.0, 1.0, -1.0;
  return make_port_system("ideal_gas_SVN", std::move(gf), std::move(Ka), {std::move(Kc)}, {0}, {1},
                          {{"cv", {p.cv, "J/K"}},
                           {"R", {p.R, "J/K"}},
                           {"T_ref", {p.T_ref, "K"}},
                           {"v0", {p.v0, "m^3"}},
                           {"s0", {p.s0, "J/K"}}},
                          init);
}

std::vector<std::string> builtin_names() {
  return {"gas_piston_damper", "heat_compartment", "heat_exchanger", "ideal_gas_SVN"};
}

PortSystem builtin(const std::string& name, const std::map<std::string, double>& overrides) {
  auto apply = [&](std::map<std::string, double*> slots) {
    for (const auto& [k, v] : overrides) {
      auto it = slots.find(k);
      if (it == slots.end()) throw PreconditionError("built-in '" + name + "' has no parameter '" + k + "'");
      *it->second = v;
    }
  };
  if (name == "gas_piston_damper") {
    GasPistonParams p;
    double chart = 0.0;
    apply({{"m", &p.m}, {"d", &p.d}, {"U0", &p.U0}, {"V0", &p.V0}, {"S0", &p.S0}, {"R", &p.R},
           {"cv", &p.cv}, {"p_ext", &p.p_ext}, {"chart", &chart}});
    if (chart != 0.0 && chart != 1.0) throw PreconditionError("gas_piston_damper: chart must be 0 or 1");
    p.chart = int(chart);
    return gas_piston_damper(p);
  }
  if (name == "heat_compartment") {
    HeatCompartmentParams p;
    double T0 = 1.0;
    apply({{"C", &p.C}, {"T_ref", &p.T_ref}, {"T0", &T0}});
    return heat_compartment(p, T0);
  }
  if (name == "heat_exchanger") {
    HeatExchangerParams p;
    apply({{"C1", &p.c1.C}, {"C2", &p.c2.C}, {"T_ref1", &p.c1.T_ref}, {"T_ref2", &p.c2.T_ref},
           {"lambda", &p.lambda}, {"T1", &p.T1}, {"T2", &p.T2}});
    return heat_exchanger(p);
  }
  if (name == "ideal_gas_SVN") {
    IdealGasSVNParams p;
    apply({{"cv", &p.cv}, {"R", &p.R}, {"T_ref", &p.T_ref}, {"v0", &p.v0}, {"s0", &p.s0}});
    return ideal_gas_SVN(p);
  }
  throw PreconditionError("unknown built-in system '" + name + "'");
}

}  // namespace ltk
