#include <ltk/submanifold.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace ltk {

namespace {

double point_scale(const PhasePoint& pt) {
  return std::max(1.0, pt.q().cwiseAbs().maxCoeff() * pt.p().cwiseAbs().maxCoeff());
}

Index gamma_slot(Index j, int chart) { return j < chart ? j : j - 1; }

}  // namespace

GeneratingFunction make_generating_function(Index dim, int chart, std::vector<Index> I,
                                            std::vector<Index> J, ScalarFn Fhat,
                                            bool q_homogeneous,
                                            std::vector<std::pair<double, double>> box) {
  if (dim < 1) throw PreconditionError("generating function: dimension must be positive");
  if (chart < 0 || chart >= dim) throw PreconditionError("generating function: chart out of range");
  std::sort(I.begin(), I.end());
  std::sort(J.begin(), J.end());
  std::set<Index> seen;
  for (Index i : I) seen.insert(i);
  for (Index j : J) {
    if (seen.count(j)) throw PreconditionError("generating function: I and J overlap");
    seen.insert(j);
  }
  if (seen.count(chart)) throw PreconditionError("generating function: chart index in I or J");
  if (static_cast<Index>(seen.size()) != dim - 1 || I.size() + J.size() != seen.size())
    throw PreconditionError("generating function: I ∪ J must cover all non-chart indices once");
  for (Index i : seen)
    if (i < 0 || i >= dim) throw PreconditionError("generating function: index out of range");
  if (Fhat.dim() != static_cast<Index>(I.size() + J.size()))
    throw DimensionError("generating function: F̂ must take |I| + |J| arguments");
  if (static_cast<Index>(box.size()) != dim)
    throw DimensionError("generating function: sampling box needs one range per parameter");
  if (box[I.size()].first <= 0.0 && box[I.size()].second >= 0.0)
    throw PreconditionError("generating function: chart costate range must exclude zero");

  GeneratingFunction gf{dim, chart, std::move(I), std::move(J), std::move(Fhat), q_homogeneous,
                        std::move(box)};

  if (q_homogeneous) {
    std::mt19937_64 rng(0x5eed);
    VectorXd w = VectorXd::Zero(gf.Fhat.dim());
    for (const VectorXd& z : sample_params(gf, 16, rng)) {
      VectorXd arg(gf.Fhat.dim());
      const Index ni = static_cast<Index>(gf.I.size());
      for (Index k = 0; k < ni; ++k) arg[k] = z[k];
      for (Index k = 0; k < static_cast<Index>(gf.J.size()); ++k) arg[ni + k] = z[ni + 1 + k] / (-z[ni]);
      w.setZero();
      w.head(ni) = arg.head(ni);
      const double f = gf.Fhat(arg);
      const double r = weighted_partial<double>(gf.Fhat, arg, w) - f;
      if (std::abs(r) > 1e-9 * std::max(1.0, std::abs(f)))
        throw PreconditionError("generating function declared q-homogeneous but Σ q_i ∂F̂/∂q_i - F̂ = " +
                                std::to_string(r));
    }
  }
  return gf;
}

expr::Layout generating_layout(int chart, const std::vector<Index>& I, const std::vector<Index>& J) {
  (void)chart;
  expr::Layout l;
  Index k = 0;
  for (Index i : I) l.slot("q" + std::to_string(i), k++);
  for (Index j : J) l.slot("gamma" + std::to_string(j), k++);
  return l;
}

ScalarFn lift_generating_function(const GeneratingFunction& gf) {
  const Index ni = static_cast<Index>(gf.I.size());
  const Index nj = static_cast<Index>(gf.J.size());
  const ScalarFn Fhat = gf.Fhat;
  return ScalarFn(
      gf.dim,
      [Fhat, ni, nj](const auto& z) {
        using T = scalar_of<decltype(z)>;
        const T& pc = z[ni];
        if (value_of(pc) == 0.0) throw DomainError("lifted generating function evaluated at p_c = 0");
        const T neg_pc = -pc;
        Vec<T> arg(ni + nj);
        for (Index k = 0; k < ni; ++k) arg[k] = z[k];
        for (Index k = 0; k < nj; ++k) arg[ni + k] = z[ni + 1 + k] / neg_pc;
        return neg_pc * Fhat(arg);
      },
      ScalarFn::Origin::derived, "F");
}

PhasePoint liouville_point(const GeneratingFunction& gf, const VectorXd& params) {
  if (params.size() != gf.dim) throw DimensionError("liouville_point: wrong parameter count");
  const Index ni = static_cast<Index>(gf.I.size());
  if (params[ni] == 0.0) throw PreconditionError("liouville_point: p_c must be nonzero");
  const ScalarFn F = lift_generating_function(gf);
  const VectorXd g = grad(F, params);
  VectorXd q(gf.dim), p(gf.dim);
  for (Index k = 0; k < ni; ++k) {
    q[gf.I[k]] = params[k];
    p[gf.I[k]] = g[k];
  }
  q[gf.chart] = -g[ni];
  p[gf.chart] = params[ni];
  for (std::size_t k = 0; k < gf.J.size(); ++k) {
    const Index s = ni + 1 + Index(k);
    q[gf.J[k]] = -g[s];
    p[gf.J[k]] = params[s];
  }
  return PhasePoint(q, p);
}

ContactPoint legendre_point(const GeneratingFunction& gf, const VectorXd& w) {
  if (w.size() != gf.Fhat.dim()) throw DimensionError("legendre_point: wrong parameter count");
  const Index ni = static_cast<Index>(gf.I.size());
  double f = 0.0;
  const VectorXd g = grad<double>(gf.Fhat, w, &f);
  ContactPoint c;
  c.chart = gf.chart;
  c.q.resize(gf.dim);
  c.gamma.resize(gf.dim - 1);
  double gj_dot = 0.0;
  for (Index k = 0; k < ni; ++k) {
    c.q[gf.I[k]] = w[k];
    c.gamma[gamma_slot(gf.I[k], gf.chart)] = g[k];
  }
  for (std::size_t k = 0; k < gf.J.size(); ++k) {
    const Index s = ni + Index(k);
    c.q[gf.J[k]] = -g[s];
    c.gamma[gamma_slot(gf.J[k], gf.chart)] = w[s];
    gj_dot += w[s] * g[s];
  }
  c.q[gf.chart] = f - gj_dot;
  return c;
}

VectorXd params_of(const GeneratingFunction& gf, const PhasePoint& pt) {
  if (pt.dim() != gf.dim) throw DimensionError("params_of: dimension mismatch");
  const Index ni = static_cast<Index>(gf.I.size());
  VectorXd z(gf.dim);
  for (Index k = 0; k < ni; ++k) z[k] = pt.q()[gf.I[k]];
  z[ni] = pt.p()[gf.chart];
  for (std::size_t k = 0; k < gf.J.size(); ++k) z[ni + 1 + Index(k)] = pt.p()[gf.J[k]];
  return z;
}

VectorXd membership_residual(const GeneratingFunction& gf, const PhasePoint& pt) {
  if (pt.dim() != gf.dim) throw DimensionError("membership_residual: dimension mismatch");
  if (!chart_valid(pt.p(), gf.chart)) throw ChartDegenerateError(gf.chart, best_chart(pt.p()));
  const Index ni = static_cast<Index>(gf.I.size());
  const Index nj = static_cast<Index>(gf.J.size());
  const VectorXd z = params_of(gf, pt);
  const VectorXd g = grad(lift_generating_function(gf), z);
  VectorXd r(gf.dim);
  r[0] = pt.q()[gf.chart] + g[ni];
  for (Index k = 0; k < nj; ++k) r[1 + k] = pt.q()[gf.J[k]] + g[ni + 1 + k];
  for (Index k = 0; k < ni; ++k) r[1 + nj + k] = pt.p()[gf.I[k]] - g[k];
  return r;
}

std::vector<TangentVector> tangent_basis(const GeneratingFunction& gf, const VectorXd& params) {
  std::vector<TangentVector> basis;
  basis.reserve(static_cast<std::size_t>(params.size()));
  VectorXd z = params;
  for (Index k = 0; k < params.size(); ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(params[k]));
    z[k] = params[k] + h;
    const VectorXd xp = liouville_point(gf, z).state();
    z[k] = params[k] - h;
    const VectorXd xm = liouville_point(gf, z).state();
    z[k] = params[k];
    basis.push_back(TangentVector::from_state((xp - xm) / (2.0 * h)));
  }
  return basis;
}

std::vector<VectorXd> sample_params(const GeneratingFunction& gf, std::size_t count,
                                    std::mt19937_64& rng) {
  std::vector<VectorXd> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    VectorXd z(gf.dim);
    for (Index k = 0; k < gf.dim; ++k) {
      std::uniform_real_distribution<double> u(gf.box[k].first, gf.box[k].second);
      z[k] = u(rng);
    }
    out.push_back(z);
  }
  return out;
}

double alpha_vanishing_residual(const GeneratingFunction& gf, const VectorXd& params) {
  const PhasePoint pt = liouville_point(gf, params);
  double m = 0.0;
  for (const auto& v : tangent_basis(gf, params)) m = std::max(m, std::abs(alpha(pt, v)));
  return m / point_scale(pt);
}

GibbsDuhemReport gibbs_duhem_check(const GeneratingFunction& gf, const std::vector<VectorXd>& samples) {
  if (!gf.q_homogeneous)
    throw PreconditionError("gibbs_duhem_check: generating function not declared q-homogeneous");
  if (gf.I.empty())
    throw PreconditionError("gibbs_duhem_check: homogeneity in q fails for I = ∅");
  GibbsDuhemReport rep;
  constexpr double h = 1e-5;
  for (const VectorXd& z : samples) {
    const PhasePoint pt = liouville_point(gf, z);
    const double scale = point_scale(pt);
    rep.max_sum_qp = std::max(rep.max_sum_qp, std::abs(pt.q().dot(pt.p())) / scale);
    for (const auto& v : tangent_basis(gf, z))
      rep.max_beta = std::max(rep.max_beta, std::abs(beta(pt, v)) / scale);
    const VectorXd rp = membership_residual(gf, PhasePoint((1.0 + h) * pt.q(), pt.p()));
    const VectorXd rm = membership_residual(gf, PhasePoint((1.0 - h) * pt.q(), pt.p()));
    rep.max_w_tangency =
        std::max(rep.max_w_tangency, ((rp - rm) / (2.0 * h)).cwiseAbs().maxCoeff() / scale);
    ++rep.samples;
  }
  return rep;
}

Index specific_reference(const GeneratingFunction& gf) {
  if (gf.I.empty()) throw PreconditionError("specific form needs a nonempty I");
  return gf.I.front();
}

ScalarFn specific_form(const GeneratingFunction& gf) {
  if (!gf.J.empty()) throw PreconditionError("specific_form: requires J = ∅");
  if (!gf.q_homogeneous) throw PreconditionError("specific_form: requires q-homogeneous F̂");
  const Index ni = static_cast<Index>(gf.I.size());
  const ScalarFn Fhat = gf.Fhat;
  return ScalarFn(
      ni - 1,
      [Fhat, ni](const auto& eps) {
        using T = scalar_of<decltype(eps)>;
        Vec<T> q(ni);
        q[0] = T(1.0);
        for (Index k = 1; k < ni; ++k) q[k] = eps[k - 1];
        return Fhat(q);
      },
      ScalarFn::Origin::derived, "Fbar");
}

double specific_identity_residual(const GeneratingFunction& gf, const VectorXd& qI) {
  const ScalarFn Fbar = specific_form(gf);
  const double qref = qI[0];
  if (std::abs(qref) <= kReferenceThreshold * qI.cwiseAbs().maxCoeff())
    throw PreconditionError("specific_identity_residual: reference extensive variable ~ 0");
  const double f = gf.Fhat(qI);
  const double fb = Fbar(VectorXd(qI.tail(qI.size() - 1) / qref));
  return std::abs(f - qref * fb) / std::max(1.0, std::abs(f));
}

VectorXd ReducedPoint::state() const {
  VectorXd y(eps.size() + gamma.size());
  y << eps, gamma;
  return y;
}

ReducedPoint ReducedPoint::from_state(int chart, Index ref, const VectorXd& y) {
  const Index n = y.size() / 2;
  return {chart, ref, y.head(n), y.tail(n)};
}

ReducedPoint reduced_point(const GeneratingFunction& gf, const VectorXd& qI) {
  const ScalarFn Fbar = specific_form(gf);
  const Index ref = specific_reference(gf);
  const Index ni = static_cast<Index>(gf.I.size());
  if (qI.size() != ni) throw DimensionError("reduced_point: expected q_I");
  const double qref = qI[0];
  if (std::abs(qref) <= kReferenceThreshold * qI.cwiseAbs().maxCoeff())
    throw PreconditionError("reduced_point: reference extensive variable ~ 0");

  const VectorXd e = qI.tail(ni - 1) / qref;  // eps for I without ref
  double fbar = 0.0;
  const VectorXd g = grad<double>(Fbar, e, &fbar);
  if (ni == 1) fbar = Fbar(e);

  ReducedPoint r;
  r.chart = gf.chart;
  r.ref = ref;
  r.eps.resize(gf.dim - 1);
  r.gamma.resize(gf.dim - 1);
  auto eps_slot = [ref](Index j) { return j < ref ? j : j - 1; };
  r.eps[eps_slot(gf.chart)] = fbar;
  r.gamma[gamma_slot(ref, gf.chart)] = fbar - e.dot(g);
  for (Index k = 1; k < ni; ++k) {
    const Index j = gf.I[k];
    r.eps[eps_slot(j)] = e[k - 1];
    r.gamma[gamma_slot(j, gf.chart)] = g[k - 1];
  }
  return r;
}

ReducedPoint reduce(const PhasePoint& pt, int chart, Index ref) {
  const Index n = pt.dim();
  if (ref == chart) throw PreconditionError("reduce: reference index must differ from the chart");
  const double qref = pt.q()[ref];
  if (std::abs(qref) <= kReferenceThreshold * pt.q().cwiseAbs().maxCoeff() || qref == 0.0)
    throw PreconditionError("reduce: reference extensive variable ~ 0");
  const ContactPoint c = project(pt, chart);
  ReducedPoint r;
  r.chart = chart;
  r.ref = ref;
  r.gamma = c.gamma;
  r.eps.resize(n - 1);
  Index k = 0;
  for (Index j : complement(n, ref)) r.eps[k++] = pt.q()[j] / qref;
  return r;
}

}  // namespace ltk
