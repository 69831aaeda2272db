#include <ltk/geometry.hpp>
#include <ltk/log.hpp>

#include <cmath>
#include <sstream>

namespace ltk {

namespace {

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
}

template <class T>
double max_abs(const Vec<T>& v) {
  double m = 0.0;
  for (Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(value_of(v[i])));
  return m;
}

}  // namespace

VectorXd TangentVector::state() const {
  VectorXd v(vq.size() + vp.size());
  v << vq, vp;
  return v;
}

TangentVector TangentVector::from_state(const VectorXd& v) {
  const Index n = v.size() / 2;
  return {v.head(n), v.tail(n)};
}

PhasePoint::PhasePoint(VectorXd q, VectorXd p) : q_(std::move(q)), p_(std::move(p)) {
  require_same_dim(q_.size(), p_.size(), "PhasePoint");
  if (q_.size() == 0) throw DimensionError("PhasePoint: empty");
  if (!(p_.cwiseAbs().maxCoeff() > 0.0))
    throw PreconditionError("PhasePoint: zero costate (cotangent bundle without zero section)");
}

PhasePoint PhasePoint::from_state(const VectorXd& x) {
  if (x.size() % 2 != 0) throw DimensionError("PhasePoint::from_state: odd state length");
  const Index n = x.size() / 2;
  return PhasePoint(x.head(n), x.tail(n));
}

VectorXd PhasePoint::state() const {
  VectorXd x(2 * dim());
  x << q_, p_;
  return x;
}

VectorXd ContactPoint::state() const {
  VectorXd y(q.size() + gamma.size());
  y << q, gamma;
  return y;
}

ContactPoint ContactPoint::from_state(int chart, const VectorXd& y) {
  if (y.size() % 2 != 1) throw DimensionError("ContactPoint::from_state: expected odd length");
  const Index n = (y.size() + 1) / 2;
  return {chart, y.head(n), y.tail(n - 1)};
}

std::vector<Index> complement(Index dim, Index skip) {
  std::vector<Index> r;
  r.reserve(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i)
    if (i != skip) r.push_back(i);
  return r;
}

double alpha(const PhasePoint& pt, const TangentVector& v) {
  require_same_dim(pt.dim(), v.vq.size(), "alpha");
  require_same_dim(pt.dim(), v.vp.size(), "alpha");
  return liouville_pairing(pt.p(), v.vq);
}

double beta(const PhasePoint& pt, const TangentVector& v) {
  require_same_dim(pt.dim(), v.vq.size(), "beta");
  require_same_dim(pt.dim(), v.vp.size(), "beta");
  return pt.q().dot(v.vp);
}

double euler_residual(const ScalarFn& K, const PhasePoint& pt, int r, EulerField wrt) {
  const Index n = pt.dim();
  require_same_dim(K.dim(), 2 * n, "euler_residual");
  VectorXd w = VectorXd::Zero(2 * n);
  if (wrt == EulerField::Z)
    w.tail(n) = pt.p();
  else
    w.head(n) = pt.q();
  const VectorXd x = pt.state();
  const double dK = weighted_partial<double>(K, x, w);
  return dK - r * K(x);
}

int best_chart(const VectorXd& p) {
  Index k = 0;
  p.cwiseAbs().maxCoeff(&k);
  return static_cast<int>(k);
}

bool chart_valid(const VectorXd& p, int chart) {
  if (chart < 0 || chart >= p.size()) return false;
  return std::abs(p[chart]) >= kChartThreshold * p.cwiseAbs().maxCoeff() && p[chart] != 0.0;
}

ContactPoint project(const PhasePoint& pt, int chart) {
  if (chart < 0 || chart >= pt.dim())
    throw PreconditionError("project: chart index " + std::to_string(chart) + " out of range");
  if (!chart_valid(pt.p(), chart)) throw ChartDegenerateError(chart, best_chart(pt.p()));
  ContactPoint c;
  c.chart = chart;
  c.q = pt.q();
  c.gamma.resize(pt.dim() - 1);
  const double pc = pt.p()[chart];
  Index k = 0;
  for (Index j : complement(pt.dim(), chart)) c.gamma[k++] = pt.p()[j] / (-pc);
  return c;
}

PhasePoint lift(const ContactPoint& cpt) {
  const Index n = cpt.dim();
  require_same_dim(cpt.gamma.size(), n - 1, "lift");
  VectorXd p(n);
  p[cpt.chart] = -1.0;
  Index k = 0;
  for (Index j : complement(n, cpt.chart)) p[j] = cpt.gamma[k++];
  return PhasePoint(cpt.q, p);
}

PhasePoint scale_costate(const PhasePoint& pt, double lambda) {
  if (lambda == 0.0) throw PreconditionError("scale_costate: lambda must be nonzero");
  return PhasePoint(pt.q(), lambda * pt.p());
}

PhasePoint canonical(const PhasePoint& pt) {
  const double m = pt.p().cwiseAbs().maxCoeff();
  return PhasePoint(pt.q(), pt.p() / m);
}

ScalarFn homogenize(const ScalarFn& Khat, int chart) {
  if (Khat.dim() % 2 != 1) throw DimensionError("homogenize: K̂ must be a function of (q, gamma)");
  const Index n = (Khat.dim() + 1) / 2;
  if (chart < 0 || chart >= n) throw PreconditionError("homogenize: chart out of range");
  const std::vector<Index> others = complement(n, chart);
  return ScalarFn(
      2 * n,
      [Khat, chart, n, others](const auto& x) {
        using T = scalar_of<decltype(x)>;
        const T& pc = x[n + chart];
        const double pmax = max_abs<T>(x.tail(n).eval());
        if (!(std::abs(value_of(pc)) >= kChartThreshold * pmax) || value_of(pc) == 0.0)
          throw DomainError("homogenized Hamiltonian evaluated where p" + std::to_string(chart) +
                            " = 0");
        Vec<T> y(2 * n - 1);
        for (Index i = 0; i < n; ++i) y[i] = x[i];
        const T neg_pc = -pc;
        for (std::size_t k = 0; k < others.size(); ++k) y[n + Index(k)] = x[n + others[k]] / neg_pc;
        return neg_pc * Khat(y);
      },
      ScalarFn::Origin::derived, Khat.name().empty() ? std::string() : "hom(" + Khat.name() + ")");
}

ScalarFn dehomogenize(const ScalarFn& K, int chart, const std::vector<PhasePoint>& probes) {
  if (K.dim() % 2 != 0) throw DimensionError("dehomogenize: K must be a function of (q, p)");
  const Index n = K.dim() / 2;
  if (chart < 0 || chart >= n) throw PreconditionError("dehomogenize: chart out of range");
  for (const auto& pt : probes) {
    const double r = euler_residual(K, pt, 1, EulerField::Z);
    if (std::abs(r) > 1e-9 * (1.0 + std::abs(K(pt.state())))) {
      std::ostringstream os;
      os << "dehomogenize: '" << K.name() << "' is not degree-1 in p at a probe point (Euler residual "
         << r << ")";
      logging::warn(os.str());
      break;
    }
  }
  const std::vector<Index> others = complement(n, chart);
  return ScalarFn(
      2 * n - 1,
      [K, chart, n, others](const auto& y) {
        using T = scalar_of<decltype(y)>;
        Vec<T> x(2 * n);
        for (Index i = 0; i < n; ++i) x[i] = y[i];
        x[n + chart] = T(-1.0);
        for (std::size_t k = 0; k < others.size(); ++k) x[n + others[k]] = y[n + Index(k)];
        return K(x);
      },
      ScalarFn::Origin::derived, K.name().empty() ? std::string() : "dehom(" + K.name() + ")");
}

expr::Layout phase_layout(Index dim) {
  expr::Layout l;
  for (Index i = 0; i < dim; ++i) {
    l.slot("q" + std::to_string(i), i);
    l.slot("p" + std::to_string(i), dim + i);
  }
  return l;
}

expr::Layout contact_layout(Index dim, int chart) {
  expr::Layout l;
  for (Index i = 0; i < dim; ++i) l.slot("q" + std::to_string(i), i);
  Index k = dim;
  for (Index j : complement(dim, chart)) l.slot("gamma" + std::to_string(j), k++);
  return l;
}

}  // namespace ltk
