#include "commands.hpp"

#include <ltk/brackets.hpp>
#include <ltk/errors.hpp>
#include <ltk/log.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace ltk::cli {

using nlohmann::json;

namespace {

json check_json(double max_residual, double tolerance, bool pass) {
  return {{"max_residual", max_residual}, {"tolerance", tolerance}, {"pass", pass}};
}

struct Checks {
  json doc = json::object();
  bool pass = true;

  void add(const std::string& name, double r, double tol) {
    const bool ok = std::isfinite(r) && r <= tol;
    doc[name] = check_json(r, tol, ok);
    pass = pass && ok;
    if (!ok) logging::warn(name + ": residual " + format_number(r) + " exceeds " + format_number(tol));
  }
};

/// Writes to the path, or to stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << text;
  if (!out) throw ltk::Error(path + ": write failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void check_integration(const RunConfig& cfg) {
  if (cfg.t_end && !(*cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
}

VectorXd initial_params(const RunConfig& cfg, const PortSystem& sys) {
  if (cfg.initial.empty()) return sys.initial;
  if (Index(cfg.initial.size()) != sys.dim())
    throw ConfigError("initial: expected " + std::to_string(sys.dim()) + " parameters, got " +
                      std::to_string(cfg.initial.size()));
  return Eigen::Map<const VectorXd>(cfg.initial.data(), sys.dim());
}

std::mt19937_64 rng_for(const RunConfig& cfg) { return std::mt19937_64(cfg.seed); }

void write_row(std::ostringstream& os, double t, const VectorXd& x, const std::vector<double>& extra) {
  os << format_number(t);
  for (Index i = 0; i < x.size(); ++i) os << ',' << format_number(x[i]);
  for (double v : extra) os << ',' << format_number(v);
  os << '\n';
}

/// Random phase points with q in [-2, 2], p in [-2, 2] and p_c ≤ -0.2 so
/// the chart stays well conditioned.
std::vector<PhasePoint> random_points(Index dim, int chart, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::vector<PhasePoint> pts;
  for (std::size_t k = 0; k < count; ++k) {
    VectorXd q(dim), p(dim);
    for (Index i = 0; i < dim; ++i) q[i] = U(rng);
    for (Index i = 0; i < dim; ++i) p[i] = U(rng);
    p[chart] = -(0.2 + 0.45 * (U(rng) + 2.0));
    pts.emplace_back(q, p);
  }
  return pts;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg) {
  check_integration(cfg);
  const PortSystem sys = build_system(cfg);
  const InputSignal u = build_input(cfg, sys);
  const VectorXd z0 = initial_params(cfg, sys);
  logging::info("simulate " + sys.name);
  const SimulationResult r = simulate(sys, z0, u, cfg.t_end.value_or(10.0), cfg.dt, cfg.project);
  const Trajectory& tr = r.traj;
  const Index n = sys.dim();

  std::vector<std::string> cols;
  for (std::size_t k = 1; k <= sys.inputs(); ++k) cols.push_back("y_p" + std::to_string(k));
  for (std::size_t k = 1; k <= sys.inputs(); ++k) cols.push_back("y_e" + std::to_string(k));
  for (const auto& m : cfg.monitors) cols.push_back(m);
  std::vector<std::size_t> idx;
  for (const auto& c : cols) {
    const auto it = std::find(tr.monitor_names.begin(), tr.monitor_names.end(), c);
    if (it == tr.monitor_names.end()) throw ConfigError("monitor '" + c + "' is not available");
    idx.push_back(std::size_t(it - tr.monitor_names.begin()));
  }

  std::ostringstream os;
  os << 't';
  for (Index i = 0; i < n; ++i) os << ",q" << i;
  for (Index i = 0; i < n; ++i) os << ",p" << i;
  for (const auto& c : cols) os << ',' << c;
  os << '\n';
  std::vector<double> extra(idx.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    for (std::size_t m = 0; m < idx.size(); ++m) extra[m] = tr.monitors[k][idx[m]];
    write_row(os, tr.t[k], tr.x[k], extra);
  }
  emit(cfg.output, os.str());

  Checks checks;
  checks.add("first_law", r.first_law_residual, 1e-5 * (1.0 + std::abs(r.delta_E)));
  checks.add("second_law", std::max(0.0, -r.second_law_min_step), 1e-9);
  checks.add("membership", r.max_membership, kMembershipAbort);
  if (!cfg.report.empty()) emit(cfg.report, dump(checks.doc));
  return checks.pass ? kOk : kFailed;
}

int cmd_validate(const RunConfig& cfg) {
  const PortSystem sys = build_system(cfg);
  const ValidationReport rep = validate(sys, cfg.samples.value_or(100), cfg.seed);
  json doc = json::object();
  for (const auto& c : rep.checks) {
    doc[c.name] = check_json(c.max_residual, c.tolerance, c.pass);
    if (!c.pass) logging::warn(c.name + ": residual " + format_number(c.max_residual));
  }
  emit(cfg.report, dump(doc));
  return rep.pass() ? kOk : kFailed;
}

namespace {

int bracket_expressions(const RunConfig& cfg) {
  if (cfg.k2.empty()) throw ConfigError("bracket: --k1 needs --k2");
  if (!cfg.dim) throw ConfigError("bracket: --k1/--k2 need --dim");
  const Index dim = *cfg.dim;
  if (dim < 1) throw ConfigError("bracket: --dim must be positive");
  const bool contact = cfg.chart.has_value();
  const int chart = cfg.chart.value_or(0);
  if (chart < 0 || chart >= dim) throw ConfigError("bracket: chart out of range");

  ScalarFn K1, K2, Khat1, Khat2;
  try {
    if (contact) {
      expr::Layout l = contact_layout(dim, chart);
      l.with_params(cfg.params);
      Khat1 = expr::compile(cfg.k1, l, cfg.k1);
      Khat2 = expr::compile(cfg.k2, l, cfg.k2);
      K1 = homogenize(Khat1, chart);
      K2 = homogenize(Khat2, chart);
    } else {
      expr::Layout l = phase_layout(dim);
      l.with_params(cfg.params);
      K1 = expr::compile(cfg.k1, l, cfg.k1);
      K2 = expr::compile(cfg.k2, l, cfg.k2);
    }
  } catch (const ltk::Error& e) {
    throw ConfigError(std::string("bracket: ") + e.what());
  }
  const int d1 = contact ? 1 : cfg.degree1;
  const int d2 = contact ? 1 : cfg.degree2;
  for (int d : {d1, d2})
    if (d != 0 && d != 1) throw ConfigError("bracket: degrees must be 0 or 1");

  const auto pts = random_points(dim, chart, cfg.samples.value_or(20), cfg.seed);
  double anti = 0.0, corr = 0.0;
  for (const auto& pt : pts) {
    anti = std::max(anti, std::abs(poisson(K1, K2, pt) + poisson(K2, K1, pt)));
    corr = std::max(corr, correspondence_residual(K1, K2, pt));
  }
  const DegreeCheckReport deg = degree_check(d1, K1, d2, K2, pts);
  Checks checks;
  checks.add("antisymmetry", anti, 0.0);
  checks.add("degree_inputs", deg.max_input_residual, 1e-9);
  checks.add("degree_bracket", deg.max_bracket_residual, 1e-9);
  if (d1 == 0 && d2 == 0) checks.add("degree_minus1", deg.max_degree_minus1, 1e-9);
  checks.add("correspondence", corr, 1e-6);

  if (!cfg.at.empty()) {
    double value = 0.0;
    if (contact) {
      if (Index(cfg.at.size()) != 2 * dim - 1)
        throw ConfigError("bracket: --at needs " + std::to_string(2 * dim - 1) + " values (q, gamma)");
      const VectorXd y = Eigen::Map<const VectorXd>(cfg.at.data(), 2 * dim - 1);
      value = jacobi(Khat1, Khat2, ContactPoint::from_state(chart, y));
    } else {
      if (Index(cfg.at.size()) != 2 * dim)
        throw ConfigError("bracket: --at needs " + std::to_string(2 * dim) + " values (q, p)");
      const VectorXd x = Eigen::Map<const VectorXd>(cfg.at.data(), 2 * dim);
      value = poisson(K1, K2, PhasePoint::from_state(x));
    }
    std::cout << format_number(value) << '\n';
    if (!cfg.report.empty()) emit(cfg.report, dump(checks.doc));
  } else {
    emit(cfg.report, dump(checks.doc));
  }
  return checks.pass ? kOk : kFailed;
}

int bracket_system(const RunConfig& cfg) {
  const PortSystem sys = build_system(cfg);
  std::vector<const HamiltonianSpec*> hs{&sys.Ka};
  for (const auto& k : sys.Kc) hs.push_back(&k);
  auto rng = rng_for(cfg);
  const auto samples = sample_params(sys.gf, cfg.samples.value_or(20), rng);
  Checks checks;
  for (std::size_t a = 0; a < hs.size(); ++a)
    for (std::size_t b = a + 1; b < hs.size(); ++b) {
      const std::string tag = hs[a]->name + "_" + hs[b]->name;
      checks.add("tangency_" + tag, tangency_closure_residual(sys.gf, hs[a]->K, hs[b]->K, samples), 1e-9);
      double anti = 0.0;
      for (const auto& z : samples) {
        const PhasePoint pt = liouville_point(sys.gf, z);
        anti = std::max(anti, std::abs(poisson(hs[a]->K, hs[b]->K, pt) + poisson(hs[b]->K, hs[a]->K, pt)));
      }
      checks.add("antisymmetry_" + tag, anti, 0.0);
    }
  if (hs.size() == 1) logging::info(sys.name + " has no control Hamiltonians to bracket");
  emit(cfg.report, dump(checks.doc));
  return checks.pass ? kOk : kFailed;
}

}  // namespace

int cmd_bracket(const RunConfig& cfg) {
  if (!cfg.k1.empty() || !cfg.k2.empty()) {
    if (cfg.k1.empty()) throw ConfigError("bracket: --k2 needs --k1");
    return bracket_expressions(cfg);
  }
  return bracket_system(cfg);
}

int cmd_reduce(const RunConfig& cfg) {
  check_integration(cfg);
  const PortSystem sys = build_system(cfg);
  const GeneratingFunction& gf = sys.gf;
  if (!gf.q_homogeneous || !gf.J.empty())
    throw ConfigError("reduce: '" + sys.name + "' needs a q-homogeneous generating function with J empty");
  bool d1q = sys.Ka.degree1_q;
  for (const auto& k : sys.Kc) d1q = d1q && k.degree1_q;
  if (!d1q) throw ConfigError("reduce: the Hamiltonians of '" + sys.name + "' are not degree 1 in q");

  const InputSignal u = build_input(cfg, sys);
  const VectorXd z0 = initial_params(cfg, sys);
  const PhasePoint pt0 = liouville_point(gf, z0);
  Index ref = gf.I.front();
  if (cfg.ref) {
    ref = *cfg.ref;
    if (std::find(gf.I.begin(), gf.I.end(), ref) == gf.I.end())
      throw ConfigError("reduce: ref must be one of the generating function's q indices");
  } else {
    for (Index i : gf.I)
      if (std::abs(pt0.q()[i]) > std::abs(pt0.q()[ref])) ref = i;
  }
  const int chart = gf.chart;

  Checks checks;
  auto rng = rng_for(cfg);
  const auto samples = sample_params(gf, cfg.samples.value_or(100), rng);
  const GibbsDuhemReport gd = gibbs_duhem_check(gf, samples);
  checks.add("gibbs_duhem_sum_qp", gd.max_sum_qp, 1e-10);
  checks.add("gibbs_duhem_beta", gd.max_beta, 1e-9);
  checks.add("gibbs_duhem_w_tangency", gd.max_w_tangency, 1e-9);

  // The specific form divides by the first extensive of I; use samples where
  // it is positive and not small against the others.
  const Index sref = specific_reference(gf);
  const Index sslot = Index(std::find(gf.I.begin(), gf.I.end(), sref) - gf.I.begin());
  double spec_res = 0.0;
  std::size_t used = 0;
  for (const auto& z : samples) {
    const VectorXd qI = z.head(Index(gf.I.size()));
    if (qI[sslot] < 0.1 * qI.cwiseAbs().maxCoeff()) continue;
    spec_res = std::max(spec_res, specific_identity_residual(gf, qI));
    ++used;
  }
  if (used > 0) checks.add("specific_identity", spec_res, 1e-9);
  else logging::warn("reduce: no samples with a positive specific reference; identity not checked");

  const double t_end = cfg.t_end.value_or(1.0);
  const SimulationResult full = simulate(sys, z0, u, t_end, cfg.dt, cfg.project);
  const ScalarFn Kbar_a = reduce_hamiltonian(sys.Ka.K, chart, ref);
  std::vector<ScalarFn> Kbar_c;
  for (const auto& k : sys.Kc) Kbar_c.push_back(reduce_hamiltonian(k.K, chart, ref));
  const Field rf = [&](double t, const VectorXd& y) {
    VectorXd v = reduced_field(Kbar_a, chart, ref, y);
    if (!Kbar_c.empty()) {
      const VectorXd uk = u(t);
      for (std::size_t k = 0; k < Kbar_c.size(); ++k)
        if (uk[Index(k)] != 0.0) v += uk[Index(k)] * reduced_field(Kbar_c[k], chart, ref, y);
    }
    return v;
  };
  const Trajectory red = integrate(rf, reduce(pt0, chart, ref).state(), t_end, cfg.dt);
  double dev = 0.0;
  for (std::size_t k = 0; k < red.size() && k < full.traj.size(); ++k)
    dev = std::max(dev, (reduce(PhasePoint::from_state(full.traj.x[k]), chart, ref).state() - red.x[k])
                            .cwiseAbs()
                            .maxCoeff());
  checks.add("reduced_vs_full", dev, 1e-6);

  std::ostringstream os;
  os << 't';
  for (Index j : complement(gf.dim, ref)) os << ",eps" << j;
  for (Index j : complement(gf.dim, chart)) os << ",gamma" << j;
  os << '\n';
  for (std::size_t k = 0; k < red.size(); ++k) write_row(os, red.t[k], red.x[k], {});
  emit(cfg.output, os.str());
  if (!cfg.report.empty()) emit(cfg.report, dump(checks.doc));
  return checks.pass ? kOk : kFailed;
}

int cmd_flowcheck(const RunConfig& cfg) {
  check_integration(cfg);
  const PortSystem sys = build_system(cfg);
  auto rng = rng_for(cfg);
  const auto samples = sample_params(sys.gf, cfg.samples.value_or(20), rng);
  const FlowTransportReport rep =
      flow_transport_check(sys.gf, sys.Ka, cfg.t_end.value_or(1.0), samples, cfg.dt);
  Checks checks;
  checks.add("K_vanishes_on_L", rep.max_K_on_L, 1e-9);
  checks.add("liouville_transport", rep.max_alpha, 1e-6);
  if (rep.invariance_checked) checks.add("membership", rep.max_membership, 1e-6);
  emit(cfg.report, dump(checks.doc));
  return checks.pass ? kOk : kFailed;
}

int cmd_list(const RunConfig&) {
  std::ostringstream os;
  for (const auto& name : builtin_names()) {
    const PortSystem sys = builtin(name);
    os << name << "  (dim " << sys.dim() << ", inputs " << sys.inputs() << ")\n";
    for (const auto& [k, p] : sys.params)
      os << "  " << k << " = " << format_number(p.value) << (p.unit.empty() ? "" : " " + p.unit) << '\n';
  }
  std::cout << os.str();
  return kOk;
}

namespace {

struct Flags {
  std::string config, system, output, report, k1, k2;
  std::vector<std::string> params, u, monitors;
  double t_end = 0.0, dt = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  int chart = 0;
  Index dim = 0, ref = 0;
  std::vector<int> degrees;
  std::vector<double> at, initial;
  bool no_project = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration");
  sub->add_option("--system", f.system, "built-in system name (see `ltk list`)");
  sub->add_option("--param", f.params, "parameter override name=value (repeatable)");
  sub->add_option("--u", f.u, "input expression in t, one per input (repeatable)");
  sub->add_option("--t-end", f.t_end, "final time");
  sub->add_option("--dt", f.dt, "RK4 step");
  sub->add_option("--seed", f.seed, "seed for sampled points");
  sub->add_option("--samples", f.samples, "number of sampled points");
  sub->add_option("--chart", f.chart, "chart index");
  sub->add_option("--monitors", f.monitors, "monitor columns: E, S, K_res, alpha_res, membership")
      ->delimiter(',');
  sub->add_option("--output", f.output, "CSV output path (default stdout)");
  sub->add_option("--report", f.report, "JSON report path");
  sub->add_option("--initial", f.initial, "initial generating-function parameters")->delimiter(',');
  sub->add_flag("--no-project", f.no_project, "do not map steps back onto the state submanifold");
  sub->add_option("--k1", f.k1, "first bracket argument");
  sub->add_option("--k2", f.k2, "second bracket argument");
  sub->add_option("--dim", f.dim, "number of extensive variables for --k1/--k2");
  sub->add_option("--degrees", f.degrees, "declared p-degrees of k1,k2 (0 or 1)")->delimiter(',');
  sub->add_option("--at", f.at, "evaluation point, comma separated")->delimiter(',');
  sub->add_option("--ref", f.ref, "reference extensive index for reduce");
}

RunConfig merge(const CLI::App& sub, const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--system")) {
    cfg.system = f.system;
    cfg.custom.reset();
  }
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param: expected name=value, got '" + kv + "'");
    const std::string val = kv.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != val.size()) throw ConfigError("--param: '" + val + "' is not a number");
    cfg.params[kv.substr(0, eq)] = v;
  }
  if (given("--u")) cfg.inputs = f.u;
  if (given("--t-end")) cfg.t_end = f.t_end;
  if (given("--dt")) cfg.dt = f.dt;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--samples")) cfg.samples = f.samples;
  if (given("--chart")) cfg.chart = f.chart;
  if (given("--monitors")) cfg.monitors = f.monitors;
  if (given("--output")) cfg.output = f.output;
  if (given("--report")) cfg.report = f.report;
  if (given("--initial")) cfg.initial = f.initial;
  if (f.no_project) cfg.project = false;
  if (given("--k1")) cfg.k1 = f.k1;
  if (given("--k2")) cfg.k2 = f.k2;
  if (given("--dim")) cfg.dim = f.dim;
  if (given("--ref")) cfg.ref = f.ref;
  if (given("--degrees")) {
    if (f.degrees.size() != 2) throw ConfigError("--degrees: expected two entries");
    cfg.degree1 = f.degrees[0];
    cfg.degree2 = f.degrees[1];
  }
  if (given("--at")) cfg.at = f.at;
  for (const auto& m : cfg.monitors)
    if (m != "E" && m != "S" && m != "K_res" && m != "alpha_res" && m != "membership")
      throw ConfigError("--monitors: unknown monitor '" + m + "'");
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  logging::init_from_env();
  CLI::App app{"Liouville-geometric thermodynamic systems: simulation, validation and brackets.\n"
               "Input expressions use `t` for time."};
  app.require_subcommand(1);
  Flags f;
  using Cmd = int (*)(const RunConfig&);
  const std::vector<std::tuple<std::string, std::string, Cmd>> table{
      {"simulate", "integrate a port system and write its trajectory as CSV", cmd_simulate},
      {"validate", "check the thermodynamic constraints at sampled states", cmd_validate},
      {"bracket", "Poisson and Jacobi bracket checks", cmd_bracket},
      {"reduce", "reduced dynamics of a q-homogeneous system", cmd_reduce},
      {"flowcheck", "transport of the state submanifold by the flow", cmd_flowcheck},
      {"list", "list built-in systems and their parameters", cmd_list},
  };
  std::vector<std::pair<CLI::App*, Cmd>> subs;
  for (const auto& [name, help, fn] : table) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_flags(sub, f);
    subs.emplace_back(sub, fn);
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    logging::error(e.what());
    return kConfigError;
  }

  for (auto& [sub, fn] : subs) {
    if (!sub->parsed()) continue;
    RunConfig cfg;
    try {
      cfg = merge(*sub, f);
    } catch (const ConfigError& e) {
      logging::error(e.what());
      return kConfigError;
    }
    try {
      return fn(cfg);
    } catch (const ConfigError& e) {
      logging::error(e.what());
      return kConfigError;
    } catch (const std::exception& e) {
      logging::error(sub->get_name() + ": " + e.what());
      return kFailed;
    }
  }
  return kConfigError;
}

}  // namespace ltk::cli
