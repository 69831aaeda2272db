#include "config.hpp"

#include <ltk/expr.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace ltk::cli {

using nlohmann::json;

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + std::size_t(std::count(text.begin(), text.begin() + std::ptrdiff_t(byte), '\n'));
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": field '" + key + "': " + e.what());
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

std::string sinusoid(const json& s, const std::string& where) {
  for (const auto& [k, v] : s.items())
    if (k != "type" && k != "amp" && k != "freq" && k != "phase")
      throw ConfigError(where + ": unknown sinusoid field '" + k + "'");
  const double amp = s.contains("amp") ? number(s["amp"], where + ".amp") : 1.0;
  const double freq = s.contains("freq") ? number(s["freq"], where + ".freq") : 1.0;
  const double phase = s.contains("phase") ? number(s["phase"], where + ".phase") : 0.0;
  return format_number(amp) + "*sin(" + format_number(freq) + "*t + " + format_number(phase) + ")";
}

const std::set<std::string> kMonitors{"E", "S", "K_res", "alpha_res", "membership"};

}  // namespace

std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> input_expressions(const json& spec, const std::string& where) {
  if (spec.is_array()) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      auto one = input_expressions(spec[k], where + "[" + std::to_string(k) + "]");
      if (one.size() != 1) throw ConfigError(where + ": nested input arrays");
      out.push_back(one.front());
    }
    return out;
  }
  if (spec.is_string()) return {spec.get<std::string>()};
  if (spec.is_number()) return {format_number(spec.get<double>())};
  if (!spec.is_object()) throw ConfigError(where + ": input must be a string, number, object or array");
  const std::string type = get<std::string>(spec, "type", where);
  if (type == "zero") return {"0"};
  if (type == "constant") return {format_number(number(spec.value("value", json()), where + ".value"))};
  if (type == "sinusoid") return {sinusoid(spec, where)};
  if (type == "expr") return {get<std::string>(spec, "expr", where)};
  throw ConfigError(where + ": unknown input type '" + type + "'");
}

RunConfig config_from_json(const json& doc, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": top level must be an object");
  static const std::set<std::string> known{"system", "params", "input", "t_end", "dt", "seed",
                                           "samples", "chart", "monitors", "output", "report",
                                           "project", "k1", "k2", "dim", "degrees", "at",
                                           "initial", "ref"};
  for (const auto& [k, v] : doc.items())
    if (!known.count(k)) throw ConfigError(where + ": unknown field '" + k + "'");

  RunConfig cfg;
  if (doc.contains("system")) {
    const json& s = doc["system"];
    if (s.is_string()) {
      cfg.system = s.get<std::string>();
    } else if (s.is_object() && s.contains("custom")) {
      cfg.custom = s["custom"];
    } else if (s.is_object() && s.contains("builtin")) {
      cfg.system = get<std::string>(s, "builtin", where + ".system");
      if (s.contains("params"))
        for (const auto& [k, v] : s["params"].items()) cfg.params[k] = number(v, where + ".system.params." + k);
    } else {
      throw ConfigError(where + ".system: expected a built-in name, {builtin, params} or {custom}");
    }
  }
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw ConfigError(where + ".params: expected an object");
    for (const auto& [k, v] : doc["params"].items()) cfg.params[k] = number(v, where + ".params." + k);
  }
  if (doc.contains("input")) cfg.inputs = input_expressions(doc["input"], where + ".input");
  if (doc.contains("t_end")) cfg.t_end = number(doc["t_end"], where + ".t_end");
  if (doc.contains("dt")) cfg.dt = number(doc["dt"], where + ".dt");
  if (doc.contains("seed")) cfg.seed = get<std::uint64_t>(doc, "seed", where);
  if (doc.contains("samples")) cfg.samples = get<std::size_t>(doc, "samples", where);
  if (doc.contains("chart")) cfg.chart = get<int>(doc, "chart", where);
  if (doc.contains("monitors")) cfg.monitors = get<std::vector<std::string>>(doc, "monitors", where);
  if (doc.contains("output")) cfg.output = get<std::string>(doc, "output", where);
  if (doc.contains("report")) cfg.report = get<std::string>(doc, "report", where);
  if (doc.contains("project")) cfg.project = get<bool>(doc, "project", where);
  if (doc.contains("k1")) cfg.k1 = get<std::string>(doc, "k1", where);
  if (doc.contains("k2")) cfg.k2 = get<std::string>(doc, "k2", where);
  if (doc.contains("dim")) cfg.dim = get<Index>(doc, "dim", where);
  if (doc.contains("degrees")) {
    const auto d = get<std::vector<int>>(doc, "degrees", where);
    if (d.size() != 2) throw ConfigError(where + ".degrees: expected two entries");
    cfg.degree1 = d[0];
    cfg.degree2 = d[1];
  }
  if (doc.contains("at")) cfg.at = get<std::vector<double>>(doc, "at", where);
  if (doc.contains("initial")) cfg.initial = get<std::vector<double>>(doc, "initial", where);
  if (doc.contains("ref")) cfg.ref = get<Index>(doc, "ref", where);
  for (const auto& m : cfg.monitors)
    if (!kMonitors.count(m)) throw ConfigError(where + ".monitors: unknown monitor '" + m + "'");
  if (cfg.t_end && !(*cfg.t_end > 0.0)) throw ConfigError(where + ": t_end must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError(where + ": dt must be positive");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ":" + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  try {
    return config_from_json(doc, path);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

PortSystem custom_system(const json& spec, const std::map<std::string, double>& params) {
  const std::string where = "system.custom";
  if (!spec.is_object()) throw ConfigError(where + ": expected an object");
  static const std::set<std::string> known{"name", "dim", "chart", "I", "J", "F", "q_homogeneous",
                                           "box", "Ka", "Kc", "energy", "entropy", "initial",
                                           "degree1_q"};
  for (const auto& [k, v] : spec.items())
    if (!known.count(k)) throw ConfigError(where + ": unknown field '" + k + "'");

  const Index dim = get<Index>(spec, "dim", where);
  if (dim < 2) throw ConfigError(where + ".dim: need at least 2");
  const int chart = spec.value("chart", 0);
  const auto I = get<std::vector<Index>>(spec, "I", where);
  const auto J = spec.contains("J") ? get<std::vector<Index>>(spec, "J", where) : std::vector<Index>{};
  const bool qh = spec.value("q_homogeneous", false);
  const bool d1q = spec.value("degree1_q", qh);
  std::vector<std::pair<double, double>> box;
  for (const auto& b : get<std::vector<std::vector<double>>>(spec, "box", where)) {
    if (b.size() != 2) throw ConfigError(where + ".box: each range needs two numbers");
    box.emplace_back(b[0], b[1]);
  }
  const std::string name = spec.value("name", std::string("custom"));

  expr::Layout gl = generating_layout(chart, I, J);
  gl.with_params(params);
  GeneratingFunction gf =
      make_generating_function(dim, chart, I, J, expr::compile(get<std::string>(spec, "F", where), gl, "F"),
                               qh, box);
  expr::Layout pl = phase_layout(dim);
  pl.with_params(params);
  const std::vector<PhasePoint> probes = probe_points(gf, 8, 13);
  HamiltonianSpec Ka =
      register_hamiltonian(expr::compile(spec.value("Ka", std::string("0")), pl, "Ka"), "Ka", probes, d1q);
  std::vector<HamiltonianSpec> Kc;
  if (spec.contains("Kc")) {
    const auto srcs = get<std::vector<std::string>>(spec, "Kc", where);
    for (std::size_t k = 0; k < srcs.size(); ++k) {
      const std::string nm = "Kc" + std::to_string(k + 1);
      Kc.push_back(register_hamiltonian(expr::compile(srcs[k], pl, nm), nm, probes, d1q));
    }
  }
  const auto energy = spec.contains("energy") ? get<std::vector<Index>>(spec, "energy", where)
                                              : std::vector<Index>{0};
  const auto entropy = spec.contains("entropy") ? get<std::vector<Index>>(spec, "entropy", where)
                                                : std::vector<Index>{1};
  VectorXd init(dim);
  if (spec.contains("initial")) {
    const auto v = get<std::vector<double>>(spec, "initial", where);
    if (Index(v.size()) != dim) throw ConfigError(where + ".initial: expected " + std::to_string(dim) + " parameters");
    for (Index i = 0; i < dim; ++i) init[i] = v[std::size_t(i)];
  } else {
    for (Index i = 0; i < dim; ++i) init[i] = 0.5 * (box[std::size_t(i)].first + box[std::size_t(i)].second);
  }
  std::map<std::string, Parameter> pm;
  for (const auto& [k, v] : params) pm[k] = {v, ""};
  return make_port_system(name, std::move(gf), std::move(Ka), std::move(Kc), energy, entropy, std::move(pm),
                          init);
}

PortSystem build_system(const RunConfig& cfg) {
  try {
    if (cfg.custom) {
      if (cfg.chart && *cfg.chart != cfg.custom->value("chart", 0))
        throw ConfigError("--chart: a custom system is defined in its own chart");
      return custom_system(*cfg.custom, cfg.params);
    }
    if (cfg.system.empty()) throw ConfigError("no system given (use --system or a config file)");
    auto params = cfg.params;
    if (cfg.chart) {
      if (cfg.system != "gas_piston_damper")
        throw ConfigError("--chart: '" + cfg.system + "' has a single representation");
      params["chart"] = *cfg.chart;
    }
    return builtin(cfg.system, params);
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("system: ") + e.what());
  } catch (const ltk::Error& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
}

InputSignal build_input(const RunConfig& cfg, const PortSystem& sys) {
  const std::size_t m = sys.inputs();
  if (cfg.inputs.empty()) return zero_input(sys);
  if (cfg.inputs.size() != m)
    throw ConfigError("input: system '" + sys.name + "' has " + std::to_string(m) + " input(s), " +
                      std::to_string(cfg.inputs.size()) + " given");
  expr::Layout l;
  l.slot("t", 0).with_params(cfg.params);
  std::vector<ScalarFn> fs;
  try {
    for (const auto& src : cfg.inputs) fs.push_back(expr::compile(src, l, src));
  } catch (const ltk::Error& e) {
    throw ConfigError(std::string("input: ") + e.what());
  }
  return [fs](double t) {
    VectorXd tv(1);
    tv[0] = t;
    VectorXd u(Index(fs.size()));
    for (std::size_t k = 0; k < fs.size(); ++k) u[Index(k)] = fs[k](tv);
    return u;
  };
}

}  // namespace ltk::cli
