#pragma once

// Run configuration for the ltk command line: a JSON document, optionally
// overridden by flags, turned into a port system and an input signal.

#include <ltk/portsys.hpp>

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltk::cli {

/// Anything wrong with the configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  /// Built-in name; empty when a custom system is given.
  std::string system;
  std::optional<nlohmann::json> custom;
  std::map<std::string, double> params;
  /// One expression in t per input; empty means u ≡ 0.
  std::vector<std::string> inputs;
  /// Per-command default when unset (simulate 10, flowcheck and reduce 1).
  std::optional<double> t_end;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  /// Member parameters overriding the system's initial state.
  std::vector<double> initial;
  std::optional<Index> ref;
  std::optional<std::size_t> samples;
  std::optional<int> chart;
  std::vector<std::string> monitors{"K_res", "alpha_res"};
  std::string output;
  std::string report;
  bool project = true;
  // bracket
  std::string k1, k2;
  std::optional<Index> dim;
  int degree1 = 1, degree2 = 1;
  std::vector<double> at;
};

/// Reads a JSON config file; errors carry path and line.
RunConfig load_config(const std::string& path);

/// Fills a config from an already parsed document (no file context).
RunConfig config_from_json(const nlohmann::json& doc, const std::string& where = "config");

/// Input signal spec (string expression, {type: zero|constant|sinusoid},
/// or an array of these) as expressions in t.
std::vector<std::string> input_expressions(const nlohmann::json& spec, const std::string& where);

/// Built-in or custom system with parameter and chart overrides applied.
PortSystem build_system(const RunConfig& cfg);

/// Custom system from its JSON description; expressions may use cfg params.
PortSystem custom_system(const nlohmann::json& spec, const std::map<std::string, double>& params);

/// u(t) from the configured expressions (u ≡ 0 when none are given).
InputSignal build_input(const RunConfig& cfg, const PortSystem& sys);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace ltk::cli
