#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stc/graph.hpp"
#include "stc/signals.hpp"

namespace stc {

/// Environment variable that overrides the configured master seed.
inline constexpr const char* kSeedEnvVar = "STC_SEED";

/// Raised for malformed or inconsistent configuration; `key()` names the
/// offending entry (empty for file-level problems).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class GraphKind { cycle, complete, path, er, rg, edges };
enum class InitKind { values, uniform };

struct GraphConfig {
  GraphKind kind = GraphKind::cycle;
  std::size_t n = 10;
  double p = 0.08;
  double width = 1000.0;
  double height = 1000.0;
  double range = 160.0;
  std::vector<Edge> edges;
};

struct InitConfig {
  InitKind kind = InitKind::uniform;
  std::vector<double> values;
  double low = -10.0;
  double high = 10.0;
};

struct MonteCarloConfig {
  std::size_t trials = 0;
  std::size_t window = 100;
  std::vector<std::size_t> sizes;
  std::vector<GraphKind> families;
  /// 0 selects the number of available processors.
  std::size_t threads = 0;
  /// When nonzero, random geometric regions are rescaled per size so that the
  /// node density matches `rg_reference_n` nodes on the configured region.
  std::size_t rg_reference_n = 0;
};

struct ExperimentConfig {
  GraphConfig graph;
  InitConfig x0;
  double eps = 0.05;
  NoiseSpec noise;
  DelaySpec delay;
  bool delayed = false;
  double horizon = 10.0;
  double h_metric = 0.01;
  std::uint64_t seed = 1;
  MonteCarloConfig montecarlo;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Reads `key = value` lines. Blank lines and lines starting with '#' are
/// skipped, except that when the input carries embedded "#! key=value"
/// lines (an output file), only those are read.
KeyValues read_key_values(std::istream& in);

/// Builds a validated configuration; unknown keys are rejected. If
/// `apply_env` is set and STC_SEED is defined, it replaces `seed`.
ExperimentConfig parse_config(const KeyValues& kv, bool apply_env = true);
ExperimentConfig load_config(const std::string& path, bool apply_env = true);

/// Every effective key in a fixed order; parse_config(echo) round-trips.
std::vector<std::pair<std::string, std::string>> echo_config(const ExperimentConfig& cfg);

std::string to_string(GraphKind kind);
GraphKind parse_graph_kind(const std::string& s);

/// Graph and initial state for a configuration and seed. Random families are
/// regenerated until connected.
struct Instance {
  Graph graph;
  std::vector<double> x0;
};

Instance make_instance(const GraphConfig& graph, const InitConfig& x0, std::uint64_t seed);

}  // namespace stc
