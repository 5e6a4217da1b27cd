#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stc/analysis.hpp"
#include "stc/config.hpp"
#include "stc/engine.hpp"

namespace stc {

using Preamble = std::vector<std::pair<std::string, std::string>>;

EngineConfig engine_config(const ExperimentConfig& cfg, std::uint64_t seed);

/// Envelope mode matching the disturbance of a configuration.
EnvelopeMode envelope_mode(const ExperimentConfig& cfg);

/// Outcome of one named invariant check.
struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct RunResult {
  Instance instance;
  Trace trace;
  BoundsReport bounds;
  /// Radius of the set the run is expected to enter: max(eps, eps chi0)
  /// noiseless, r noisy, r_bar delayed.
  double radius = 0.0;
  ContainmentReport containment;
  std::optional<double> convergence;
  std::vector<CheckResult> checks;

  std::size_t violations() const;
};

/// Simulates one configuration and evaluates the invariants that apply to it.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Writes trace.csv and summary.txt into `dir`, both headed by the config echo.
void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                       const RunResult& result);

struct TrialRecord {
  GraphKind family = GraphKind::er;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t d_max = 0;
  double chi0 = 0.0;
  double r = 0.0;
  std::optional<double> entry;
  double post_entry_max = 0.0;
  WindowIndices indices;

  /// Entered the set and never exceeded r afterwards.
  bool contained() const { return entry.has_value() && post_entry_max < r; }
};

struct SweepPoint {
  GraphKind family = GraphKind::er;
  std::size_t n = 0;
  MonteCarloReport report;
};

struct MonteCarloResult {
  std::vector<TrialRecord> trials;
  std::vector<SweepPoint> points;

  std::size_t violations() const;
  const SweepPoint* find(GraphKind family, std::size_t n) const;
};

/// Seed of one trial; depends only on the master seed and the trial's
/// coordinates, never on scheduling.
std::uint64_t trial_seed(std::uint64_t master, GraphKind family, std::size_t n, std::size_t trial);

/// Runs the configured campaign. `threads` overrides the configured degree
/// when nonzero.
MonteCarloResult run_montecarlo(const ExperimentConfig& cfg, std::size_t threads = 0);

/// Writes montecarlo.csv (one row per family and size) and trials.csv.
void write_montecarlo_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                              const MonteCarloResult& result);

struct OracleCheckResult {
  double dt = 0.0;
  double tolerance = 0.0;
  double deviation = 0.0;
  /// First grid instant at which the deviation exceeds the tolerance.
  std::optional<double> first_exceeded;
  bool passed() const { return deviation <= tolerance; }
};

/// Compares the event-driven trace against the fixed-step integrator fed
/// with the same noise log, over [0, horizon]. Tolerance defaults to 10 dt.
OracleCheckResult oracle_check(const ExperimentConfig& cfg, double dt,
                               std::optional<double> tolerance = std::nullopt);

/// key=value lines of a run summary, in output order.
Preamble summary_lines(const RunResult& result);

}  // namespace stc
