#include <cmath>
#include <limits>
#include <stdexcept>

#include "stc/engine.hpp"

namespace stc {

namespace {
// Scheduled instants are sums of intervals and grid points are m * dt; both
// carry rounding, so "at or after" is decided with this slack.
constexpr double kGridSlack = 1e-9;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

Trace oracle_run(const Graph& graph, std::vector<double> x0, const EngineConfig& config,
                 const NoiseLog& log, double dt) {
  validate_eps(config.eps);
  if (config.delayed) throw std::invalid_argument("oracle integrator covers the delay-free protocol only");
  const std::size_t n = graph.size();
  if (x0.size() != n) throw std::invalid_argument("initial state size does not match graph");
  if (!(dt > 0.0) || dt >= config.eps / (8.0 * static_cast<double>(graph.max_degree())))
    throw std::invalid_argument("oracle step must satisfy 0 < dt < eps / (8 d_max)");
  const bool noiseless = config.noise.bound() == 0.0;
  if (!noiseless && log.per_node.size() != n)
    throw std::invalid_argument("noisy oracle run needs a noise log for every node");

  Trace trace(x0, config.horizon);
  std::vector<double> x = std::move(x0);
  std::vector<Control> u(n, Control::off);
  std::vector<double> scheduled(n, 0.0);
  std::vector<std::size_t> decisions(n, 0);
  std::vector<NodeId> due;
  std::vector<SampleDecision> outcome(n);
  std::vector<double> readings(graph.max_degree());

  const auto steps = static_cast<std::size_t>(std::floor(config.horizon / dt + kGridSlack));
  for (std::size_t m = 0; m <= steps; ++m) {
    const double t = static_cast<double>(m) * dt;
    due.clear();
    for (NodeId i = 0; i < n; ++i)
      if (scheduled[i] <= t + kGridSlack) due.push_back(i);

    // All due nodes read the same pre-update state.
    for (NodeId i : due) {
      const auto nbrs = graph.neighbors(i);
      const std::size_t d = nbrs.size();
      for (std::size_t k = 0; k < d; ++k) {
        double w = 0.0;
        if (!noiseless) {
          const auto& entries = log.per_node[i];
          const std::size_t at = decisions[i] * d + k;
          if (at >= entries.size()) throw std::runtime_error("noise log exhausted during oracle run");
          w = entries[at];
        }
        readings[k] = x[nbrs[k]] + w;
      }
      outcome[i] = on_poll(NodeParams{i, d, config.eps}, x[i], std::span<const double>(readings.data(), d));
      trace.push_event({t, i, EventKind::poll, x[i], u[i], kNaN, kNaN, kNaN, kNaN, 0, kNaN});
      trace.push_poll_time(t);
    }
    for (NodeId i : due) {
      const SampleDecision& dec = outcome[i];
      if (dec.control != u[i]) {
        u[i] = dec.control;
        trace.push_breakpoint(i, {t, x[i], u[i]});
      }
      trace.push_event({t, i, EventKind::control_update, x[i], u[i], dec.average, kNaN, dec.threshold,
                        dec.interval, 0, kNaN});
      scheduled[i] += dec.interval;
      ++decisions[i];
    }
    for (NodeId i = 0; i < n; ++i) x[i] += as_rate(u[i]) * dt;
  }
  trace.close(config.horizon);
  return trace;
}

double max_grid_deviation(const Trace& a, const Trace& b, double dt, double until) {
  if (a.size() != b.size()) throw std::invalid_argument("traces differ in node count");
  if (!(dt > 0.0)) throw std::invalid_argument("grid step must be positive");
  double worst = 0.0;
  const auto steps = static_cast<std::size_t>(std::floor(until / dt + kGridSlack));
  for (std::size_t m = 0; m <= steps; ++m) {
    const double t = std::min(static_cast<double>(m) * dt, until);
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::fabs(a.node_state_at(i, t) - b.node_state_at(i, t)));
  }
  return worst;
}

}  // namespace stc
