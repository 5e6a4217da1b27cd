#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <vector>

#include "stc/graph.hpp"
#include "stc/protocol.hpp"
#include "stc/signals.hpp"
#include "stc/trace.hpp"

namespace stc {

struct RecordOptions {
  bool events = true;
  bool noise_log = false;
  /// When nonzero, only the history needed for the last `tail_polls`
  /// distinct poll instants is retained.
  std::size_t tail_polls = 0;
};

struct EngineConfig {
  double eps = 0.05;
  double horizon = 10.0;
  /// Use the delayed protocol (poll, per-neighbor arrivals, update at the
  /// last arrival). With a zero delay model it reproduces the delay-free run.
  bool delayed = false;
  NoiseSpec noise;
  DelaySpec delay;
  std::uint64_t seed = 0;
  /// Stop early once provably static. Only honored when the noise is zero.
  bool stop_on_quiescence = true;
  RecordOptions record;
};

struct Event {
  double time = 0.0;
  NodeId node = 0;
  EventKind kind = EventKind::poll;
  std::uint64_t seq = 0;
  std::size_t slot = 0;   // neighbor slot for reading arrivals
  double transmit = 0.0;  // v for reading arrivals
};

/// Ordering: time, node index, kind (poll < arrival < update), insertion.
struct EventLater {
  bool operator()(const Event& a, const Event& b) const;
};

/// Notified at every control decision, before the new control takes effect.
class UpdateObserver {
 public:
  virtual ~UpdateObserver() = default;
  virtual void on_control_update(double t, NodeId node, Control before, Control after) = 0;
  virtual void on_finish(double /*t*/) {}
};

/// Event-driven simulation of the self-triggered protocol. Between events
/// every node evolves exactly as x_i(t) = x_i(t_e) + u_i (t - t_e).
class Simulation {
 public:
  /// Throws std::invalid_argument for a disconnected graph, an isolated
  /// node, a size mismatch, or invalid parameters.
  Simulation(const Graph& graph, std::vector<double> x0, EngineConfig config);

  /// Processes the earliest pending event. Returns nullopt once the horizon
  /// is passed, the queue is empty, or the network has quiesced.
  std::optional<Event> step();

  /// Runs to completion and hands over the trace.
  Trace run();

  bool finished() const { return finished_; }
  double now() const { return now_; }
  double state(NodeId i, double t) const { return x_ref_[i] + as_rate(u_[i]) * (t - t_ref_[i]); }
  Control control(NodeId i) const { return u_[i]; }
  std::size_t pending_events() const { return queue_.size(); }
  const Trace& trace() const { return trace_; }
  void set_observer(UpdateObserver* observer) { observer_ = observer; }

 private:
  void schedule(double t, NodeId node, EventKind kind, std::size_t slot = 0, double transmit = 0.0);
  void handle_poll(const Event& ev);
  void handle_arrival(const Event& ev);
  void handle_update(const Event& ev);
  void apply_decision(NodeId i, double t, double x_i, const SampleDecision& d, double true_ave,
                      double poll_time);
  double history_state(NodeId j, double t) const;
  void maybe_prune();
  void finish();

  Graph graph_;
  EngineConfig config_;
  NoiseSource noise_;
  DelaySource delay_;
  bool noiseless_;

  std::vector<double> t_ref_;
  std::vector<double> x_ref_;
  std::vector<Control> u_;
  std::vector<NodeParams> params_;
  std::vector<std::deque<Breakpoint>> history_;  // delayed mode only
  std::vector<std::vector<double>> pending_readings_;
  std::vector<std::vector<double>> pending_noise_;
  std::vector<double> pending_poll_time_;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  bool finished_ = false;

  // quiescence bookkeeping (noiseless only)
  std::size_t active_ = 0;
  std::optional<double> quiet_since_;
  std::vector<double> last_decision_poll_;
  std::size_t confirmed_quiet_ = 0;

  std::vector<double> readings_;
  std::vector<double> noise_buf_;
  std::size_t polls_since_prune_ = 0;
  Trace trace_;
  UpdateObserver* observer_ = nullptr;
};

Trace simulate(const Graph& graph, std::vector<double> x0, const EngineConfig& config);

/// Fixed-step forward-Euler reference integrator. Polls run at the first
/// grid point at or after each scheduled instant; the schedule itself
/// advances on the integrator's own ideal clock. Noise values are replayed
/// from `log` (k-th decision of node i uses the k-th logged reading set), so
/// no model sampling happens here. Delay-free protocol only.
///
/// Throws std::invalid_argument when dt >= eps / (8 d_max) or the config is
/// delayed, and std::runtime_error if the log runs out.
Trace oracle_run(const Graph& graph, std::vector<double> x0, const EngineConfig& config,
                 const NoiseLog& log, double dt);

/// Maximum per-coordinate deviation between two traces over the grid
/// {0, dt, 2dt, ...} up to `until`.
double max_grid_deviation(const Trace& a, const Trace& b, double dt, double until);

}  // namespace stc
