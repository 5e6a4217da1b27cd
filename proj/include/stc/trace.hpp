#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stc/protocol.hpp"

namespace stc {

/// Start of a constant-control segment: x(t') = x + u (t' - time) until the
/// next breakpoint.
struct Breakpoint {
  double time = 0.0;
  double x = 0.0;
  Control u = Control::off;
};

enum class EventKind : std::uint8_t { poll = 0, reading_arrival = 1, control_update = 2, quiesce = 3 };

std::string to_string(EventKind kind);

/// One processed event. Fields that do not apply to the kind are NaN.
///
/// poll: x/u are the node's state and current control at the poll instant.
/// reading_arrival: x is the received value z_j(v), peer is j, sample_time is v.
/// control_update: x is the node state, u the new control, ave_w the noisy
/// average, ave the true local average at the same instant, threshold eps_i,
/// interval the time to the next poll.
struct EventRecord {
  double time = 0.0;
  std::size_t node = 0;
  EventKind kind = EventKind::poll;
  double x = 0.0;
  Control u = Control::off;
  double ave_w = 0.0;
  double ave = 0.0;
  double threshold = 0.0;
  double interval = 0.0;
  std::size_t peer = 0;
  double sample_time = 0.0;
};

/// Noise values read at every control decision, in neighbor order, so a
/// second integrator can replay exactly the same disturbance.
struct NoiseLog {
  std::vector<std::vector<double>> per_node;  // flattened [decision k][neighbor]

  void clear() { per_node.clear(); }
  bool empty() const { return per_node.empty(); }
};

/// Exact piecewise-linear state history of one simulation.
class Trace {
 public:
  Trace() = default;
  Trace(std::vector<double> x0, double horizon);

  std::size_t size() const { return x0_.size(); }
  const std::vector<double>& initial_state() const { return x0_; }
  double horizon() const { return horizon_; }
  void set_horizon(double h) { horizon_ = h; }

  /// Max-norm of the initial state.
  double chi0() const { return chi0_; }
  double initial_max() const { return x_max_; }
  double initial_min() const { return x_min_; }

  /// Earliest instant at which state_at is answerable (0 unless tail-pruned).
  double retained_from() const { return retained_from_; }

  std::span<const Breakpoint> breakpoints(std::size_t node) const { return breakpoints_[node]; }
  std::span<const EventRecord> events() const { return events_; }
  /// Poll instants in processing order (nondecreasing, possibly repeated).
  std::span<const double> poll_times() const { return poll_times_; }
  /// Number of distinct poll instants ever recorded, including pruned ones.
  std::size_t distinct_poll_instants() const { return distinct_polls_; }
  const NoiseLog& noise_log() const { return noise_log_; }
  std::optional<double> quiesced_at() const { return quiesced_at_; }

  /// State vector at t, by linear interpolation within the active segment.
  /// Throws std::out_of_range outside [retained_from, horizon].
  std::vector<double> state_at(double t) const;
  double node_state_at(std::size_t node, double t) const;

  // Mutators used by the engines (and by tests building synthetic traces).
  void push_breakpoint(std::size_t node, Breakpoint bp);
  void push_event(const EventRecord& rec) { events_.push_back(rec); }
  void push_poll_time(double t);
  NoiseLog& mutable_noise_log() { return noise_log_; }
  void set_quiesced_at(double t) { quiesced_at_ = t; }
  /// Appends a closing breakpoint at the horizon for every node.
  void close(double horizon);
  /// Drops history strictly older than `cut` while keeping state_at(cut) valid.
  void prune_before(double cut, std::size_t keep_polls);

 private:
  std::vector<double> x0_;
  double horizon_ = 0.0;
  double chi0_ = 0.0;
  double x_max_ = 0.0;
  double x_min_ = 0.0;
  double retained_from_ = 0.0;
  std::vector<std::vector<Breakpoint>> breakpoints_;
  std::vector<EventRecord> events_;
  std::vector<double> poll_times_;
  std::size_t distinct_polls_ = 0;
  NoiseLog noise_log_;
  std::optional<double> quiesced_at_;
};

/// Serializes poll, control_update and quiesce records as CSV with columns
/// time,node,event_kind,x,u,ave_w,eps_i,delta_next. Reading arrivals stay in
/// memory only. Lines in `preamble` are written first, each prefixed "#! ".
void write_trace_csv(std::ostream& os, const Trace& trace,
                     std::span<const std::pair<std::string, std::string>> preamble = {});

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace stc
