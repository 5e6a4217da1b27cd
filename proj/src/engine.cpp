#include "stc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace stc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

bool EventLater::operator()(const Event& a, const Event& b) const {
  return std::tie(a.time, a.node, a.kind, a.seq) > std::tie(b.time, b.node, b.kind, b.seq);
}

Simulation::Simulation(const Graph& graph, std::vector<double> x0, EngineConfig config)
    : graph_(graph),
      config_(config),
      noise_(config.noise, graph.size(), config.seed),
      delay_(config.delay, graph.size(), config.seed),
      noiseless_(config.noise.bound() == 0.0),
      trace_(x0, config.horizon) {
  const std::size_t n = graph_.size();
  validate_eps(config_.eps);
  if (!(config_.horizon > 0.0) || !std::isfinite(config_.horizon))
    throw std::invalid_argument("horizon must be positive and finite");
  if (x0.size() != n) throw std::invalid_argument("initial state size does not match graph");
  if (n == 0) throw std::invalid_argument("graph has no nodes");
  if (!is_connected(graph_)) throw std::invalid_argument("graph is not connected");
  for (NodeId i = 0; i < n; ++i)
    if (graph_.degree(i) == 0) throw std::invalid_argument("node without neighbors");

  t_ref_.assign(n, 0.0);
  x_ref_ = std::move(x0);
  u_.assign(n, Control::off);
  params_.resize(n);
  for (NodeId i = 0; i < n; ++i) params_[i] = {i, graph_.degree(i), config_.eps};
  last_decision_poll_.assign(n, -1.0);
  readings_.resize(graph_.max_degree());
  noise_buf_.resize(graph_.max_degree());
  if (config_.delayed) {
    history_.resize(n);
    pending_readings_.resize(n);
    pending_noise_.resize(n);
    pending_poll_time_.assign(n, 0.0);
    for (NodeId i = 0; i < n; ++i) {
      history_[i].push_back({0.0, x_ref_[i], Control::off});
      pending_readings_[i].resize(graph_.degree(i));
      pending_noise_[i].resize(graph_.degree(i));
    }
  }
  if (config_.record.noise_log) trace_.mutable_noise_log().per_node.resize(n);
  for (NodeId i = 0; i < n; ++i) schedule(0.0, i, EventKind::poll);
}

void Simulation::schedule(double t, NodeId node, EventKind kind, std::size_t slot, double transmit) {
  queue_.push(Event{t, node, kind, seq_++, slot, transmit});
}

std::optional<Event> Simulation::step() {
  if (finished_) return std::nullopt;
  if (queue_.empty() || queue_.top().time > config_.horizon) {
    finish();
    return std::nullopt;
  }
  const Event ev = queue_.top();
  queue_.pop();
  now_ = ev.time;
  switch (ev.kind) {
    case EventKind::poll: handle_poll(ev); break;
    case EventKind::reading_arrival: handle_arrival(ev); break;
    case EventKind::control_update: handle_update(ev); break;
    case EventKind::quiesce: break;
  }
  return ev;
}

Trace Simulation::run() {
  while (step()) {
  }
  return std::move(trace_);
}

void Simulation::handle_poll(const Event& ev) {
  const NodeId i = ev.node;
  const double t = ev.time;
  const double x_i = state(i, t);
  if (config_.record.events) {
    trace_.push_event({t, i, EventKind::poll, x_i, u_[i], kNaN, kNaN, kNaN, kNaN, 0, kNaN});
  }
  trace_.push_poll_time(t);

  const auto nbrs = graph_.neighbors(i);
  if (!config_.delayed) {
    double true_ave = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const NodeId j = nbrs[k];
      const double x_j = state(j, t);
      const double w = noise_.sample(j, i, t);
      readings_[k] = x_j + w;
      noise_buf_[k] = w;
      true_ave += x_j - x_i;
    }
    const std::span<const double> readings(readings_.data(), nbrs.size());
    if (config_.record.noise_log) {
      auto& log = trace_.mutable_noise_log().per_node[i];
      log.insert(log.end(), noise_buf_.begin(), noise_buf_.begin() + nbrs.size());
    }
    apply_decision(i, t, x_i, on_poll(params_[i], x_i, readings), true_ave, t);
  } else {
    double last_arrival = t;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const DelayDraw d = delay_.draw(i, nbrs[k], t);
      schedule(d.arrival, i, EventKind::reading_arrival, k, d.transmit);
      last_arrival = std::max(last_arrival, d.arrival);
    }
    pending_poll_time_[i] = t;
    schedule(last_arrival, i, EventKind::control_update);
  }
  maybe_prune();
}

double Simulation::history_state(NodeId j, double t) const {
  const auto& h = history_[j];
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (it->time <= t) return it->x + as_rate(it->u) * (t - it->time);
  }
  throw std::logic_error("reading requested before retained sender history");
}

void Simulation::handle_arrival(const Event& ev) {
  const NodeId i = ev.node;
  const NodeId j = graph_.neighbors(i)[ev.slot];
  const double w = noise_.sample(j, i, ev.transmit);
  const double z = history_state(j, ev.transmit) + w;
  pending_readings_[i][ev.slot] = z;
  pending_noise_[i][ev.slot] = w;
  if (config_.record.events) {
    trace_.push_event({ev.time, i, EventKind::reading_arrival, z, u_[i], kNaN, kNaN, kNaN, kNaN, j,
                       ev.transmit});
  }
}

void Simulation::handle_update(const Event& ev) {
  const NodeId i = ev.node;
  const double s = ev.time;
  const double x_i = state(i, s);
  double true_ave = 0.0;
  for (NodeId j : graph_.neighbors(i)) true_ave += state(j, s) - x_i;
  if (config_.record.noise_log) {
    auto& log = trace_.mutable_noise_log().per_node[i];
    log.insert(log.end(), pending_noise_[i].begin(), pending_noise_[i].end());
  }
  apply_decision(i, s, x_i, on_delayed_update(params_[i], x_i, pending_readings_[i]), true_ave,
                 pending_poll_time_[i]);
}

void Simulation::apply_decision(NodeId i, double t, double x_i, const SampleDecision& d,
                                double true_ave, double poll_time) {
  const Control before = u_[i];
  if (observer_) observer_->on_control_update(t, i, before, d.control);
  if (d.control != before) {
    t_ref_[i] = t;
    x_ref_[i] = x_i;
    u_[i] = d.control;
    trace_.push_breakpoint(i, {t, x_i, d.control});
    if (config_.delayed) {
      auto& h = history_[i];
      h.push_back({t, x_i, d.control});
      // Keep one segment that starts at or before the oldest instant any
      // in-flight reading can still ask for.
      const double keep_from = t - config_.delay.bound();
      while (h.size() > 1 && h[1].time <= keep_from) h.pop_front();
    }
    if (before == Control::off) ++active_;
    if (d.control == Control::off) --active_;
  }
  if (config_.record.events) {
    trace_.push_event({t, i, EventKind::control_update, x_i, d.control, d.average, true_ave,
                       d.threshold, d.interval, 0, kNaN});
  }
  schedule(t + d.interval, i, EventKind::poll);

  const double previous_poll = last_decision_poll_[i];
  last_decision_poll_[i] = poll_time;
  if (!noiseless_ || !config_.stop_on_quiescence) return;
  if (active_ != 0) {
    quiet_since_.reset();
    return;
  }
  if (!quiet_since_) {
    // Everyone is dormant from here on; the state is frozen. A node's
    // decision confirms the quiet state once it was taken on data sampled
    // at or after this instant.
    quiet_since_ = t;
    confirmed_quiet_ = 0;
    for (double p : last_decision_poll_)
      if (p >= t) ++confirmed_quiet_;
  } else if (previous_poll < *quiet_since_ && poll_time >= *quiet_since_) {
    ++confirmed_quiet_;
  }
  if (confirmed_quiet_ == graph_.size()) {
    if (config_.record.events) {
      trace_.push_event({t, 0, EventKind::quiesce, kNaN, Control::off, kNaN, kNaN, kNaN, kNaN, 0, kNaN});
    }
    trace_.set_quiesced_at(t);
    finish();
  }
}

void Simulation::maybe_prune() {
  const std::size_t tail = config_.record.tail_polls;
  if (tail == 0) return;
  auto polls = trace_.poll_times();
  if (polls.size() < 4 * tail + 1024) return;
  std::size_t distinct = 0;
  std::size_t idx = polls.size();
  double last = std::numeric_limits<double>::quiet_NaN();
  while (idx > 0) {
    const double t = polls[idx - 1];
    if (t != last) {
      if (distinct == tail + 1) break;
      ++distinct;
      last = t;
    }
    --idx;
  }
  // polls[idx..] hold the last tail+1 distinct instants.
  const double cut = polls[idx];
  trace_.prune_before(cut, polls.size() - idx);
}

void Simulation::finish() {
  if (finished_) return;
  finished_ = true;
  while (!queue_.empty()) queue_.pop();
  trace_.close(config_.horizon);
  if (observer_) observer_->on_finish(config_.horizon);
}

Trace simulate(const Graph& graph, std::vector<double> x0, const EngineConfig& config) {
  Simulation sim(graph, std::move(x0), config);
  return sim.run();
}

}  // namespace stc
