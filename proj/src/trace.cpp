#include "stc/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace stc {

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::poll: return "poll";
    case EventKind::reading_arrival: return "reading_arrival";
    case EventKind::control_update: return "control_update";
    case EventKind::quiesce: return "quiesce";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, end);
}

Trace::Trace(std::vector<double> x0, double horizon)
    : x0_(std::move(x0)), horizon_(horizon), breakpoints_(x0_.size()) {
  if (!x0_.empty()) {
    auto [lo, hi] = std::minmax_element(x0_.begin(), x0_.end());
    x_min_ = *lo;
    x_max_ = *hi;
    chi0_ = std::max(std::fabs(*lo), std::fabs(*hi));
  }
  for (std::size_t i = 0; i < x0_.size(); ++i) breakpoints_[i].push_back({0.0, x0_[i], Control::off});
}

void Trace::push_breakpoint(std::size_t node, Breakpoint bp) {
  auto& list = breakpoints_[node];
  if (!list.empty() && list.back().time == bp.time) {
    list.back() = bp;
    return;
  }
  if (!list.empty() && bp.time < list.back().time)
    throw std::logic_error("breakpoints must be pushed in time order");
  list.push_back(bp);
}

void Trace::push_poll_time(double t) {
  if (poll_times_.empty() || poll_times_.back() != t) ++distinct_polls_;
  poll_times_.push_back(t);
}

void Trace::close(double horizon) {
  horizon_ = horizon;
  for (auto& list : breakpoints_) {
    const Breakpoint& last = list.back();
    if (horizon > last.time) {
      list.push_back({horizon, last.x + as_rate(last.u) * (horizon - last.time), last.u});
    }
  }
}

void Trace::prune_before(double cut, std::size_t keep_polls) {
  for (auto& list : breakpoints_) {
    auto it = std::upper_bound(list.begin(), list.end(), cut,
                               [](double t, const Breakpoint& b) { return t < b.time; });
    if (it == list.begin()) continue;
    list.erase(list.begin(), std::prev(it));
  }
  if (poll_times_.size() > keep_polls)
    poll_times_.erase(poll_times_.begin(), poll_times_.end() - static_cast<std::ptrdiff_t>(keep_polls));
  retained_from_ = std::max(retained_from_, cut);
}

double Trace::node_state_at(std::size_t node, double t) const {
  if (t < retained_from_ || t > horizon_) throw std::out_of_range("time outside recorded trace");
  const auto& list = breakpoints_[node];
  auto it = std::upper_bound(list.begin(), list.end(), t,
                             [](double v, const Breakpoint& b) { return v < b.time; });
  if (it == list.begin()) throw std::out_of_range("time precedes retained history");
  const Breakpoint& b = *std::prev(it);
  return b.x + as_rate(b.u) * (t - b.time);
}

std::vector<double> Trace::state_at(double t) const {
  std::vector<double> x(size());
  for (std::size_t i = 0; i < size(); ++i) x[i] = node_state_at(i, t);
  return x;
}

void write_trace_csv(std::ostream& os, const Trace& trace,
                     std::span<const std::pair<std::string, std::string>> preamble) {
  for (const auto& [k, v] : preamble) os << "#! " << k << '=' << v << '\n';
  os << "time,node,event_kind,x,u,ave_w,eps_i,delta_next\n";
  for (const EventRecord& r : trace.events()) {
    switch (r.kind) {
      case EventKind::reading_arrival: continue;
      case EventKind::poll:
        os << format_double(r.time) << ',' << r.node << ",poll," << format_double(r.x) << ','
           << as_int(r.u) << ",,,\n";
        break;
      case EventKind::control_update:
        os << format_double(r.time) << ',' << r.node << ",control_update," << format_double(r.x)
           << ',' << as_int(r.u) << ',' << format_double(r.ave_w) << ','
           << format_double(r.threshold) << ',' << format_double(r.interval) << '\n';
        break;
      case EventKind::quiesce:
        os << format_double(r.time) << ",,quiesce,,,,,\n";
        break;
    }
  }
}

}  // namespace stc
