#include "stc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stc/protocol.hpp"

namespace stc {

double radius_r(double eps, double chi0, std::size_t d_max, double w_bound) {
  return radius_r_delay(eps, chi0, d_max, w_bound, 0.0);
}

double gamma_bound(double eps, std::size_t d_max, double w_bound) {
  return gamma_bound_delay(eps, d_max, w_bound, 0.0);
}

double radius_r_delay(double eps, double chi0, std::size_t d_max, double w_bound, double tau_max) {
  validate_eps(eps);
  const double d = static_cast<double>(d_max);
  return std::max(eps, eps * chi0) + (eps / 3.0 + 3.0 * d) * (w_bound + 3.0 * tau_max);
}

double gamma_bound_delay(double eps, std::size_t d_max, double w_bound, double tau_max) {
  validate_eps(eps);
  const double d = static_cast<double>(d_max);
  return (1.0 / 3.0 + (4.0 / 3.0) * d / eps) * (w_bound + tau_max);
}

BoundsReport compute_bounds(double eps, double chi0, std::size_t d_max, double w_bound,
                            double tau_max) {
  BoundsReport b{eps, chi0, d_max, w_bound, tau_max};
  b.r = radius_r(eps, chi0, d_max, w_bound);
  b.gamma = gamma_bound(eps, d_max, w_bound);
  b.r_bar = radius_r_delay(eps, chi0, d_max, w_bound, tau_max);
  b.gamma_bar = gamma_bound_delay(eps, d_max, w_bound, tau_max);
  return b;
}

double local_average(const Graph& g, std::span<const double> x, NodeId i) {
  double sum = 0.0;
  for (NodeId j : g.neighbors(i)) sum += x[j] - x[i];
  return sum;
}

double max_abs_local_average(const Graph& g, std::span<const double> x) {
  if (x.size() != g.size()) throw std::invalid_argument("state size does not match graph");
  double worst = 0.0;
  for (NodeId i = 0; i < g.size(); ++i) worst = std::max(worst, std::fabs(local_average(g, x, i)));
  return worst;
}

Membership in_set_D(std::span<const double> x, const Graph& g, double radius) {
  const double margin = radius - max_abs_local_average(g, x);
  return {margin > 0.0, margin};
}

Membership in_set_E(std::span<const double> x, const Graph& g, double eps, double chi0) {
  return in_set_D(x, g, std::max(eps, eps * chi0));
}

double lyapunov(std::span<const double> x, const Graph& g) {
  if (x.size() != g.size()) throw std::invalid_argument("state size does not match graph");
  // 0.5 x'Lx = 0.5 * sum over edges of (x_i - x_j)^2
  double v = 0.0;
  for (const auto& [i, j] : g.edges()) v += (x[i] - x[j]) * (x[i] - x[j]);
  return 0.5 * v;
}

EnvelopeReport envelope_check(const Trace& trace, const BoundsReport& bounds, EnvelopeMode mode,
                              double tolerance) {
  EnvelopeReport rep;
  const double x_hi = trace.initial_max();
  const double x_lo = trace.initial_min();
  if (mode == EnvelopeMode::noiseless) {
    rep.upper = x_hi;
    rep.lower = x_lo;
  } else {
    const double g = mode == EnvelopeMode::noisy ? bounds.gamma : bounds.gamma_bar;
    rep.upper = std::fabs(x_hi) >= g ? x_hi : g;
    rep.lower = std::fabs(x_lo) >= g ? x_lo : -g;
  }
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (NodeId i = 0; i < trace.size(); ++i) {
    for (const Breakpoint& b : trace.breakpoints(i)) {
      const double margin = std::min(rep.upper - b.x, b.x - rep.lower);
      rep.min_margin = std::min(rep.min_margin, margin);
      if (margin < -tolerance && (!rep.first_violation || b.time < rep.first_violation->time)) {
        const double limit = b.x > rep.upper ? rep.upper : rep.lower;
        rep.first_violation = EnvelopeViolation{b.time, i, b.x, limit};
      }
    }
  }
  return rep;
}

std::vector<double> evaluation_points(const Trace& trace, double h_metric) {
  if (!(h_metric > 0.0)) throw std::invalid_argument("metric grid step must be positive");
  std::vector<double> pts;
  const double from = trace.retained_from();
  const double to = trace.horizon();
  for (NodeId i = 0; i < trace.size(); ++i)
    for (const Breakpoint& b : trace.breakpoints(i))
      if (b.time >= from && b.time <= to) pts.push_back(b.time);
  const auto first = static_cast<std::size_t>(std::ceil(from / h_metric));
  for (std::size_t k = first;; ++k) {
    const double t = static_cast<double>(k) * h_metric;
    if (t > to) break;
    pts.push_back(t);
  }
  pts.push_back(from);
  pts.push_back(to);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

namespace {

/// max_i |ave_i| at each evaluation point.
std::vector<double> max_average_series(const Trace& trace, const Graph& g,
                                       const std::vector<double>& pts) {
  if (trace.size() != g.size()) throw std::invalid_argument("trace and graph differ in node count");
  std::vector<double> out;
  out.reserve(pts.size());
  for (double t : pts) {
    const auto x = trace.state_at(t);
    out.push_back(max_abs_local_average(g, x));
  }
  return out;
}

}  // namespace

std::optional<double> entry_time(const Trace& trace, const Graph& g, double radius, double h_metric) {
  return containment(trace, g, radius, h_metric).sustained_entry;
}

ContainmentReport containment(const Trace& trace, const Graph& g, double radius, double h_metric) {
  const auto pts = evaluation_points(trace, h_metric);
  const auto series = max_average_series(trace, g, pts);
  ContainmentReport rep;
  std::optional<std::size_t> first;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (series[k] < radius) {
      first = k;
      break;
    }
  }
  if (!first) return rep;
  rep.first_entry = pts[*first];
  rep.post_entry_max = *std::max_element(series.begin() + static_cast<std::ptrdiff_t>(*first), series.end());
  // Walk back from the end to the last failing point.
  std::size_t k = pts.size();
  while (k > 0 && series[k - 1] < radius) --k;
  if (k < pts.size()) rep.sustained_entry = pts[k];
  return rep;
}

std::optional<double> convergence_time(const Trace& trace) {
  double latest = 0.0;
  for (NodeId i = 0; i < trace.size(); ++i) {
    const auto bps = trace.breakpoints(i);
    // The closing breakpoint repeats the last control; find where it began.
    std::size_t k = bps.size();
    while (k > 1 && bps[k - 2].u == bps[k - 1].u) --k;
    if (bps[k - 1].u != Control::off) return std::nullopt;
    latest = std::max(latest, bps[k - 1].time);
  }
  return latest;
}

LyapunovReport lyapunov_check(const Trace& trace, const Graph& g, double rel_tolerance) {
  LyapunovReport rep;
  std::optional<double> previous;
  double last_time = -1.0;
  for (const EventRecord& e : trace.events()) {
    if (e.kind != EventKind::control_update || e.time == last_time) continue;
    last_time = e.time;
    const auto x = trace.state_at(e.time);
    const double v = lyapunov(x, g);
    ++rep.checks;
    if (previous) {
      const double increase = v - *previous;
      rep.worst_increase = std::max(rep.worst_increase, increase);
      if (increase > rel_tolerance * std::max(1.0, *previous) && !rep.first_increase_at)
        rep.first_increase_at = e.time;
    }
    previous = v;
  }
  return rep;
}

LemmaReport threshold_lemma_check(const Trace& trace, double radius, std::size_t d_max, double w_eff,
                                  double tolerance) {
  LemmaReport rep;
  const double limit = radius - (5.0 / 3.0) * static_cast<double>(d_max) * w_eff;
  for (const EventRecord& e : trace.events()) {
    if (e.kind != EventKind::control_update) continue;
    ++rep.checked;
    if (e.threshold > limit + tolerance) {
      ++rep.violations;
      if (!rep.first_violation_at) rep.first_violation_at = e.time;
    }
  }
  return rep;
}

LemmaReport sign_lemma_check(const Trace& trace, double radius) {
  LemmaReport rep;
  std::vector<std::optional<double>> previous(trace.size());
  for (const EventRecord& e : trace.events()) {
    if (e.kind != EventKind::control_update) continue;
    auto& prev = previous[e.node];
    if (prev && std::fabs(*prev) >= radius) {
      ++rep.checked;
      if (!(e.ave * (*prev > 0.0 ? 1.0 : -1.0) > 0.0)) {
        ++rep.violations;
        if (!rep.first_violation_at) rep.first_violation_at = e.time;
      }
    }
    prev = e.ave;
  }
  return rep;
}

std::optional<double> alpha_bound(const Graph& g, double r, NodeId max_node, NodeId min_node) {
  if (max_node == min_node) throw std::invalid_argument("alpha_bound needs two distinct nodes");
  const std::size_t d_max_node = g.degree(max_node);
  const std::size_t shared = common_neighbors(g, max_node, min_node);
  const bool m_in_nm = g.adjacent(max_node, min_node);
  std::size_t exclusive = d_max_node - shared;  // |N_M \ N_m|
  const std::size_t delta = m_in_nm ? exclusive - 1 : exclusive;
  const double denom = static_cast<double>(d_max_node) - static_cast<double>(delta);
  if (denom <= 0.0) return std::nullopt;
  // With M in N_m the bound (r + r - alpha)/(d_M - delta) is solved for alpha.
  if (m_in_nm) return 2.0 * r / (denom + 1.0);
  return 2.0 * r / denom;
}

double max_spread_after(const Trace& trace, double from, double h_metric) {
  double worst = 0.0;
  for (double t : evaluation_points(trace, h_metric)) {
    if (t < from) continue;
    const auto x = trace.state_at(t);
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    worst = std::max(worst, *hi - *lo);
  }
  return worst;
}

double max_variation(const Trace& trace, double from, double to) {
  double worst = 0.0;
  for (NodeId i = 0; i < trace.size(); ++i) {
    double lo = trace.node_state_at(i, from);
    double hi = lo;
    const double end = trace.node_state_at(i, to);
    lo = std::min(lo, end);
    hi = std::max(hi, end);
    for (const Breakpoint& b : trace.breakpoints(i)) {
      if (b.time < from || b.time > to) continue;
      lo = std::min(lo, b.x);
      hi = std::max(hi, b.x);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

double max_abs_state(const Trace& trace) {
  double worst = 0.0;
  for (NodeId i = 0; i < trace.size(); ++i)
    for (const Breakpoint& b : trace.breakpoints(i)) worst = std::max(worst, std::fabs(b.x));
  return worst;
}

double exactness_defect(const Trace& trace) {
  double worst = 0.0;
  for (NodeId i = 0; i < trace.size(); ++i) {
    const auto bps = trace.breakpoints(i);
    for (std::size_t k = 1; k < bps.size(); ++k) {
      if (!(bps[k].time > bps[k - 1].time)) return std::numeric_limits<double>::infinity();
      const double predicted = bps[k - 1].x + as_rate(bps[k - 1].u) * (bps[k].time - bps[k - 1].time);
      worst = std::max(worst, std::fabs(predicted - bps[k].x));
    }
  }
  return worst;
}

std::vector<double> sample_time_union(const Trace& trace) {
  std::vector<double> out;
  for (double t : trace.poll_times())
    if (t <= trace.horizon()) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

WindowIndices window_indices(const Trace& trace, const Graph& g, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  const auto times = sample_time_union(trace);
  // S counts instants t_1..t_S after t_0.
  const std::size_t total = trace.distinct_poll_instants();
  const std::size_t samples = total == 0 ? 0 : total - 1;
  if (samples < 10 * window)
    throw std::invalid_argument("window too large: need S >= 10 W");
  if (times.size() < window) throw std::invalid_argument("trace retains fewer instants than the window");
  const double x_star = 0.5 * (trace.initial_max() + trace.initial_min());
  WindowIndices out;
  out.samples = samples;
  for (std::size_t k = times.size() - window; k < times.size(); ++k) {
    const auto x = trace.state_at(times[k]);
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    double dec = 0.0;
    for (double v : x) dec = std::max(dec, std::fabs(v - x_star));
    out.mla += max_abs_local_average(g, x);
    out.mnd += *hi - *lo;
    out.mdec += dec;
  }
  const double w = static_cast<double>(window);
  out.mla /= w;
  out.mnd /= w;
  out.mdec /= w;
  return out;
}

MonteCarloReport aggregate_indices(std::vector<WindowIndices> per_trial, std::size_t window,
                                   double horizon) {
  MonteCarloReport rep;
  rep.trials = per_trial.size();
  rep.window = window;
  rep.horizon = horizon;
  for (const auto& w : per_trial) {
    rep.a_mla += w.mla;
    rep.a_mnd += w.mnd;
    rep.a_mdec += w.mdec;
  }
  if (rep.trials > 0) {
    const double n = static_cast<double>(rep.trials);
    rep.a_mla /= n;
    rep.a_mnd /= n;
    rep.a_mdec /= n;
  }
  rep.per_trial = std::move(per_trial);
  return rep;
}

MonteCarloReport asymptotic_indices(std::span<const Trace> traces, std::span<const Graph> graphs,
                                    std::size_t window) {
  if (traces.size() != graphs.size()) throw std::invalid_argument("one graph per trace required");
  std::vector<WindowIndices> per_trial;
  double horizon = 0.0;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    per_trial.push_back(window_indices(traces[k], graphs[k], window));
    horizon = traces[k].horizon();
  }
  return aggregate_indices(std::move(per_trial), window, horizon);
}

AverageMonitor::AverageMonitor(const Graph& g, std::span<const double> x0, double radius)
    : graph_(g),
      radius_(radius),
      base_(g.size()),
      since_(g.size(), 0.0),
      rate_(g.size(), 0.0),
      entered_(g.size()) {
  for (NodeId i = 0; i < g.size(); ++i) {
    base_[i] = local_average(g, x0, i);
    overall_max_ = std::max(overall_max_, std::fabs(base_[i]));
  }
}

void AverageMonitor::rebase(NodeId i, double t) {
  const double v = value_at(i, t);
  base_[i] = v;
  since_[i] = t;
  overall_max_ = std::max(overall_max_, std::fabs(v));
  if (entered_[i]) post_entry_max_ = std::max(post_entry_max_, std::fabs(v));
}

void AverageMonitor::on_control_update(double t, NodeId node, Control before, Control after) {
  if (!entered_[node]) {
    const double v = value_at(node, t);
    if (std::fabs(v) < radius_) {
      entered_[node] = t;
      post_entry_max_ = std::max(post_entry_max_, std::fabs(v));
    }
  }
  if (before == after) return;
  const double delta = as_rate(after) - as_rate(before);
  rebase(node, t);
  rate_[node] -= static_cast<double>(graph_.degree(node)) * delta;
  for (NodeId j : graph_.neighbors(node)) {
    rebase(j, t);
    rate_[j] += delta;
  }
}

void AverageMonitor::on_finish(double t) {
  for (NodeId i = 0; i < graph_.size(); ++i) rebase(i, t);
}

std::optional<double> AverageMonitor::entry_time() const {
  double latest = 0.0;
  for (const auto& e : entered_) {
    if (!e) return std::nullopt;
    latest = std::max(latest, *e);
  }
  return latest;
}

}  // namespace stc
