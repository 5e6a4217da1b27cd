#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stc/engine.hpp"
#include "stc/graph.hpp"
#include "stc/trace.hpp"

namespace stc {

// ---------------------------------------------------------------------------
// Closed-form radii

/// max(eps, eps chi0) + (eps/3 + 3 d_max) w_bound: radius of the set every
/// local average eventually stays inside under noise.
double radius_r(double eps, double chi0, std::size_t d_max, double w_bound);

/// (1/3 + (4/3) d_max / eps) w_bound: magnitude beyond which noise-driven
/// drift cannot push the state.
double gamma_bound(double eps, std::size_t d_max, double w_bound);

/// Delayed counterparts: the delay enters as extra noise, 3 tau_max in the
/// radius and tau_max in the state bound.
double radius_r_delay(double eps, double chi0, std::size_t d_max, double w_bound, double tau_max);
double gamma_bound_delay(double eps, std::size_t d_max, double w_bound, double tau_max);

struct BoundsReport {
  double eps = 0.0;
  double chi0 = 0.0;
  std::size_t d_max = 0;
  double w_bound = 0.0;
  double tau_max = 0.0;

  double r = 0.0;
  double gamma = 0.0;
  double r_bar = 0.0;
  double gamma_bar = 0.0;
};

BoundsReport compute_bounds(double eps, double chi0, std::size_t d_max, double w_bound,
                            double tau_max = 0.0);

// ---------------------------------------------------------------------------
// Pointwise set membership

/// sum_{j in N_i} (x_j - x_i)
double local_average(const Graph& g, std::span<const double> x, NodeId i);
double max_abs_local_average(const Graph& g, std::span<const double> x);

/// `margin` is radius - max_i |ave_i|; membership is margin > 0 (strict).
struct Membership {
  bool inside = false;
  double margin = 0.0;
};

Membership in_set_E(std::span<const double> x, const Graph& g, double eps, double chi0);
Membership in_set_D(std::span<const double> x, const Graph& g, double radius);

/// 0.5 x' L x
double lyapunov(std::span<const double> x, const Graph& g);

// ---------------------------------------------------------------------------
// Trace-level checks

enum class EnvelopeMode { noiseless, noisy, delayed };

struct EnvelopeViolation {
  double time = 0.0;
  NodeId node = 0;
  double value = 0.0;
  double limit = 0.0;
};

struct EnvelopeReport {
  double upper = 0.0;
  double lower = 0.0;
  /// Smallest distance to either limit over all breakpoints (negative when violated).
  double min_margin = 0.0;
  std::optional<EnvelopeViolation> first_violation;
  bool ok() const { return !first_violation; }
};

/// Checks every breakpoint against [lower, upper]: the initial extremes in
/// the noiseless mode; in the noisy and delayed modes each side is the
/// initial extreme when its magnitude reaches gamma (gamma_bar), otherwise
/// +-gamma (gamma_bar).
EnvelopeReport envelope_check(const Trace& trace, const BoundsReport& bounds, EnvelopeMode mode,
                              double tolerance = 1e-9);

/// Breakpoint instants of all nodes, the grid {0, h, 2h, ...} and the
/// horizon, sorted and deduplicated, restricted to the retained history.
std::vector<double> evaluation_points(const Trace& trace, double h_metric);

/// Earliest evaluation point from which every later point satisfies
/// max_i |ave_i| < radius; nullopt when the last point fails.
std::optional<double> entry_time(const Trace& trace, const Graph& g, double radius,
                                 double h_metric = 0.01);

struct ContainmentReport {
  std::optional<double> first_entry;      // first point inside
  std::optional<double> sustained_entry;  // entry_time()
  double post_entry_max = 0.0;            // max_i |ave_i| from first_entry on
  bool contained() const { return first_entry && first_entry == sustained_entry; }
};

ContainmentReport containment(const Trace& trace, const Graph& g, double radius,
                              double h_metric = 0.01);

/// Earliest instant after which every control stays zero up to the horizon.
std::optional<double> convergence_time(const Trace& trace);

struct LyapunovReport {
  std::size_t checks = 0;
  double worst_increase = 0.0;
  std::optional<double> first_increase_at;
  bool monotone() const { return !first_increase_at; }
};

/// V evaluated at every control-update instant in the event log.
LyapunovReport lyapunov_check(const Trace& trace, const Graph& g, double rel_tolerance = 1e-9);

struct LemmaReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::optional<double> first_violation_at;
  bool ok() const { return violations == 0; }
};

/// eps_i at every decision <= radius - (5/3) d_max w_eff, with w_eff the
/// noise bound (plus 3 tau_max with delays).
LemmaReport threshold_lemma_check(const Trace& trace, double radius, std::size_t d_max, double w_eff,
                                  double tolerance = 1e-9);

/// Whenever |ave_i| >= radius at a decision, the true local average at the
/// node's next decision keeps the same strict sign.
LemmaReport sign_lemma_check(const Trace& trace, double radius);

/// Node-to-node bound between a maximal node M and a minimal node m when
/// every |ave_i| < r. Returns nullopt when d_M - delta <= 0.
std::optional<double> alpha_bound(const Graph& g, double r, NodeId max_node, NodeId min_node);

/// max_{i,j} |x_i - x_j| over evaluation points at or after `from`.
double max_spread_after(const Trace& trace, double from, double h_metric = 0.01);

/// max_i (max x_i - min x_i) over [from, to], exact on the piecewise-linear trace.
double max_variation(const Trace& trace, double from, double to);

/// Largest |x_i(t)| over all breakpoints.
double max_abs_state(const Trace& trace);

/// Replays the breakpoints: each segment must end where the next begins.
/// Returns the largest continuity defect.
double exactness_defect(const Trace& trace);

// ---------------------------------------------------------------------------
// Monte Carlo indices

/// Sorted, deduplicated poll instants up to the horizon (retained part only).
std::vector<double> sample_time_union(const Trace& trace);

struct WindowIndices {
  double mla = 0.0;   // mean over the window of max_i |ave_i|
  double mnd = 0.0;   // mean of max_{i,j} |x_i - x_j|
  double mdec = 0.0;  // mean of max_i |x_i - x_*|
  std::size_t samples = 0;  // S
};

/// Window statistics over the last `window` sample instants. Throws
/// std::invalid_argument unless S >= 10 * window.
WindowIndices window_indices(const Trace& trace, const Graph& g, std::size_t window);

struct MonteCarloReport {
  double a_mla = 0.0;
  double a_mnd = 0.0;
  double a_mdec = 0.0;
  std::size_t trials = 0;
  std::size_t window = 0;
  double horizon = 0.0;
  std::vector<WindowIndices> per_trial;
};

MonteCarloReport aggregate_indices(std::vector<WindowIndices> per_trial, std::size_t window,
                                   double horizon);
MonteCarloReport asymptotic_indices(std::span<const Trace> traces, std::span<const Graph> graphs,
                                    std::size_t window);

// ---------------------------------------------------------------------------
// Online monitor

/// Tracks every local average as an exact piecewise-linear function while a
/// simulation runs, without retaining the trace.
///
/// A node enters at its first decision with |ave_i| < radius; from then on
/// the supremum of |ave_i| over continuous time is accumulated from segment
/// endpoints, where a linear piece attains its extremes.
class AverageMonitor : public UpdateObserver {
 public:
  AverageMonitor(const Graph& g, std::span<const double> x0, double radius);

  void on_control_update(double t, NodeId node, Control before, Control after) override;
  void on_finish(double t) override;

  /// Instant at which the last node entered; nullopt if some node never did.
  std::optional<double> entry_time() const;
  /// Largest |ave_i| over all nodes after their own entry.
  double post_entry_max() const { return post_entry_max_; }
  /// Largest |ave_i| over the whole run.
  double overall_max() const { return overall_max_; }
  double radius() const { return radius_; }

 private:
  double value_at(NodeId i, double t) const { return base_[i] + rate_[i] * (t - since_[i]); }
  void rebase(NodeId i, double t);

  const Graph& graph_;
  double radius_;
  std::vector<double> base_;
  std::vector<double> since_;
  std::vector<double> rate_;
  std::vector<std::optional<double>> entered_;
  double post_entry_max_ = 0.0;
  double overall_max_ = 0.0;
};

}  // namespace stc
