#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace stc {

/// Ternary control value applied to a single integrator node.
enum class Control : std::int8_t { negative = -1, off = 0, positive = 1 };

inline double as_rate(Control u) { return static_cast<double>(static_cast<std::int8_t>(u)); }
inline int as_int(Control u) { return static_cast<int>(static_cast<std::int8_t>(u)); }

/// Per-node constants the control law needs. The neighbor set itself stays
/// in the Graph; the law only consumes the readings gathered from it.
struct NodeParams {
  std::size_t index = 0;
  std::size_t degree = 0;
  double eps = 0.0;
};

/// Outcome of one sampling instant.
struct SampleDecision {
  Control control = Control::off;
  double interval = 0.0;   // time until the next poll
  double threshold = 0.0;  // eps_i evaluated on the node's own state
  double average = 0.0;    // noisy local average used for the decision
};

/// eps * |x| when |x| >= 1, otherwise eps. Never smaller than eps.
double adaptive_threshold(double x, double eps);

/// sign(z) when |z| >= alpha (inclusive), otherwise off.
Control quantized_sign(double z, double alpha);

/// Sum over neighbors of (z_j - x_i). Throws on an empty reading list.
double noisy_average(std::span<const double> readings, double x_i);

/// Same sum taken over true neighbor states.
double noiseless_average(std::span<const double> states, double x_i);

/// Control law at a poll instant: threshold from the node's own state,
/// quantized sign of the noisy average, and the self-triggered interval
/// |ave|/(4 d_i) when active or eps/(4 d_i) when dormant.
SampleDecision on_poll(const NodeParams& params, double x_i, std::span<const double> readings);

/// Delayed variant, evaluated at the instant the last reading arrives.
/// `x_i_at_update` is the node's own state at that instant; readings are the
/// neighbor values as transmitted. The next poll is at update time + interval.
SampleDecision on_delayed_update(const NodeParams& params, double x_i_at_update,
                                 std::span<const double> readings);

void validate_eps(double eps);

}  // namespace stc
