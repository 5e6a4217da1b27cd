#include "stc/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace stc {

void validate_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
}

double adaptive_threshold(double x, double eps) {
  validate_eps(eps);
  const double magnitude = std::fabs(x);
  return magnitude >= 1.0 ? eps * magnitude : eps;
}

Control quantized_sign(double z, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("quantizer level must be positive");
  if (std::fabs(z) < alpha) return Control::off;
  return z > 0.0 ? Control::positive : Control::negative;
}

double noisy_average(std::span<const double> readings, double x_i) {
  if (readings.empty()) throw std::invalid_argument("local average needs at least one neighbor");
  double sum = 0.0;
  for (double z : readings) sum += z - x_i;
  return sum;
}

double noiseless_average(std::span<const double> states, double x_i) {
  return noisy_average(states, x_i);
}

SampleDecision on_poll(const NodeParams& params, double x_i, std::span<const double> readings) {
  if (readings.size() != params.degree)
    throw std::invalid_argument("on_poll needs exactly one reading per neighbor");
  SampleDecision d;
  d.threshold = adaptive_threshold(x_i, params.eps);
  d.average = noisy_average(readings, x_i);
  d.control = quantized_sign(d.average, d.threshold);
  const double four_d = 4.0 * static_cast<double>(params.degree);
  d.interval = d.control == Control::off ? params.eps / four_d : std::fabs(d.average) / four_d;
  return d;
}

SampleDecision on_delayed_update(const NodeParams& params, double x_i_at_update,
                                 std::span<const double> readings) {
  // Same law; only the instant at which it is evaluated differs.
  return on_poll(params, x_i_at_update, readings);
}

}  // namespace stc
