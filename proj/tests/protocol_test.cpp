#include <gtest/gtest.h>

#include <vector>

#include "stc/protocol.hpp"

using namespace stc;

TEST(Protocol, AdaptiveThreshold) {
  EXPECT_DOUBLE_EQ(adaptive_threshold(0.3, 0.05), 0.05);
  EXPECT_DOUBLE_EQ(adaptive_threshold(-0.99, 0.05), 0.05);
  EXPECT_DOUBLE_EQ(adaptive_threshold(1.0, 0.05), 0.05);
  EXPECT_DOUBLE_EQ(adaptive_threshold(-4.0, 0.05), 0.2);
  EXPECT_DOUBLE_EQ(adaptive_threshold(10.0, 0.1), 1.0);
}

TEST(Protocol, QuantizedSignIsInclusive) {
  EXPECT_EQ(quantized_sign(0.05, 0.05), Control::positive);
  EXPECT_EQ(quantized_sign(-0.05, 0.05), Control::negative);
  EXPECT_EQ(quantized_sign(0.0499, 0.05), Control::off);
  EXPECT_EQ(quantized_sign(0.0, 0.05), Control::off);
  EXPECT_THROW(quantized_sign(1.0, 0.0), std::invalid_argument);
}

TEST(Protocol, Averages) {
  const std::vector<double> z{1.5, -0.5, 2.0};
  EXPECT_DOUBLE_EQ(noisy_average(z, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(noiseless_average(z, 0.0), 3.0);
  EXPECT_THROW(noisy_average({}, 0.0), std::invalid_argument);
}

TEST(Protocol, PollActiveInterval) {
  const std::vector<double> z{1.0};
  const SampleDecision d = on_poll({0, 1, 0.05}, 0.0, z);
  EXPECT_EQ(d.control, Control::positive);
  EXPECT_DOUBLE_EQ(d.interval, 0.25);
  EXPECT_DOUBLE_EQ(d.threshold, 0.05);
  EXPECT_DOUBLE_EQ(d.average, 1.0);
}

TEST(Protocol, PollDormantInterval) {
  const std::vector<double> z{0.51, 0.52};
  const SampleDecision d = on_poll({3, 2, 0.05}, 0.5, z);
  EXPECT_EQ(d.control, Control::off);
  EXPECT_DOUBLE_EQ(d.interval, 0.05 / 8.0);
}

TEST(Protocol, ThresholdScalesWithOwnState) {
  // |ave| = 0.3 is active at x = 2 with eps 0.1 but dormant at x = 5.
  const std::vector<double> up{2.3};
  EXPECT_EQ(on_poll({0, 1, 0.1}, 2.0, up).control, Control::positive);
  const std::vector<double> far{5.3};
  const SampleDecision d = on_poll({0, 1, 0.1}, 5.0, far);
  EXPECT_EQ(d.control, Control::off);
  EXPECT_DOUBLE_EQ(d.threshold, 0.5);
}

TEST(Protocol, IntervalAlwaysPositive) {
  for (double x : {-3.0, 0.0, 0.7, 12.0}) {
    for (double z : {-1.0, x, x + 1e-12, 4.0}) {
      const std::vector<double> r{z, z};
      EXPECT_GT(on_poll({0, 2, 0.05}, x, r).interval, 0.0);
    }
  }
}

TEST(Protocol, PollRejectsReadingCountMismatch) {
  const std::vector<double> z{1.0};
  EXPECT_THROW(on_poll({0, 2, 0.05}, 0.0, z), std::invalid_argument);
}

TEST(Protocol, DelayedUpdateMatchesPollLaw) {
  const std::vector<double> z{0.0, 3.0};
  const SampleDecision a = on_poll({1, 2, 0.05}, 1.0, z);
  const SampleDecision b = on_delayed_update({1, 2, 0.05}, 1.0, z);
  EXPECT_EQ(a.control, b.control);
  EXPECT_DOUBLE_EQ(a.interval, b.interval);
}

TEST(Protocol, EpsValidation) {
  EXPECT_THROW(validate_eps(0.0), std::invalid_argument);
  EXPECT_THROW(validate_eps(1.0), std::invalid_argument);
  EXPECT_NO_THROW(validate_eps(0.5));
}
