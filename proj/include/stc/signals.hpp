#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace stc {

/// SplitMix64 finalizer; used to derive independent stream keys and seeds.
std::uint64_t mix64(std::uint64_t z);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// Counter-based uniform stream: draw k is a pure function of (key, k), so a
/// stream's values never depend on how draws from other streams interleave.
class CounterStream {
 public:
  CounterStream() = default;
  explicit CounterStream(std::uint64_t key) : key_(key) {}

  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_unit();
  /// Uniform in [lo, hi].
  double next_uniform(double lo, double hi);
  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

enum class NoiseKind { zero, uniform, sign_preserving, sinusoid_plus_uniform };

/// Bounded disturbance descriptor.
///
/// uniform draws from [low, high]; sign_preserving draws from [0, high];
/// sinusoid_plus_uniform is v + amplitude * sin(2 k t + k pi / (3 n)) with v
/// uniform in [-v_range, v_range] and k the 1-based index of the sending node.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::zero;
  double low = 0.0;
  double high = 0.0;
  double amplitude = 0.0;
  double v_range = 0.0;
  bool per_link = false;

  double bound() const;
  void validate() const;

  static NoiseSpec zero() { return {}; }
  static NoiseSpec uniform(double low, double high) {
    return {NoiseKind::uniform, low, high, 0.0, 0.0, false};
  }
  static NoiseSpec sign_preserving(double high) {
    return {NoiseKind::sign_preserving, 0.0, high, 0.0, 0.0, false};
  }
  static NoiseSpec sinusoid_plus_uniform(double amplitude, double v_range) {
    return {NoiseKind::sinusoid_plus_uniform, 0.0, 0.0, amplitude, v_range, false};
  }
};

std::string to_string(NoiseKind kind);

/// Lazily sampled noise for one trial. Values are drawn only when read.
///
/// In per-node mode every reader of node j at the same instant sees the same
/// w_j(t); in per-link mode each (sender, receiver) pair has its own stream.
class NoiseSource {
 public:
  NoiseSource(NoiseSpec spec, std::size_t n, std::uint64_t seed);

  double sample(std::size_t sender, std::size_t receiver, double t);
  const NoiseSpec& spec() const { return spec_; }

 private:
  struct Slot {
    CounterStream stream;
    double last_time = -1.0;
    double last_value = 0.0;
  };
  Slot& slot(std::size_t sender, std::size_t receiver);

  NoiseSpec spec_;
  std::size_t n_;
  std::uint64_t seed_;
  std::vector<Slot> slots_;
};

enum class DelayKind { zero, constant, uniform };

/// Bounded link delay descriptor. A reading requested at t is transmitted at
/// t + rho * tau and arrives at t + tau, with tau <= tau_max.
struct DelaySpec {
  DelayKind kind = DelayKind::zero;
  double tau_max = 0.0;
  double rho = 0.5;

  double bound() const { return kind == DelayKind::zero ? 0.0 : tau_max; }
  void validate() const;

  static DelaySpec zero() { return {}; }
  static DelaySpec constant(double tau, double rho = 0.5) { return {DelayKind::constant, tau, rho}; }
  static DelaySpec uniform(double tau_max, double rho = 0.5) {
    return {DelayKind::uniform, tau_max, rho};
  }
};

std::string to_string(DelayKind kind);

struct DelayDraw {
  double transmit = 0.0;  // v: instant at which the sender's value is taken
  double arrival = 0.0;   // s: instant at which the receiver holds it
};

class DelaySource {
 public:
  DelaySource(DelaySpec spec, std::size_t n, std::uint64_t seed);

  DelayDraw draw(std::size_t receiver, std::size_t sender, double poll_time);
  const DelaySpec& spec() const { return spec_; }

 private:
  DelaySpec spec_;
  std::size_t n_;
  std::vector<CounterStream> streams_;
};

}  // namespace stc
