#include "stc/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stc {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kNoiseDomain = 0x6e6f697365ULL;  // "noise"
constexpr std::uint64_t kDelayDomain = 0x64656c6179ULL;  // "delay"
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = mix64(master + kGolden);
  h = mix64(h ^ (a + kGolden));
  h = mix64(h ^ (b + 2 * kGolden));
  h = mix64(h ^ (c + 3 * kGolden));
  return h;
}

double CounterStream::next_unit() {
  const std::uint64_t bits = mix64(key_ + (++counter_) * kGolden);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double CounterStream::next_uniform(double lo, double hi) {
  return std::min(hi, lo + (hi - lo) * next_unit());
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::zero: return "zero";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::sign_preserving: return "sign_preserving";
    case NoiseKind::sinusoid_plus_uniform: return "sinusoid_plus_uniform";
  }
  return "?";
}

std::string to_string(DelayKind kind) {
  switch (kind) {
    case DelayKind::zero: return "zero";
    case DelayKind::constant: return "constant";
    case DelayKind::uniform: return "uniform";
  }
  return "?";
}

double NoiseSpec::bound() const {
  switch (kind) {
    case NoiseKind::zero: return 0.0;
    case NoiseKind::uniform: return std::max(std::fabs(low), std::fabs(high));
    case NoiseKind::sign_preserving: return high;
    case NoiseKind::sinusoid_plus_uniform: return std::fabs(amplitude) + v_range;
  }
  return 0.0;
}

void NoiseSpec::validate() const {
  switch (kind) {
    case NoiseKind::zero: break;
    case NoiseKind::uniform:
      if (!(low <= high) || !std::isfinite(low) || !std::isfinite(high))
        throw std::invalid_argument("uniform noise needs finite low <= high");
      break;
    case NoiseKind::sign_preserving:
      if (!(high >= 0.0) || !std::isfinite(high))
        throw std::invalid_argument("sign-preserving noise needs a finite bound >= 0");
      break;
    case NoiseKind::sinusoid_plus_uniform:
      if (!(v_range >= 0.0) || !std::isfinite(v_range) || !std::isfinite(amplitude))
        throw std::invalid_argument("sinusoid noise needs finite amplitude and v_range >= 0");
      break;
  }
}

void DelaySpec::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("delay rho must lie in [0,1]");
  if (kind != DelayKind::zero && !(tau_max >= 0.0 && std::isfinite(tau_max)))
    throw std::invalid_argument("delay tau_max must be finite and >= 0");
}

NoiseSource::NoiseSource(NoiseSpec spec, std::size_t n, std::uint64_t seed)
    : spec_(spec), n_(n), seed_(seed) {
  spec_.validate();
  const std::size_t count = spec_.per_link ? n * n : n;
  slots_.resize(count);
  for (std::size_t k = 0; k < count; ++k)
    slots_[k].stream = CounterStream(derive_seed(seed_, kNoiseDomain, k));
}

NoiseSource::Slot& NoiseSource::slot(std::size_t sender, std::size_t receiver) {
  return spec_.per_link ? slots_[sender * n_ + receiver] : slots_[sender];
}

double NoiseSource::sample(std::size_t sender, std::size_t receiver, double t) {
  if (spec_.kind == NoiseKind::zero) return 0.0;
  Slot& s = slot(sender, receiver);
  if (s.last_time == t) return s.last_value;
  double w = 0.0;
  switch (spec_.kind) {
    case NoiseKind::zero: break;
    case NoiseKind::uniform: w = s.stream.next_uniform(spec_.low, spec_.high); break;
    case NoiseKind::sign_preserving: w = s.stream.next_uniform(0.0, spec_.high); break;
    case NoiseKind::sinusoid_plus_uniform: {
      const double k = static_cast<double>(sender + 1);
      const double phase = k * std::numbers::pi / (3.0 * static_cast<double>(n_));
      const double v = s.stream.next_uniform(-spec_.v_range, spec_.v_range);
      w = v + spec_.amplitude * std::sin(2.0 * k * t + phase);
      break;
    }
  }
  s.last_time = t;
  s.last_value = w;
  return w;
}

DelaySource::DelaySource(DelaySpec spec, std::size_t n, std::uint64_t seed)
    : spec_(spec), n_(n) {
  spec_.validate();
  if (spec_.kind == DelayKind::uniform) {
    streams_.resize(n * n);
    for (std::size_t k = 0; k < streams_.size(); ++k)
      streams_[k] = CounterStream(derive_seed(seed, kDelayDomain, k));
  }
}

DelayDraw DelaySource::draw(std::size_t receiver, std::size_t sender, double poll_time) {
  double tau = 0.0;
  switch (spec_.kind) {
    case DelayKind::zero: break;
    case DelayKind::constant: tau = spec_.tau_max; break;
    case DelayKind::uniform: tau = spec_.tau_max * streams_[receiver * n_ + sender].next_unit(); break;
  }
  if (tau == 0.0) return {poll_time, poll_time};
  const double arrival = poll_time + tau;
  const double transmit = std::min(arrival, poll_time + spec_.rho * tau);
  return {transmit, arrival};
}

}  // namespace stc
