#include <algorithm>

#include "wmcp/resolver.hpp"

namespace wmcp::resolver {

Throttle::Throttle(std::int64_t rpm, std::optional<std::int64_t> burst, Millis start)
    : rpm_(rpm), burst_(burst.value_or(default_burst(rpm))), level_(0), last_(start) {
  if (rpm_ <= 0) throw Error(ErrorCode::InvalidArgument, "rpm must be positive");
  if (burst_ <= 0) throw Error(ErrorCode::InvalidArgument, "burst must be positive");
  level_ = burst_ * kUnit;
}

Throttle Throttle::from_policy(const EndpointPolicy& policy, Millis start) {
  if (!policy.rpm) throw Error(ErrorCode::InvalidArgument, "policy has no rpm hint");
  return Throttle(*policy.rpm, policy.burst, start);
}

std::int64_t Throttle::default_burst(std::int64_t rpm) noexcept { return std::max<std::int64_t>(1, rpm / 12); }

void Throttle::refill(Millis now) {
  if (now <= last_) return;
  const auto capacity = burst_ * kUnit;
  const auto elapsed = (now - last_).count();
  // Saturate before multiplying so long idle periods cannot overflow.
  const auto gain = elapsed >= capacity / rpm_ + 1 ? capacity : elapsed * rpm_;
  level_ = std::min(capacity, level_ + gain);
  last_ = now;
}

ThrottleDecision Throttle::acquire(Millis now) {
  std::lock_guard lock(mutex_);
  refill(now);
  if (level_ >= kUnit) {
    level_ -= kUnit;
    return ThrottleDecision::go();
  }
  const auto deficit = kUnit - level_;
  return ThrottleDecision::wait(last_ + Millis{(deficit + rpm_ - 1) / rpm_});
}

std::int64_t Throttle::available(Millis now) {
  std::lock_guard lock(mutex_);
  refill(now);
  return level_ / kUnit;
}

}  // namespace wmcp::resolver
