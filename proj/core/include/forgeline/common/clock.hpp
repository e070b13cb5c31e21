#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace forgeline {

inline constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

/// Source of timestamps in nanoseconds since the Unix epoch.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ns() const = 0;
};

class WallClock final : public Clock {
 public:
  std::int64_t now_ns() const override {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

/// Deterministic clock advanced explicitly by tests and replays.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start_ns = 0) : now_(start_ns) {}

  std::int64_t now_ns() const override { return now_.load(std::memory_order_acquire); }
  void set(std::int64_t ns) { now_.store(ns, std::memory_order_release); }
  void advance(std::int64_t ns) { now_.fetch_add(ns, std::memory_order_acq_rel); }

 private:
  std::atomic<std::int64_t> now_;
};

/// Wall time re-anchored at a chosen origin; ticks with the steady clock.
class AnchoredClock final : public Clock {
 public:
  explicit AnchoredClock(std::int64_t origin_ns)
      : origin_ns_(origin_ns), start_(std::chrono::steady_clock::now()) {}

  std::int64_t now_ns() const override {
    auto elapsed = std::chrono::steady_clock::now() - start_;
    return origin_ns_ + std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count();
  }

 private:
  std::int64_t origin_ns_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace forgeline
