#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>

namespace migc {

/// Absolute tolerance used for all floating equalities (mass sums, entropy ties).
inline constexpr double kTolerance = 1e-9;

/// Tolerance used when comparing candidate scores during a search. Tighter
/// than kTolerance so that only genuine ties fall back to the tie-break order.
inline constexpr double kTieTolerance = 1e-12;

/// Neumaier-compensated sum.
inline double compensated_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double correction = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      correction += (sum - t) + v;
    } else {
      correction += (v - t) + sum;
    }
    sum = t;
  }
  return sum + correction;
}

/// Incremental form of compensated_sum for loops that do not own a buffer.
class CompensatedAccumulator {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      correction_ += (sum_ - t) + v;
    } else {
      correction_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

inline constexpr double kNaturalBase = std::numbers::e;

/// Entropy of a vector of nonnegative weights, normalized by their total.
/// Zero weights contribute nothing (0 log 0 := 0).
inline double entropy_of_masses(std::span<const double> masses, double base) noexcept {
  const double total = compensated_sum(masses);
  if (!(total > 0.0)) return 0.0;
  CompensatedAccumulator acc;
  for (double m : masses) {
    if (m > 0.0) {
      const double q = m / total;
      acc.add(-q * std::log(q));
    }
  }
  const double h = acc.value() / std::log(base);
  return h > 0.0 ? h : 0.0;
}

/// Entropy of a uniform posterior split into integer answer counts:
/// log n - (1/n) sum c log c, in the requested base.
inline double entropy_of_counts(std::span<const std::uint64_t> counts, double base) noexcept {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) return 0.0;
  const double nd = static_cast<double>(n);
  double acc = 0.0;
  for (auto c : counts) {
    if (c > 0) {
      const double cd = static_cast<double>(c);
      acc += cd * std::log(cd);
    }
  }
  const double h = (std::log(nd) - acc / nd) / std::log(base);
  return h > 0.0 ? h : 0.0;
}

/// Smallest integer l with base^-l <= p, i.e. ceil(log_base(1/p)), robust to
/// rounding at exact powers of the base.
inline std::size_t ceil_log_inverse(double p, std::size_t base) noexcept {
  std::size_t length = 0;
  double scaled = p;
  while (scaled < 1.0 - kTieTolerance) {
    scaled *= static_cast<double>(base);
    ++length;
  }
  return length;
}

/// base^exponent, saturating at UINT64_MAX.
inline std::uint64_t saturating_pow(std::uint64_t base, std::size_t exponent) noexcept {
  std::uint64_t result = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (base != 0 && result > UINT64_MAX / base) return UINT64_MAX;
    result *= base;
  }
  return result;
}

}  // namespace migc
