#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace krylov {

/// Neumaier (improved Kahan) compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

/// log(sum_i exp(x_i)) with the usual max shift; the shifted terms are
/// accumulated with compensation.
inline double log_sum_exp(std::span<const double> xs) noexcept {
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : xs) peak = std::max(peak, x);
  if (!std::isfinite(peak)) return peak;
  CompensatedSum acc;
  for (double x : xs) acc.add(std::exp(x - peak));
  return peak + std::log(acc.value());
}

/// Streaming log(sum exp(x_i)): O(1) per term, rescaling the running sum
/// whenever a new maximum arrives.
class LogSumExpAccumulator {
 public:
  void add(double x) noexcept {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > peak_) {
      scaled_ = scaled_ * std::exp(peak_ - x) + 1.0;
      peak_ = x;
    } else {
      scaled_ += std::exp(x - peak_);
    }
  }

  double value() const noexcept { return peak_ + std::log(scaled_); }

 private:
  double peak_ = -std::numeric_limits<double>::infinity();
  double scaled_ = 0.0;
};

}  // namespace krylov
