#pragma once

#include <functional>
#include <span>
#include <vector>

namespace krylov {

/// Sup-distance between the empirical CDFs of two samples. Ties across the
/// samples are stepped together. Throws std::invalid_argument on empty input.
double two_sample_ks(std::span<const double> a, std::span<const double> b);

/// Sup-distance between the empirical CDF of `samples` and `cdf`.
double one_sample_ks(std::span<const double> samples, const std::function<double(double)>& cdf);

double standard_normal_cdf(double x);

struct SampleMoments {
  std::size_t count = 0;
  double mean = 0.0;
  /// Unbiased (n - 1) variance.
  double variance = 0.0;
  double skewness = 0.0;
  /// Plain (non-excess) kurtosis; 3 for a normal law.
  double kurtosis = 0.0;

  double standard_error() const;
};

/// Two-pass central moments with compensated accumulation; the result does
/// not depend on anything but the order of `xs`.
SampleMoments sample_moments(std::span<const double> xs);

}  // namespace krylov
