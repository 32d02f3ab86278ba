#include "krylov/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "krylov/numeric.hpp"

namespace krylov {

double two_sample_ks(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two_sample_ks: both samples must be nonempty");
  std::vector<double> xs(a.begin(), a.end());
  std::vector<double> ys(b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double t = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == t) ++i;
    while (j < ys.size() && ys[j] == t) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return sup;
}

double one_sample_ks(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("one_sample_ks: empty sample");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    sup = std::max({sup, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return sup;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double SampleMoments::standard_error() const {
  return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
}

SampleMoments sample_moments(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("sample_moments: empty sample");
  SampleMoments out;
  out.count = xs.size();
  const double n = static_cast<double>(xs.size());
  out.mean = compensated_sum(xs) / n;
  CompensatedSum m2, m3, m4;
  for (double x : xs) {
    const double d = x - out.mean;
    const double d2 = d * d;
    m2.add(d2);
    m3.add(d2 * d);
    m4.add(d2 * d2);
  }
  out.variance = xs.size() > 1 ? m2.value() / (n - 1.0) : 0.0;
  const double pop_var = m2.value() / n;
  if (pop_var > 0.0) {
    out.skewness = (m3.value() / n) / std::pow(pop_var, 1.5);
    out.kurtosis = (m4.value() / n) / (pop_var * pop_var);
  }
  return out;
}

}  // namespace krylov
