#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace krylov {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Matrix-free application y = W x. The callee may assume x and y do not alias
/// and must resize y when needed.
template <typename Scalar>
using LinearOperator = std::function<void(const Vector<Scalar>& x, Vector<Scalar>& y)>;

/// Raised by factorizations and solvers when a pivot (or curvature p*Wp)
/// is not strictly positive.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(const std::string& what, Index step)
      : std::runtime_error(what + " (not positive definite at step " + std::to_string(step) + ")"),
        step_(step) {}

  Index step() const noexcept { return step_; }

 private:
  Index step_;
};

/// A moment sequence whose Hankel determinants stop being positive before
/// the requested order.
class InsufficientSupport : public std::runtime_error {
 public:
  InsufficientSupport(const std::string& what, Index order)
      : std::runtime_error(what), order_(order) {}

  /// Number of recurrence coefficients that could be recovered.
  Index order() const noexcept { return order_; }

 private:
  Index order_;
};

}  // namespace krylov
