#pragma once

#include <optional>
#include <vector>

#include "krylov/ensembles.hpp"
#include "krylov/types.hpp"

namespace krylov {

/// Symmetric tridiagonal matrix with diagonal a_0..a_{n-1} and
/// off-diagonal b_0..b_{n-2}.
///
/// Off-diagonals are required to be nonnegative rather than strictly
/// positive: a zero b_j is the reducible case (e.g. the identity), which the
/// recurrences and factorizations below handle without special treatment.
class JacobiMatrix {
 public:
  JacobiMatrix() = default;
  JacobiMatrix(std::vector<double> diag, std::vector<double> offdiag);

  static JacobiMatrix identity(Index n);

  Index size() const noexcept { return static_cast<Index>(diag_.size()); }
  const std::vector<double>& diag() const noexcept { return diag_; }
  const std::vector<double>& offdiag() const noexcept { return offdiag_; }

  /// Leading k x k block.
  JacobiMatrix leading(Index k) const;
  Matrix<double> dense() const;
  void apply(const Vector<double>& x, Vector<double>& y) const;

  friend bool operator==(const JacobiMatrix&, const JacobiMatrix&) = default;

 private:
  std::vector<double> diag_;
  std::vector<double> offdiag_;
};

/// Lower-bidiagonal factor H with diagonal alpha and subdiagonal beta.
class BidiagonalFactor {
 public:
  BidiagonalFactor() = default;
  BidiagonalFactor(std::vector<double> alpha, std::vector<double> beta);

  static BidiagonalFactor identity(Index n);

  Index size() const noexcept { return static_cast<Index>(alpha_.size()); }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  const std::vector<double>& beta() const noexcept { return beta_; }

  /// Trailing block H[k:, k:].
  BidiagonalFactor suffix(Index k) const;
  /// Leading block H[:k, :k].
  BidiagonalFactor leading(Index k) const;
  Matrix<double> dense() const;

  friend bool operator==(const BidiagonalFactor&, const BidiagonalFactor&) = default;

 private:
  std::vector<double> alpha_;
  std::vector<double> beta_;
};

struct LanczosOptions {
  Index max_steps = 0;
  bool reorthogonalize = true;
  /// Relative to a running Gershgorin estimate of the operator norm.
  double breakdown_tol = 1e-12;
  bool keep_basis = false;
};

template <typename Scalar>
struct LanczosResult {
  JacobiMatrix jacobi;
  Index steps_completed = 0;
  bool terminated_early = false;
  /// The off-diagonal b_{n-1} that would extend T_n; zero-ish on breakdown.
  double final_offdiag = 0.0;
  std::optional<Matrix<Scalar>> basis;
};

/// Lanczos tridiagonalization of a self-adjoint operator started from the
/// unit vector b. Throws std::invalid_argument for a non-unit b or
/// max_steps < 1.
template <typename Scalar>
LanczosResult<Scalar> lanczos(const LinearOperator<Scalar>& apply_w, const Vector<Scalar>& b,
                              const LanczosOptions& options);

/// Independent chi entries with the law of the Golub-Kahan factor of a
/// Gaussian sample covariance matrix started at f_1.
BidiagonalFactor golub_kahan_sample(Index n, Index m, BetaField beta, RngStream& rng);

/// Cholesky factor of a positive definite Jacobi matrix. Throws
/// NotPositiveDefinite carrying the failing pivot index.
BidiagonalFactor cholesky_jacobi(const JacobiMatrix& t);

JacobiMatrix jacobi_from_bidiagonal(const BidiagonalFactor& h);

/// f_1^T (H H^T)^{-1} f_1 through the backward Cramer recursion.
double inverse_first_entry(const BidiagonalFactor& h);

/// All suffix values s_k = f_1^T (L_k L_k^T)^{-1} f_1 with L_k = H[k:, k:],
/// k = 0..n-1, from one backward sweep.
std::vector<double> suffix_inverse_first_entries(const BidiagonalFactor& h);

}  // namespace krylov
