#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "krylov/ensembles.hpp"
#include "krylov/orthopoly.hpp"
#include "krylov/tridiag.hpp"
#include "krylov/types.hpp"

namespace krylov {

/// Per-iteration record of one solver run; index k is iteration k.
struct SolveTrace {
  std::vector<double> r2sq;
  std::optional<std::vector<double>> ewsq;
  Index iterations = 0;
  std::optional<Index> converged_at;
};

/// Called after each recorded iteration k >= 1; returning false ends the run.
using IterationObserver = std::function<bool(Index k, const SolveTrace& trace)>;

/// Conjugate gradients from x_0 = 0.
///
/// Runs until ||r_k|| < tol (strict), k = kmax, or the residual vanishes
/// exactly. With x_true, the W-norm error is recorded as e_k^* W e_k.
/// Throws NotPositiveDefinite when p^* W p <= 0. The final iterate is
/// written to x_out when given.
template <typename Scalar>
SolveTrace cg_solve(const LinearOperator<Scalar>& apply_w, const Vector<Scalar>& b, Index kmax, double tol,
                    const Vector<Scalar>* x_true = nullptr, Vector<Scalar>* x_out = nullptr,
                    const IterationObserver& observer = {});

/// MINRES built on the Lanczos recurrence with Givens QR of the extended
/// tridiagonal matrix. Residual norms are the least-squares residuals of that
/// small problem; a Lanczos breakdown ends the run as exact convergence.
template <typename Scalar>
SolveTrace minres_solve(const LinearOperator<Scalar>& apply_w, const Vector<Scalar>& b, Index kmax, double tol,
                        Vector<Scalar>* x_out = nullptr, const IterationObserver& observer = {});

/// W = X X^* applied without forming W.
template <typename Scalar>
LinearOperator<Scalar> gram_operator(const Matrix<Scalar>& x);

/// CG on W x = X b_m with W = X X^*; the W-norm error is taken against a
/// dense Cholesky solve.
template <typename Scalar>
SolveTrace cg_normal_equations(const Matrix<Scalar>& x, const Vector<Scalar>& b_m, Index kmax, double tol,
                               const IterationObserver& observer = {});

/// Lanczos (reorthogonalized) followed by Jacobi Cholesky: the factor H with
/// T(W, b) = H H^T. b must be a unit vector.
template <typename Scalar>
BidiagonalFactor lanczos_factor(const LinearOperator<Scalar>& apply_w, const Vector<Scalar>& b, Index max_steps);

/// ||r_k|| for k = 0..min(kmax, n) as a running product of beta_j / alpha_j;
/// r_n = 0.
std::vector<double> predicted_cg_residuals(const BidiagonalFactor& h, Index kmax);

/// ||e_k||_W for k = 0..kmax. Throws std::out_of_range when kmax >= n.
std::vector<double> predicted_cg_errors(const BidiagonalFactor& h, Index kmax);

struct MinresPrediction {
  std::vector<double> norms;
  /// Set when a vanishing beta (or the end of the factor) forces r = 0
  /// before kmax; norms then ends with that zero.
  bool exact_convergence = false;
};

/// ||r_k|| = (sum_{j<=k} prod_{l<j} alpha_l^2 / beta_l^2)^{-1/2}, in the log
/// domain.
MinresPrediction predicted_minres_residuals(const BidiagonalFactor& h, Index kmax);

/// ||e_k||_W for CG on the normal equations, from the measure nu with
/// weights |u_j^* X b|^2 / lambda_j. Returns k = 0..kmax, truncated like
/// predicted_minres_residuals.
std::vector<double> predicted_cgne_errors(const SpectralMeasure& nu, Index kmax);

/// The measure nu of the normal equations for (X, b_m).
template <typename Scalar>
SpectralMeasure normal_equations_measure(const Matrix<Scalar>& x, const Vector<Scalar>& b_m);

}  // namespace krylov
