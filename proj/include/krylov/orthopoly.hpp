#pragma once

#include <optional>
#include <vector>

#include "krylov/tridiag.hpp"
#include "krylov/types.hpp"

namespace krylov {

/// Finite atomic measure. Construction canonicalizes: nodes are sorted and
/// atoms closer than 1e-12 (relative to the largest |node|) are merged.
class SpectralMeasure {
 public:
  SpectralMeasure(std::vector<double> nodes, std::vector<double> weights);

  Index size() const noexcept { return static_cast<Index>(nodes_.size()); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double total_mass() const noexcept { return total_mass_; }

  double moment(int k) const;
  /// Same nodes, weights divided by the total mass.
  SpectralMeasure normalized() const;

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  double total_mass_ = 0.0;
};

struct MomentSequence {
  std::vector<double> values;

  Index size() const noexcept { return static_cast<Index>(values.size()); }
  double operator[](Index k) const { return values.at(static_cast<std::size_t>(k)); }
};

/// m_k = f_1^T T^k f_1 for k = 0..kmax.
MomentSequence moments_from_jacobi(const JacobiMatrix& t, Index kmax);
MomentSequence moments_of(const SpectralMeasure& mu, Index kmax);

/// Recurrence coefficients from moments by Cholesky of the Hankel matrix.
///
/// An n x n result consumes m_0..m_{2n-1}. Without `size`, the largest
/// recoverable matrix is returned, stopping early when a Hankel pivot falls
/// below `support_tol` times the matching even moment (the measure has fewer
/// atoms). With `size`, such an early stop raises InsufficientSupport.
/// A clearly negative pivot or m_0 <= 0 raises std::invalid_argument.
JacobiMatrix jacobi_from_moments(const MomentSequence& m, std::optional<Index> size = std::nullopt,
                                 double support_tol = 1e-12);

/// D_n = det(m_{i+j})_{i,j=0..n} for n = 0..nmax; needs m_0..m_{2 nmax}.
std::vector<double> hankel_determinants(const MomentSequence& m, Index nmax);

/// Monic orthogonal polynomials pi_0..pi_kmax at x, kmax <= n.
std::vector<double> monic_pi_values(const JacobiMatrix& t, Index kmax, double x);
double monic_pi_at(const JacobiMatrix& t, Index k, double x);

/// Orthonormal polynomials p_0..p_kmax at x and their derivatives, from the
/// recurrence and its derivative. kmax <= n-1; the off-diagonals used must be
/// positive.
struct PolynomialValues {
  std::vector<double> value;
  std::vector<double> derivative;
};
PolynomialValues orthonormal_values(const JacobiMatrix& t, Index kmax, double x);

/// c_0(0)..c_kmax(0) for c_k(z) = integral of pi_k(lambda) / (lambda - z),
/// seeded with c_0(0) = f_1^T T^{-1} f_1 taken from the factor h of t.
std::vector<double> stieltjes_c_at_zero(const JacobiMatrix& t, const BidiagonalFactor& h, Index kmax);
std::vector<double> stieltjes_c_at_zero(const JacobiMatrix& t, Index kmax);

/// Complementary polynomials at 0 from the transfer matrices seeded with
/// (pi~_0, pi~_{-1}) = (0, 1) and b_{-1} = 1, so pi~_1 = -1. Only magnitudes
/// and the ratio to pi_k(0) carry meaning.
std::vector<double> complementary_pi_values_at_zero(const JacobiMatrix& t, Index kmax);
double complementary_pi_at_zero(const JacobiMatrix& t, Index k);

/// Eigenvalues of t with squared first eigenvector components as weights.
SpectralMeasure spectral_measure(const JacobiMatrix& t);

/// Spectral measure of a dense self-adjoint w and vector b (weights |u_j^* b|^2).
SpectralMeasure spectral_measure_of(const Matrix<double>& w, const Vector<double>& b);
SpectralMeasure spectral_measure_of(const Matrix<Complex>& w, const Vector<Complex>& b);

/// Jacobi matrix of the normalized measure, via reorthogonalized Lanczos on
/// the diagonal operator of its nodes.
JacobiMatrix jacobi_from_measure(const SpectralMeasure& mu, std::optional<Index> max_size = std::nullopt);

}  // namespace krylov
