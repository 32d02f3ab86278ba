#include "krylov/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace krylov {

namespace {

void require_finite(const std::vector<double>& xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " has a non-finite entry");
  }
}

}  // namespace

JacobiMatrix::JacobiMatrix(std::vector<double> diag, std::vector<double> offdiag)
    : diag_(std::move(diag)), offdiag_(std::move(offdiag)) {
  if (diag_.empty()) {
    if (!offdiag_.empty()) throw std::invalid_argument("empty Jacobi matrix with off-diagonal entries");
    return;
  }
  if (offdiag_.size() + 1 != diag_.size()) {
    throw std::invalid_argument("Jacobi matrix of size " + std::to_string(diag_.size()) + " needs " +
                                std::to_string(diag_.size() - 1) + " off-diagonal entries, got " +
                                std::to_string(offdiag_.size()));
  }
  require_finite(diag_, "Jacobi diagonal");
  require_finite(offdiag_, "Jacobi off-diagonal");
  if (std::any_of(offdiag_.begin(), offdiag_.end(), [](double b) { return b < 0.0; })) {
    throw std::invalid_argument("Jacobi off-diagonal entries must be nonnegative");
  }
}

JacobiMatrix JacobiMatrix::identity(Index n) {
  if (n < 1) throw std::invalid_argument("identity needs n >= 1");
  return JacobiMatrix(std::vector<double>(static_cast<std::size_t>(n), 1.0),
                      std::vector<double>(static_cast<std::size_t>(n - 1), 0.0));
}

JacobiMatrix JacobiMatrix::leading(Index k) const {
  if (k < 1 || k > size()) throw std::out_of_range("leading block size out of range");
  return JacobiMatrix(std::vector<double>(diag_.begin(), diag_.begin() + k),
                      std::vector<double>(offdiag_.begin(), offdiag_.begin() + (k - 1)));
}

Matrix<double> JacobiMatrix::dense() const {
  const Index n = size();
  Matrix<double> t = Matrix<double>::Zero(n, n);
  for (Index i = 0; i < n; ++i) t(i, i) = diag_[i];
  for (Index i = 0; i + 1 < n; ++i) {
    t(i, i + 1) = offdiag_[i];
    t(i + 1, i) = offdiag_[i];
  }
  return t;
}

void JacobiMatrix::apply(const Vector<double>& x, Vector<double>& y) const {
  const Index n = size();
  if (x.size() != n) throw std::invalid_argument("Jacobi apply: dimension mismatch");
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    double acc = diag_[i] * x(i);
    if (i > 0) acc += offdiag_[i - 1] * x(i - 1);
    if (i + 1 < n) acc += offdiag_[i] * x(i + 1);
    y(i) = acc;
  }
}

BidiagonalFactor::BidiagonalFactor(std::vector<double> alpha, std::vector<double> beta)
    : alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (alpha_.empty()) throw std::invalid_argument("bidiagonal factor must have size >= 1");
  if (beta_.size() + 1 != alpha_.size()) {
    throw std::invalid_argument("bidiagonal factor of size " + std::to_string(alpha_.size()) + " needs " +
                                std::to_string(alpha_.size() - 1) + " subdiagonal entries, got " +
                                std::to_string(beta_.size()));
  }
  require_finite(alpha_, "bidiagonal alpha");
  require_finite(beta_, "bidiagonal beta");
  for (std::size_t j = 0; j < alpha_.size(); ++j) {
    if (!(alpha_[j] > 0.0)) {
      throw std::invalid_argument("bidiagonal alpha must be positive (alpha[" + std::to_string(j) + "] = " +
                                  std::to_string(alpha_[j]) + ")");
    }
  }
  if (std::any_of(beta_.begin(), beta_.end(), [](double b) { return b < 0.0; })) {
    throw std::invalid_argument("bidiagonal beta must be nonnegative");
  }
}

BidiagonalFactor BidiagonalFactor::identity(Index n) {
  if (n < 1) throw std::invalid_argument("identity needs n >= 1");
  return BidiagonalFactor(std::vector<double>(static_cast<std::size_t>(n), 1.0),
                          std::vector<double>(static_cast<std::size_t>(n - 1), 0.0));
}

BidiagonalFactor BidiagonalFactor::suffix(Index k) const {
  if (k < 0 || k >= size()) throw std::out_of_range("suffix offset out of range");
  return BidiagonalFactor(std::vector<double>(alpha_.begin() + k, alpha_.end()),
                          std::vector<double>(beta_.begin() + k, beta_.end()));
}

BidiagonalFactor BidiagonalFactor::leading(Index k) const {
  if (k < 1 || k > size()) throw std::out_of_range("leading block size out of range");
  return BidiagonalFactor(std::vector<double>(alpha_.begin(), alpha_.begin() + k),
                          std::vector<double>(beta_.begin(), beta_.begin() + (k - 1)));
}

Matrix<double> BidiagonalFactor::dense() const {
  const Index n = size();
  Matrix<double> h = Matrix<double>::Zero(n, n);
  for (Index i = 0; i < n; ++i) h(i, i) = alpha_[i];
  for (Index i = 0; i + 1 < n; ++i) h(i + 1, i) = beta_[i];
  return h;
}

template <typename Scalar>
LanczosResult<Scalar> lanczos(const LinearOperator<Scalar>& apply_w, const Vector<Scalar>& b,
                              const LanczosOptions& options) {
  if (options.max_steps < 1) throw std::invalid_argument("lanczos: max_steps must be >= 1");
  const Index n = b.size();
  if (n < 1) throw std::invalid_argument("lanczos: empty start vector");
  const double bnorm = b.norm();
  if (!(std::abs(bnorm - 1.0) <= 1e-10)) {
    throw std::invalid_argument("lanczos: start vector must have unit norm (got " + std::to_string(bnorm) + ")");
  }
  const Index steps_cap = std::min(options.max_steps, n);
  const bool store_all = options.reorthogonalize || options.keep_basis;

  Matrix<Scalar> basis;
  if (store_all) basis.resize(n, steps_cap);
  Vector<Scalar> q = b;
  Vector<Scalar> q_prev = Vector<Scalar>::Zero(n);
  Vector<Scalar> w(n);

  std::vector<double> diag;
  std::vector<double> offdiag;
  double prev_offdiag = 0.0;
  double norm_estimate = 0.0;

  LanczosResult<Scalar> result;
  for (Index k = 0; k < steps_cap; ++k) {
    if (store_all) basis.col(k) = q;
    apply_w(q, w);
    if (w.size() != n) throw std::invalid_argument("lanczos: operator changed the vector length");
    const double a = std::real(q.dot(w));
    w -= a * q;
    if (k > 0) w -= prev_offdiag * q_prev;
    if (options.reorthogonalize) {
      // Classical Gram-Schmidt, applied twice.
      for (int pass = 0; pass < 2; ++pass) {
        const auto active = basis.leftCols(k + 1);
        const Vector<Scalar> coeffs = active.adjoint() * w;
        w.noalias() -= active * coeffs;
      }
    }
    const double next_offdiag = w.norm();
    diag.push_back(a);
    norm_estimate = std::max(norm_estimate, std::abs(a) + prev_offdiag + next_offdiag);

    result.steps_completed = k + 1;
    result.final_offdiag = next_offdiag;
    if (next_offdiag <= options.breakdown_tol * norm_estimate) {
      result.terminated_early = true;
      break;
    }
    if (k + 1 == steps_cap) break;
    offdiag.push_back(next_offdiag);
    q_prev.swap(q);
    q = w / next_offdiag;
    prev_offdiag = next_offdiag;
  }

  result.jacobi = JacobiMatrix(std::move(diag), std::move(offdiag));
  if (options.keep_basis) result.basis = basis.leftCols(result.steps_completed);
  return result;
}

template LanczosResult<double> lanczos<double>(const LinearOperator<double>&, const Vector<double>&,
                                               const LanczosOptions&);
template LanczosResult<Complex> lanczos<Complex>(const LinearOperator<Complex>&, const Vector<Complex>&,
                                                 const LanczosOptions&);

BidiagonalFactor golub_kahan_sample(Index n, Index m, BetaField beta, RngStream& rng) {
  if (n < 1 || m < 1) throw std::invalid_argument("golub_kahan_sample: sizes must be positive");
  if (n > m) throw std::invalid_argument("golub_kahan_sample: requires n <= m");
  const double b = beta.value();
  const double scale = 1.0 / std::sqrt(b * static_cast<double>(m));
  std::vector<double> alpha(static_cast<std::size_t>(n));
  std::vector<double> sub(static_cast<std::size_t>(n - 1));
  for (Index j = 0; j < n; ++j) {
    alpha[j] = scale * sample_chi(b * static_cast<double>(m - j), rng);
    if (j + 1 < n) sub[j] = scale * sample_chi(b * static_cast<double>(n - j - 1), rng);
  }
  return BidiagonalFactor(std::move(alpha), std::move(sub));
}

BidiagonalFactor cholesky_jacobi(const JacobiMatrix& t) {
  const Index n = t.size();
  if (n < 1) throw std::invalid_argument("cholesky_jacobi: empty matrix");
  const auto& a = t.diag();
  const auto& b = t.offdiag();
  std::vector<double> alpha(static_cast<std::size_t>(n));
  std::vector<double> beta(static_cast<std::size_t>(n - 1));
  double pivot = a[0];
  for (Index j = 0; j < n; ++j) {
    if (!(pivot > 0.0)) throw NotPositiveDefinite("cholesky_jacobi", j);
    alpha[j] = std::sqrt(pivot);
    if (j + 1 < n) {
      beta[j] = b[j] / alpha[j];
      pivot = a[j + 1] - beta[j] * beta[j];
    }
  }
  return BidiagonalFactor(std::move(alpha), std::move(beta));
}

JacobiMatrix jacobi_from_bidiagonal(const BidiagonalFactor& h) {
  const auto& alpha = h.alpha();
  const auto& beta = h.beta();
  const std::size_t n = alpha.size();
  std::vector<double> diag(n);
  std::vector<double> off(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    diag[j] = alpha[j] * alpha[j];
    if (j > 0) diag[j] += beta[j - 1] * beta[j - 1];
    if (j + 1 < n) off[j] = alpha[j] * beta[j];
  }
  return JacobiMatrix(std::move(diag), std::move(off));
}

std::vector<double> suffix_inverse_first_entries(const BidiagonalFactor& h) {
  const auto& alpha = h.alpha();
  const auto& beta = h.beta();
  const std::size_t n = alpha.size();
  std::vector<double> s(n);
  s[n - 1] = 1.0 / (alpha[n - 1] * alpha[n - 1]);
  for (std::size_t i = n - 1; i-- > 0;) {
    s[i] = (1.0 + beta[i] * beta[i] * s[i + 1]) / (alpha[i] * alpha[i]);
  }
  return s;
}

double inverse_first_entry(const BidiagonalFactor& h) { return suffix_inverse_first_entries(h).front(); }

}  // namespace krylov
