#include "krylov/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "krylov/numeric.hpp"

namespace krylov {

template <typename Scalar>
SolveTrace cg_solve(const LinearOperator<Scalar>& apply_w, const Vector<Scalar>& b, Index kmax, double tol,
                    const Vector<Scalar>* x_true, Vector<Scalar>* x_out, const IterationObserver& observer) {
  if (kmax < 0) throw std::invalid_argument("cg_solve: kmax must be >= 0");
  const Index n = b.size();
  if (x_true && x_true->size() != n) throw std::invalid_argument("cg_solve: x_true has the wrong length");

  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  Vector<Scalar> r = b;
  Vector<Scalar> p = r;
  Vector<Scalar> wp(n);
  double rr = r.squaredNorm();

  SolveTrace trace;
  trace.r2sq.push_back(rr);

  // W e_k = W x_true - W x_k, with W x_k updated alongside x_k.
  Vector<Scalar> w_true;
  Vector<Scalar> wx;
  if (x_true) {
    apply_w(*x_true, w_true);
    wx = Vector<Scalar>::Zero(n);
    trace.ewsq = std::vector<double>{std::real(x_true->dot(w_true))};
  }

  if (std::sqrt(rr) < tol) {
    trace.converged_at = 0;
  } else {
    for (Index k = 1; k <= kmax && rr > 0.0; ++k) {
      apply_w(p, wp);
      const double curvature = std::real(p.dot(wp));
      if (!(curvature > 0.0)) throw NotPositiveDefinite("cg_solve: p^* W p <= 0", k - 1);
      const double step = rr / curvature;
      x += step * p;
      r -= step * wp;
      const double rr_next = r.squaredNorm();
      trace.r2sq.push_back(rr_next);
      trace.iterations = k;
      if (x_true) {
        wx += step * wp;
        const Vector<Scalar> e = *x_true - x;
        trace.ewsq->push_back(std::real(e.dot(w_true - wx)));
      }
      if (std::sqrt(rr_next) < tol) {
        trace.converged_at = k;
        break;
      }
      if (observer && !observer(k, trace)) break;
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
  }
  if (x_out) *x_out = std::move(x);
  return trace;
}

template <typename Scalar>
SolveTrace minres_solve(const LinearOperator<Scalar>& apply_w, const Vector<Scalar>& b, Index kmax, double tol,
                        Vector<Scalar>* x_out, const IterationObserver& observer) {
  if (kmax < 0) throw std::invalid_argument("minres_solve: kmax must be >= 0");
  constexpr double breakdown_tol = 1e-12;
  const Index n = b.size();
  const double beta1 = b.norm();

  SolveTrace trace;
  trace.r2sq.push_back(beta1 * beta1);
  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  if (beta1 < tol || beta1 == 0.0) {
    trace.converged_at = 0;
    if (x_out) *x_out = std::move(x);
    return trace;
  }

  Vector<Scalar> v = b / beta1;
  Vector<Scalar> v_prev = Vector<Scalar>::Zero(n);
  Vector<Scalar> w(n);
  Vector<Scalar> d_prev = Vector<Scalar>::Zero(n);
  Vector<Scalar> d_prev2 = Vector<Scalar>::Zero(n);
  double offdiag_prev = 0.0;
  double norm_estimate = 0.0;
  // Rotations G_{j-1} and G_{j-2}, both starting as the identity. They are
  // real because the Lanczos matrix is real even for complex vectors.
  double c1 = 1.0, s1 = 0.0, c2 = 1.0, s2 = 0.0;
  double phibar = beta1;

  for (Index j = 0; j < kmax; ++j) {
    apply_w(v, w);
    // Modified Gram-Schmidt order: remove the old direction before projecting.
    if (j > 0) w -= offdiag_prev * v_prev;
    const double a = std::real(v.dot(w));
    w -= a * v;
    const double offdiag = w.norm();
    norm_estimate = std::max(norm_estimate, std::abs(a) + offdiag_prev + offdiag);

    // New column of the extended tridiagonal matrix: (offdiag_prev, a, offdiag)
    // in rows j-1, j, j+1. Bring it up to date with the earlier rotations.
    const double eps = s2 * offdiag_prev;
    const double delta = c2 * offdiag_prev;
    const double rho2 = c1 * delta + s1 * a;
    const double gbar = -s1 * delta + c1 * a;
    const double gamma = std::hypot(gbar, offdiag);
    if (!(gamma > 0.0)) throw std::runtime_error("minres_solve: singular projected system at step " + std::to_string(j));
    const double c = gbar / gamma;
    const double s = offdiag / gamma;
    const double phi = c * phibar;
    phibar = -s * phibar;

    Vector<Scalar> d = (v - rho2 * d_prev - eps * d_prev2) / gamma;
    x += phi * d;

    trace.r2sq.push_back(phibar * phibar);
    trace.iterations = j + 1;
    if (std::abs(phibar) < tol || offdiag <= breakdown_tol * norm_estimate) {
      trace.converged_at = j + 1;
      break;
    }
    if (observer && !observer(j + 1, trace)) break;

    d_prev2.swap(d_prev);
    d_prev = std::move(d);
    c2 = c1;
    s2 = s1;
    c1 = c;
    s1 = s;
    v_prev.swap(v);
    v = w / offdiag;
    offdiag_prev = offdiag;
  }
  if (x_out) *x_out = std::move(x);
  return trace;
}

template <typename Scalar>
LinearOperator<Scalar> gram_operator(const Matrix<Scalar>& x) {
  const Matrix<Scalar>* data = &x;
  return [data](const Vector<Scalar>& in, Vector<Scalar>& out) {
    const Vector<Scalar> inner = data->adjoint() * in;
    out.noalias() = (*data) * inner;
  };
}

template <typename Scalar>
SolveTrace cg_normal_equations(const Matrix<Scalar>& x, const Vector<Scalar>& b_m, Index kmax, double tol,
                               const IterationObserver& observer) {
  if (b_m.size() != x.cols()) throw std::invalid_argument("cg_normal_equations: b has the wrong length");
  const Vector<Scalar> rhs = x * b_m;
  const Matrix<Scalar> w = x * x.adjoint();
  Eigen::LLT<Matrix<Scalar>> chol(w);
  if (chol.info() != Eigen::Success) throw NotPositiveDefinite("cg_normal_equations: dense Cholesky failed", 0);
  const Vector<Scalar> x_true = chol.solve(rhs);
  return cg_solve<Scalar>(gram_operator(x), rhs, kmax, tol, &x_true, nullptr, observer);
}

template <typename Scalar>
BidiagonalFactor lanczos_factor(const LinearOperator<Scalar>& apply_w, const Vector<Scalar>& b, Index max_steps) {
  LanczosOptions options;
  options.max_steps = max_steps;
  options.reorthogonalize = true;
  return cholesky_jacobi(lanczos<Scalar>(apply_w, b, options).jacobi);
}

std::vector<double> predicted_cg_residuals(const BidiagonalFactor& h, Index kmax) {
  if (kmax < 0) throw std::invalid_argument("predicted_cg_residuals: kmax must be >= 0");
  const Index n = h.size();
  const Index last = std::min(kmax, n);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(last + 1));
  out.push_back(1.0);
  double log_norm = 0.0;
  bool vanished = false;
  for (Index k = 1; k <= last; ++k) {
    if (k == n) {
      vanished = true;
    } else {
      const double beta = h.beta()[k - 1];
      if (beta == 0.0) vanished = true;
      else log_norm += std::log(beta) - std::log(h.alpha()[k - 1]);
    }
    out.push_back(vanished ? 0.0 : std::exp(log_norm));
  }
  return out;
}

std::vector<double> predicted_cg_errors(const BidiagonalFactor& h, Index kmax) {
  if (kmax >= h.size()) {
    throw std::out_of_range("predicted_cg_errors: k = " + std::to_string(kmax) + " needs a factor larger than " +
                            std::to_string(h.size()));
  }
  std::vector<double> out = predicted_cg_residuals(h, kmax);
  const std::vector<double> s = suffix_inverse_first_entries(h);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= std::sqrt(s[k]);
  return out;
}

MinresPrediction predicted_minres_residuals(const BidiagonalFactor& h, Index kmax) {
  if (kmax < 0) throw std::invalid_argument("predicted_minres_residuals: kmax must be >= 0");
  const Index n = h.size();
  MinresPrediction out;
  LogSumExpAccumulator total;
  double log_term = 0.0;
  total.add(log_term);
  out.norms.push_back(1.0);
  for (Index k = 1; k <= kmax; ++k) {
    if (k == n || h.beta()[k - 1] == 0.0) {
      out.norms.push_back(0.0);
      out.exact_convergence = true;
      break;
    }
    log_term += 2.0 * (std::log(h.alpha()[k - 1]) - std::log(h.beta()[k - 1]));
    total.add(log_term);
    out.norms.push_back(std::exp(-0.5 * total.value()));
  }
  return out;
}

std::vector<double> predicted_cgne_errors(const SpectralMeasure& nu, Index kmax) {
  if (kmax < 0) throw std::invalid_argument("predicted_cgne_errors: kmax must be >= 0");
  const double mass = nu.total_mass();
  if (!(mass > 0.0)) throw std::invalid_argument("predicted_cgne_errors: measure has zero mass");
  const JacobiMatrix t = jacobi_from_measure(nu, std::min<Index>(kmax + 1, nu.size()));
  MinresPrediction relative = predicted_minres_residuals(cholesky_jacobi(t), kmax);
  for (double& v : relative.norms) v *= std::sqrt(mass);
  return relative.norms;
}

template <typename Scalar>
SpectralMeasure normal_equations_measure(const Matrix<Scalar>& x, const Vector<Scalar>& b_m) {
  if (b_m.size() != x.cols()) throw std::invalid_argument("normal_equations_measure: b has the wrong length");
  const Matrix<Scalar> w = x * x.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(w);
  if (solver.info() != Eigen::Success) throw std::runtime_error("normal_equations_measure: eigensolver failed");
  const Vector<Scalar> proj = solver.eigenvectors().adjoint() * (x * b_m);
  std::vector<double> nodes(static_cast<std::size_t>(w.rows()));
  std::vector<double> weights(nodes.size());
  for (Index j = 0; j < w.rows(); ++j) {
    const double lambda = solver.eigenvalues()(j);
    if (!(lambda > 0.0)) throw NotPositiveDefinite("normal_equations_measure: singular W", j);
    nodes[j] = lambda;
    weights[j] = std::norm(proj(j)) / lambda;
  }
  return SpectralMeasure(std::move(nodes), std::move(weights));
}

#define KRYLOV_INSTANTIATE_SOLVERS(Scalar)                                                                     \
  template SolveTrace cg_solve<Scalar>(const LinearOperator<Scalar>&, const Vector<Scalar>&, Index, double,    \
                                       const Vector<Scalar>*, Vector<Scalar>*, const IterationObserver&);      \
  template SolveTrace minres_solve<Scalar>(const LinearOperator<Scalar>&, const Vector<Scalar>&, Index, double, \
                                           Vector<Scalar>*, const IterationObserver&);                         \
  template LinearOperator<Scalar> gram_operator<Scalar>(const Matrix<Scalar>&);                                \
  template SolveTrace cg_normal_equations<Scalar>(const Matrix<Scalar>&, const Vector<Scalar>&, Index, double,  \
                                                  const IterationObserver&);                                   \
  template BidiagonalFactor lanczos_factor<Scalar>(const LinearOperator<Scalar>&, const Vector<Scalar>&, Index); \
  template SpectralMeasure normal_equations_measure<Scalar>(const Matrix<Scalar>&, const Vector<Scalar>&);

KRYLOV_INSTANTIATE_SOLVERS(double)
KRYLOV_INSTANTIATE_SOLVERS(Complex)

#undef KRYLOV_INSTANTIATE_SOLVERS

}  // namespace krylov
