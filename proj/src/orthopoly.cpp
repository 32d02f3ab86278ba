#include "krylov/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "krylov/numeric.hpp"

namespace krylov {

SpectralMeasure::SpectralMeasure(std::vector<double> nodes, std::vector<double> weights) {
  if (nodes.size() != weights.size()) throw std::invalid_argument("spectral measure: nodes/weights size mismatch");
  if (nodes.empty()) throw std::invalid_argument("spectral measure: no atoms");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!std::isfinite(nodes[i]) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("spectral measure: non-finite atom");
    }
    if (weights[i] < 0.0) throw std::invalid_argument("spectral measure: negative weight");
  }
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return nodes[i] < nodes[j]; });

  double scale = 0.0;
  for (double x : nodes) scale = std::max(scale, std::abs(x));
  const double merge_tol = 1e-12 * std::max(scale, 1.0);

  CompensatedSum mass;
  for (std::size_t i : order) {
    if (!nodes_.empty() && nodes[i] - nodes_.back() <= merge_tol) {
      weights_.back() += weights[i];
    } else {
      nodes_.push_back(nodes[i]);
      weights_.push_back(weights[i]);
    }
    mass.add(weights[i]);
  }
  total_mass_ = mass.value();
}

double SpectralMeasure::moment(int k) const {
  if (k < 0) throw std::invalid_argument("moment order must be nonnegative");
  CompensatedSum acc;
  for (std::size_t j = 0; j < nodes_.size(); ++j) acc.add(weights_[j] * std::pow(nodes_[j], k));
  return acc.value();
}

SpectralMeasure SpectralMeasure::normalized() const {
  if (!(total_mass_ > 0.0)) throw std::invalid_argument("cannot normalize a measure of zero mass");
  std::vector<double> w(weights_);
  for (double& x : w) x /= total_mass_;
  return SpectralMeasure(nodes_, std::move(w));
}

MomentSequence moments_from_jacobi(const JacobiMatrix& t, Index kmax) {
  if (kmax < 0) throw std::invalid_argument("moments_from_jacobi: kmax must be >= 0");
  if (t.size() < 1) throw std::invalid_argument("moments_from_jacobi: empty matrix");
  MomentSequence m;
  m.values.reserve(static_cast<std::size_t>(kmax + 1));
  Vector<double> v = Vector<double>::Unit(t.size(), 0);
  Vector<double> next;
  m.values.push_back(1.0);
  for (Index k = 1; k <= kmax; ++k) {
    t.apply(v, next);
    v.swap(next);
    m.values.push_back(v(0));
  }
  return m;
}

MomentSequence moments_of(const SpectralMeasure& mu, Index kmax) {
  if (kmax < 0) throw std::invalid_argument("moments_of: kmax must be >= 0");
  MomentSequence m;
  for (Index k = 0; k <= kmax; ++k) m.values.push_back(mu.moment(static_cast<int>(k)));
  return m;
}

JacobiMatrix jacobi_from_moments(const MomentSequence& m, std::optional<Index> size, double support_tol) {
  const Index available = m.size() / 2;
  if (available < 1) throw std::invalid_argument("jacobi_from_moments: need at least m_0 and m_1");
  if (size && (*size < 1 || *size > available)) {
    throw std::invalid_argument("jacobi_from_moments: size " + std::to_string(*size) + " needs moments up to m_" +
                                std::to_string(2 * *size - 1));
  }
  if (!(m[0] > 0.0)) throw std::invalid_argument("jacobi_from_moments: m_0 must be positive");
  const Index target = size.value_or(available);

  // Rows 0..target-1 of the upper Cholesky factor of the (target+1)-square
  // Hankel matrix; the last diagonal entry (which would need m_{2 target})
  // is never required.
  // Extended precision for the elimination: Hankel matrices lose digits fast.
  using Wide = long double;
  Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic> r =
      Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>::Zero(target, target + 1);
  Index recovered = target;
  for (Index i = 0; i < target; ++i) {
    Wide pivot = m[2 * i];
    for (Index k = 0; k < i; ++k) pivot -= r(k, i) * r(k, i);
    const Wide floor = support_tol * std::abs(m[2 * i]);
    if (pivot <= floor) {
      if (pivot < -floor) {
        throw std::invalid_argument("jacobi_from_moments: Hankel matrix not positive (not a moment sequence) at order " +
                                    std::to_string(i));
      }
      recovered = i;
      break;
    }
    r(i, i) = std::sqrt(pivot);
    for (Index j = i + 1; j <= target; ++j) {
      Wide acc = m[i + j];
      for (Index k = 0; k < i; ++k) acc -= r(k, i) * r(k, j);
      r(i, j) = acc / r(i, i);
    }
  }
  if (recovered < target && size) {
    throw InsufficientSupport("jacobi_from_moments: insufficient support, only " + std::to_string(recovered) +
                                  " atoms resolved",
                              recovered);
  }

  std::vector<double> diag(static_cast<std::size_t>(recovered));
  std::vector<double> off(static_cast<std::size_t>(recovered - 1));
  for (Index j = 0; j < recovered; ++j) {
    diag[j] = static_cast<double>(r(j, j + 1) / r(j, j) - (j > 0 ? r(j - 1, j) / r(j - 1, j - 1) : Wide{0}));
    if (j + 1 < recovered) off[j] = static_cast<double>(r(j + 1, j + 1) / r(j, j));
  }
  return JacobiMatrix(std::move(diag), std::move(off));
}

std::vector<double> hankel_determinants(const MomentSequence& m, Index nmax) {
  if (nmax < 0) throw std::invalid_argument("hankel_determinants: nmax must be >= 0");
  if (m.size() < 2 * nmax + 1) {
    throw std::invalid_argument("hankel_determinants: D_" + std::to_string(nmax) + " needs moments up to m_" +
                                std::to_string(2 * nmax));
  }
  std::vector<double> d;
  for (Index n = 0; n <= nmax; ++n) {
    Matrix<double> h(n + 1, n + 1);
    for (Index i = 0; i <= n; ++i) {
      for (Index j = 0; j <= n; ++j) h(i, j) = m[i + j];
    }
    d.push_back(h.fullPivLu().determinant());
  }
  return d;
}

std::vector<double> monic_pi_values(const JacobiMatrix& t, Index kmax, double x) {
  if (kmax < 0 || kmax > t.size()) throw std::out_of_range("monic_pi: degree exceeds the matrix size");
  const auto& a = t.diag();
  const auto& b = t.offdiag();
  std::vector<double> pi(static_cast<std::size_t>(kmax + 1));
  pi[0] = 1.0;
  double prev = 0.0;
  for (Index k = 0; k < kmax; ++k) {
    const double coupling = k > 0 ? b[k - 1] * b[k - 1] : 0.0;
    pi[k + 1] = (x - a[k]) * pi[k] - coupling * prev;
    prev = pi[k];
  }
  return pi;
}

double monic_pi_at(const JacobiMatrix& t, Index k, double x) { return monic_pi_values(t, k, x).back(); }

PolynomialValues orthonormal_values(const JacobiMatrix& t, Index kmax, double x) {
  if (kmax < 0 || kmax >= t.size()) throw std::out_of_range("orthonormal_values: degree must be below the size");
  const auto& a = t.diag();
  const auto& b = t.offdiag();
  PolynomialValues out;
  out.value.assign(static_cast<std::size_t>(kmax + 1), 0.0);
  out.derivative.assign(static_cast<std::size_t>(kmax + 1), 0.0);
  out.value[0] = 1.0;
  for (Index k = 0; k < kmax; ++k) {
    if (!(b[k] > 0.0)) throw std::invalid_argument("orthonormal_values: zero off-diagonal at " + std::to_string(k));
    const double p_prev = k > 0 ? out.value[k - 1] : 0.0;
    const double dp_prev = k > 0 ? out.derivative[k - 1] : 0.0;
    const double b_prev = k > 0 ? b[k - 1] : 0.0;
    out.value[k + 1] = ((x - a[k]) * out.value[k] - b_prev * p_prev) / b[k];
    out.derivative[k + 1] = (out.value[k] + (x - a[k]) * out.derivative[k] - b_prev * dp_prev) / b[k];
  }
  return out;
}

std::vector<double> stieltjes_c_at_zero(const JacobiMatrix& t, const BidiagonalFactor& h, Index kmax) {
  if (kmax < 0 || kmax > t.size()) throw std::out_of_range("stieltjes_c_at_zero: degree exceeds the matrix size");
  if (h.size() != t.size()) throw std::invalid_argument("stieltjes_c_at_zero: factor size mismatch");
  const auto& a = t.diag();
  const auto& b = t.offdiag();
  std::vector<double> c(static_cast<std::size_t>(kmax + 1));
  c[0] = inverse_first_entry(h);
  double prev = -1.0;
  for (Index k = 0; k < kmax; ++k) {
    const double coupling = k > 0 ? b[k - 1] * b[k - 1] : 1.0;
    c[k + 1] = -a[k] * c[k] - coupling * prev;
    prev = c[k];
  }
  return c;
}

std::vector<double> stieltjes_c_at_zero(const JacobiMatrix& t, Index kmax) {
  return stieltjes_c_at_zero(t, cholesky_jacobi(t), kmax);
}

std::vector<double> complementary_pi_values_at_zero(const JacobiMatrix& t, Index kmax) {
  if (kmax < 0 || kmax > t.size()) throw std::out_of_range("complementary_pi: degree exceeds the matrix size");
  const auto& a = t.diag();
  const auto& b = t.offdiag();
  std::vector<double> pt(static_cast<std::size_t>(kmax + 1));
  pt[0] = 0.0;
  double prev = 1.0;
  for (Index k = 0; k < kmax; ++k) {
    const double coupling = k > 0 ? b[k - 1] * b[k - 1] : 1.0;
    pt[k + 1] = -a[k] * pt[k] - coupling * prev;
    prev = pt[k];
  }
  return pt;
}

double complementary_pi_at_zero(const JacobiMatrix& t, Index k) {
  return complementary_pi_values_at_zero(t, k).back();
}

SpectralMeasure spectral_measure(const JacobiMatrix& t) {
  const Index n = t.size();
  if (n < 1) throw std::invalid_argument("spectral_measure: empty matrix");
  Vector<double> diag = Eigen::Map<const Vector<double>>(t.diag().data(), n);
  Vector<double> sub(std::max<Index>(n - 1, 0));
  for (Index i = 0; i + 1 < n; ++i) sub(i) = t.offdiag()[i];
  Eigen::SelfAdjointEigenSolver<Matrix<double>> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectral_measure: eigensolver did not converge");
  std::vector<double> nodes(static_cast<std::size_t>(n));
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    nodes[j] = solver.eigenvalues()(j);
    const double u = solver.eigenvectors()(0, j);
    weights[j] = u * u;
  }
  return SpectralMeasure(std::move(nodes), std::move(weights));
}

namespace {

template <typename Scalar>
SpectralMeasure dense_spectral_measure(const Matrix<Scalar>& w, const Vector<Scalar>& b) {
  if (w.rows() != w.cols() || w.rows() != b.size()) throw std::invalid_argument("spectral_measure_of: size mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(w);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectral_measure_of: eigensolver did not converge");
  const Vector<Scalar> proj = solver.eigenvectors().adjoint() * b;
  std::vector<double> nodes(static_cast<std::size_t>(w.rows()));
  std::vector<double> weights(nodes.size());
  for (Index j = 0; j < w.rows(); ++j) {
    nodes[j] = solver.eigenvalues()(j);
    weights[j] = std::norm(proj(j));
  }
  return SpectralMeasure(std::move(nodes), std::move(weights));
}

}  // namespace

SpectralMeasure spectral_measure_of(const Matrix<double>& w, const Vector<double>& b) {
  return dense_spectral_measure(w, b);
}

SpectralMeasure spectral_measure_of(const Matrix<Complex>& w, const Vector<Complex>& b) {
  return dense_spectral_measure(w, b);
}

JacobiMatrix jacobi_from_measure(const SpectralMeasure& mu, std::optional<Index> max_size) {
  const SpectralMeasure unit = mu.normalized();
  const Index n = unit.size();
  Vector<double> nodes = Eigen::Map<const Vector<double>>(unit.nodes().data(), n);
  Vector<double> start(n);
  for (Index j = 0; j < n; ++j) start(j) = std::sqrt(unit.weights()[j]);
  start.normalize();
  LinearOperator<double> op = [&nodes](const Vector<double>& x, Vector<double>& y) {
    y = nodes.cwiseProduct(x);
  };
  LanczosOptions options;
  options.max_steps = max_size.value_or(n);
  return lanczos<double>(op, start, options).jacobi;
}

}  // namespace krylov
