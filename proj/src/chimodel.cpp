#include "krylov/chimodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "krylov/numeric.hpp"
#include "krylov/solvers.hpp"
#include "krylov/stats.hpp"

namespace krylov {

ChiModelDraw draw_chi_model(Index n, Index m, BetaField beta, Index kmax, RngStream& rng) {
  if (n < 1 || n > m) throw std::invalid_argument("draw_chi_model: requires 1 <= n <= m");
  if (kmax < 0 || kmax >= n) {
    throw std::invalid_argument("draw_chi_model: requires 0 <= kmax < n (kmax=" + std::to_string(kmax) +
                                ", n=" + std::to_string(n) + ")");
  }
  const double b = beta.value();
  const double bm = b * static_cast<double>(m);

  ChiModelDraw draw;
  const auto len = static_cast<std::size_t>(kmax + 1);
  draw.cg_r2sq.reserve(len);
  draw.minres_r2sq.reserve(len);
  draw.cg_r2sq.push_back(1.0);
  draw.minres_r2sq.push_back(1.0);

  // The 1/sqrt(beta M) scaling of alpha_j and beta_j cancels in every ratio.
  double log_cg = 0.0;
  LogSumExpAccumulator minres_terms;
  minres_terms.add(0.0);
  for (Index j = 0; j < kmax; ++j) {
    const double alpha_sq = sample_chi_squared(b * static_cast<double>(m - j), rng);
    const double beta_sq = sample_chi_squared(b * static_cast<double>(n - j - 1), rng);
    const double log_ratio = std::log(beta_sq) - std::log(alpha_sq);
    log_cg += log_ratio;
    draw.cg_r2sq.push_back(std::exp(log_cg));
    minres_terms.add(-log_cg);
    draw.minres_r2sq.push_back(std::exp(-minres_terms.value()));
  }

  draw.sigma_inv = std::sqrt(bm) / sample_chi(b * static_cast<double>(m - n + 1), rng);
  const double sigma_inv_sq = draw.sigma_inv * draw.sigma_inv;
  draw.cg_ewsq.reserve(len);
  for (double r2 : draw.cg_r2sq) draw.cg_ewsq.push_back(sigma_inv_sq * r2);

  draw.cgne_relative_ewsq = draw.minres_r2sq;
  draw.delta_nm = sample_chi_squared(b * static_cast<double>(n), rng) / sample_chi_squared(bm, rng);
  return draw;
}

namespace {

struct FullTrace {
  std::vector<double> cg_r2sq;
  std::vector<double> cg_ewsq;
  std::vector<double> minres_r2sq;
};

template <typename Scalar>
FullTrace full_matrix_trace(const Matrix<Scalar>& x, Index kmax) {
  const Index n = x.rows();
  const Matrix<Scalar> w = x * x.adjoint();
  const Vector<Scalar> b = Vector<Scalar>::Unit(n, 0);
  Eigen::LLT<Matrix<Scalar>> chol(w);
  if (chol.info() != Eigen::Success) throw NotPositiveDefinite("cross_validate: sampled W is singular", 0);
  const Vector<Scalar> x_true = chol.solve(b);
  const LinearOperator<Scalar> op = [&w](const Vector<Scalar>& in, Vector<Scalar>& out) { out.noalias() = w * in; };

  const SolveTrace cg = cg_solve<Scalar>(op, b, kmax, 0.0, &x_true);
  const SolveTrace mr = minres_solve<Scalar>(op, b, kmax, 0.0);
  if (static_cast<Index>(cg.r2sq.size()) != kmax + 1 || static_cast<Index>(mr.r2sq.size()) != kmax + 1) {
    throw std::runtime_error("cross_validate: solver terminated before kmax");
  }
  return FullTrace{cg.r2sq, *cg.ewsq, mr.r2sq};
}

}  // namespace

CrossValidationReport cross_validate(Index n, Index m, BetaField beta, Index kmax, Index trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("cross_validate: trials must be >= 1");
  const EnsembleSpec spec{EnsembleKind::gaussian, n, m, beta};
  spec.validate();
  if (kmax < 0 || kmax >= n) throw std::invalid_argument("cross_validate: requires 0 <= kmax < n");

  const auto len = static_cast<std::size_t>(kmax + 1);
  const auto count = static_cast<std::size_t>(trials);
  // [statistic][k][trial]
  std::vector<std::vector<std::vector<double>>> chi(3, std::vector<std::vector<double>>(len, std::vector<double>(count)));
  auto full = chi;

  for (std::size_t t = 0; t < count; ++t) {
    RngStream chi_rng(seed, 2 * t);
    const ChiModelDraw d = draw_chi_model(n, m, beta, kmax, chi_rng);
    RngStream mat_rng(seed, 2 * t + 1);
    const DataMatrix x = sample_data_matrix(spec, mat_rng);
    const FullTrace f = x.visit([kmax](const auto& entries) { return full_matrix_trace(entries, kmax); });
    for (std::size_t k = 0; k < len; ++k) {
      chi[0][k][t] = d.cg_r2sq[k];
      chi[1][k][t] = d.minres_r2sq[k];
      chi[2][k][t] = d.cg_ewsq[k];
      full[0][k][t] = f.cg_r2sq[k];
      full[1][k][t] = f.minres_r2sq[k];
      full[2][k][t] = f.cg_ewsq[k];
    }
  }

  CrossValidationReport report{n, m, trials, {}};
  for (std::size_t k = 0; k < len; ++k) {
    KsAtIteration row;
    row.k = static_cast<Index>(k);
    // At k = 0 both residual norms are identically 1.
    row.cg_residual = two_sample_ks(chi[0][k], full[0][k]);
    row.minres_residual = two_sample_ks(chi[1][k], full[1][k]);
    row.cg_error = two_sample_ks(chi[2][k], full[2][k]);
    report.per_k.push_back(row);
  }
  return report;
}

}  // namespace krylov
