#pragma once

#include <cstdint>
#include <vector>

#include "krylov/ensembles.hpp"
#include "krylov/types.hpp"

namespace krylov {

/// Solver statistics for k = 0..kmax drawn from independent chi variables,
/// with the marginal law of each entry equal to that of the Gaussian
/// ensemble with b = f_1.
struct ChiModelDraw {
  std::vector<double> cg_r2sq;
  std::vector<double> cg_ewsq;
  std::vector<double> minres_r2sq;
  /// ||e_k||_W^2 / ||e_0||_W^2 for CG on the normal equations.
  std::vector<double> cgne_relative_ewsq;
  /// Sigma^{-1} = sqrt(beta M) / chi_{beta (M - N + 1)}; cg_ewsq = sigma_inv^2 cg_r2sq.
  double sigma_inv = 0.0;
  /// Delta = chi^2_{beta N} / chi^2_{beta M}, the mass of the normal-equations measure.
  double delta_nm = 0.0;
};

/// Requires kmax < n <= m.
ChiModelDraw draw_chi_model(Index n, Index m, BetaField beta, Index kmax, RngStream& rng);

struct KsAtIteration {
  Index k = 0;
  double cg_residual = 0.0;
  double minres_residual = 0.0;
  double cg_error = 0.0;
};

struct CrossValidationReport {
  Index n = 0;
  Index m = 0;
  Index trials = 0;
  std::vector<KsAtIteration> per_k;
};

/// Two-sample KS between chi-model draws and full Gaussian solver traces with
/// b = f_1, for each k = 0..kmax. Trial t uses streams (seed, 2t) for the
/// chi model and (seed, 2t + 1) for the matrix.
CrossValidationReport cross_validate(Index n, Index m, BetaField beta, Index kmax, Index trials, std::uint64_t seed);

}  // namespace krylov
