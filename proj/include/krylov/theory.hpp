#pragma once

#include <complex>
#include <functional>
#include <string_view>
#include <vector>

#include "krylov/ensembles.hpp"
#include "krylov/types.hpp"

namespace krylov {

/// Marchenko-Pastur law for aspect ratio d in (0, 1].
struct MPLaw {
  double d = 0.5;
  double gamma_minus = 0.0;
  double gamma_plus = 0.0;
};

/// Edges (1 -+ sqrt d)^2. Throws std::domain_error for d <= 0.
MPLaw mp_edges(double d);
double mp_density(double x, double d);

/// Integral of f against the law. Uses x = c + r cos(theta), which removes
/// the square-root edges (and the 1/x pole at d = 1) from the integrand.
double mp_integrate(const std::function<double(double)>& f, double d);
double mp_moment(int k, double d);

/// s(z) = integral of rho_d(x) / (x - z) by adaptive quadrature. Throws
/// std::domain_error for z on the support.
std::complex<double> mp_stieltjes(std::complex<double> z, double d);

enum class Statistic {
  cg_error,         // ||e_k||_W^2
  cg_residual,      // ||r_k||^2
  minres_residual,  // MINRES ||r_k||^2
  cgne_error,       // normal equations ||e_k||_W^2
  cgne_relative,    // normal equations ||e_k||_W^2 / ||e_0||_W^2
};

std::string_view to_string(Statistic s);
/// Accepts the enum names plus the CLI spellings (cg, cg-residual,
/// cg-error, minres, cgne).
Statistic parse_statistic(std::string_view name);

/// Deterministic large-M limit of the statistic at iteration k, d in (0, 1].
/// The geometric sums are evaluated as sum_{j<=k} d^j, so d = 1 is the
/// continuous limit; cg_error at d = 1 throws std::domain_error.
double leading_order(Statistic s, double d, Index k);

/// Limiting variance of sqrt(beta M / 2) (statistic - leading order).
/// cg_residual and MINRES-type statistics need k >= 1, cg_error k >= 0.
double fluctuation_variance(Statistic s, double d, Index k);

/// Number of series terms so that d^terms < 1e-10.
Index default_truncation(double d);

/// Row k holds the coefficients of the limit-process variable Z_k over the
/// iid normals Z_1..Z_L (column i is Z_{i+1}), k = 0..kmax. The infinite
/// series in the error process is cut after `truncation_terms` terms.
Matrix<double> limit_process_coefficients(Statistic s, double d, Index kmax, Index truncation_terms);

/// One joint draw of (Z_0..Z_kmax) from a single iid normal sequence.
std::vector<double> sample_limit_process(Statistic s, double d, Index kmax, Index truncation_terms,
                                         RngStream& rng);

struct HaltingPrediction {
  Index iterations = 0;
  /// eps sits on the lattice; the limit then splits 1/2 : 1/2 between
  /// `iterations` and `iterations + 1`.
  bool boundary = false;
};

/// Ceiling formulas for cg_error, cg_residual and minres_residual. The
/// boundary flag is raised when the ceiling argument is within 1e-9 of an
/// integer.
HaltingPrediction halting_prediction(Statistic s, double d, double eps);

struct ExpectedNorms {
  std::vector<double> residual;  // E ||r_k||
  std::vector<double> error;     // E ||e_k||_W (may be +inf)
};

/// Exact finite-N expectations for CG with a unit right-hand side on the
/// Gaussian ensemble, accumulated from Gamma-function ratios in the log
/// domain. Requires kmax < n <= m.
ExpectedNorms expected_norms_gamma(BetaField beta, Index n, Index m, Index kmax);

/// k/2 (1 + 1/d).
double table1_prediction(double d, Index k);

/// Limiting variance of sqrt(M)(||r|| / <||r||> - 1) built from the
/// unsquared norm: sigma^2 / (2 beta L^2). Equals table1_prediction for
/// cg_residual with beta = 1.
double rescaled_variance_prediction(Statistic s, double d, Index k, BetaField beta);

}  // namespace krylov
