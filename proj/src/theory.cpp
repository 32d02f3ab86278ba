#include "krylov/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace krylov {

namespace {

constexpr double quadrature_tol = 1e-13;
constexpr unsigned quadrature_depth = 20;

void require_aspect(double d, bool allow_one) {
  const bool ok = d > 0.0 && (allow_one ? d <= 1.0 : d < 1.0);
  if (!ok) {
    throw std::domain_error("aspect ratio d = " + std::to_string(d) + " outside " + (allow_one ? "(0, 1]" : "(0, 1)"));
  }
}

void require_k(Index k, Index lowest) {
  if (k < lowest) throw std::domain_error("iteration k = " + std::to_string(k) + " below " + std::to_string(lowest));
}

double geometric_sum(double d, Index k) {
  double sum = 0.0;
  double term = 1.0;
  for (Index j = 0; j <= k; ++j) {
    sum += term;
    term *= d;
  }
  return sum;
}

}  // namespace

MPLaw mp_edges(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) throw std::domain_error("mp_edges: d must be positive");
  const double root = std::sqrt(d);
  return MPLaw{d, (1.0 - root) * (1.0 - root), (1.0 + root) * (1.0 + root)};
}

double mp_density(double x, double d) {
  require_aspect(d, true);
  const MPLaw law = mp_edges(d);
  if (x <= law.gamma_minus || x >= law.gamma_plus || x <= 0.0) return 0.0;
  return std::sqrt((law.gamma_plus - x) * (x - law.gamma_minus)) / (2.0 * std::numbers::pi * d * x);
}

double mp_integrate(const std::function<double(double)>& f, double d) {
  require_aspect(d, true);
  const double root = std::sqrt(d);
  const double lower = (1.0 - root) * (1.0 - root);
  // With x = (1 - sqrt d)^2 + 4 sqrt(d) cos^2(theta/2), the density times dx is
  // 8 d sin^2(theta/2) cos^2(theta/2) / (pi d x) d(theta).
  auto integrand = [&](double theta) {
    const double s = std::sin(0.5 * theta);
    const double c = std::cos(0.5 * theta);
    const double x = lower + 4.0 * root * c * c;
    return f(x) * 8.0 * s * s * c * c / (std::numbers::pi * x);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::numbers::pi,
                                                                        quadrature_depth, quadrature_tol);
}

double mp_moment(int k, double d) {
  if (k < 0) throw std::invalid_argument("mp_moment: order must be nonnegative");
  return mp_integrate([k](double x) { return std::pow(x, k); }, d);
}

std::complex<double> mp_stieltjes(std::complex<double> z, double d) {
  const MPLaw law = mp_edges(d);
  require_aspect(d, true);
  if (z.imag() == 0.0 && z.real() >= law.gamma_minus && z.real() <= law.gamma_plus) {
    throw std::domain_error("mp_stieltjes: z lies on the support");
  }
  const double re = mp_integrate([z](double x) { return (1.0 / (x - z)).real(); }, d);
  const double im = mp_integrate([z](double x) { return (1.0 / (x - z)).imag(); }, d);
  return {re, im};
}

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::cg_error:
      return "cg_error";
    case Statistic::cg_residual:
      return "cg_residual";
    case Statistic::minres_residual:
      return "minres_residual";
    case Statistic::cgne_error:
      return "cgne_error";
    case Statistic::cgne_relative:
      return "cgne_relative";
  }
  return "unknown";
}

Statistic parse_statistic(std::string_view name) {
  if (name == "cg_error" || name == "cg-error") return Statistic::cg_error;
  if (name == "cg_residual" || name == "cg-residual" || name == "cg") return Statistic::cg_residual;
  if (name == "minres_residual" || name == "minres-residual" || name == "minres") return Statistic::minres_residual;
  if (name == "cgne_error" || name == "cgne-error") return Statistic::cgne_error;
  if (name == "cgne_relative" || name == "cgne-relative" || name == "cgne") return Statistic::cgne_relative;
  throw std::invalid_argument("unknown algorithm/statistic '" + std::string(name) + "'");
}

double leading_order(Statistic s, double d, Index k) {
  require_aspect(d, true);
  require_k(k, 0);
  const double dk = std::pow(d, static_cast<double>(k));
  switch (s) {
    case Statistic::cg_residual:
      return dk;
    case Statistic::cg_error:
      if (d == 1.0) throw std::domain_error("leading_order: cg_error is unbounded at d = 1");
      return dk / (1.0 - d);
    case Statistic::minres_residual:
    case Statistic::cgne_relative:
      return dk / geometric_sum(d, k);
    case Statistic::cgne_error:
      return d * dk / geometric_sum(d, k);
  }
  throw std::invalid_argument("leading_order: unknown statistic");
}

double fluctuation_variance(Statistic s, double d, Index k) {
  require_aspect(d, false);
  const double kk = static_cast<double>(k);
  switch (s) {
    case Statistic::cg_residual:
      require_k(k, 1);
      return kk * std::pow(d, 2.0 * kk) * (1.0 + 1.0 / d);
    case Statistic::cg_error: {
      require_k(k, 0);
      const double bracket = 1.0 / (d * (1.0 - d)) + (kk - 1.0) * (1.0 + 1.0 / d) + 1.0;
      return std::pow(d, 2.0 * kk) / ((1.0 - d) * (1.0 - d)) * bracket;
    }
    case Statistic::minres_residual:
    case Statistic::cgne_relative: {
      require_k(k, 1);
      const double poly = 2.0 * std::pow(d, kk + 1.0) + 2.0 * std::pow(d, kk + 2.0) - std::pow(d, 2.0 * kk + 2.0) -
                          d * d * (kk + 1.0) - 2.0 * d + kk;
      const double denom = std::pow(1.0 - std::pow(d, kk + 1.0), 4.0);
      return (1.0 - d) * std::pow(d, 2.0 * kk - 1.0) * poly / denom;
    }
    case Statistic::cgne_error:
      throw std::domain_error("fluctuation_variance: no closed form for the absolute normal-equations error");
  }
  throw std::invalid_argument("fluctuation_variance: unknown statistic");
}

Index default_truncation(double d) {
  require_aspect(d, false);
  return static_cast<Index>(std::ceil(std::log(1e-10) / std::log(d))) + 1;
}

Matrix<double> limit_process_coefficients(Statistic s, double d, Index kmax, Index truncation_terms) {
  require_aspect(d, false);
  require_k(kmax, 0);
  const double inv_root = 1.0 / std::sqrt(d);

  // Z^{r,CG}_k = d^k sum_{j<k} (Z_{2j+2}/sqrt d - Z_{2j+1}).
  auto cg_rows = [&](Index rows) {
    Matrix<double> c = Matrix<double>::Zero(rows + 1, std::max<Index>(2 * rows, 1));
    for (Index k = 1; k <= rows; ++k) {
      const double dk = std::pow(d, static_cast<double>(k));
      for (Index j = 0; j < k; ++j) {
        c(k, 2 * j + 1) += dk * inv_root;  // Z_{2j+2}
        c(k, 2 * j) -= dk;                 // Z_{2j+1}
      }
    }
    return c;
  };

  switch (s) {
    case Statistic::cg_residual:
      return cg_rows(kmax);
    case Statistic::minres_residual:
    case Statistic::cgne_relative: {
      const Matrix<double> cg = cg_rows(kmax);
      Matrix<double> c = Matrix<double>::Zero(cg.rows(), cg.cols());
      for (Index k = 1; k <= kmax; ++k) {
        const double dk1 = std::pow(d, static_cast<double>(k + 1));
        const double weight = std::pow((1.0 - d) / (1.0 - dk1), 2.0);
        for (Index j = 1; j <= k; ++j) c.row(k) += weight * std::pow(d, 2.0 * static_cast<double>(k - j)) * cg.row(j);
      }
      return c;
    }
    case Statistic::cg_error: {
      if (truncation_terms < 1) throw std::invalid_argument("limit process: truncation_terms must be >= 1");
      // Z_0 and Z_{-1} are taken as zero.
      const Index width = 2 * (kmax + truncation_terms);
      Matrix<double> c = Matrix<double>::Zero(kmax + 1, width);
      auto add = [&](Index row, Index z, double v) {
        if (z >= 1) c(row, z - 1) += v;
      };
      for (Index k = 0; k <= kmax; ++k) {
        const double scale = std::pow(d, static_cast<double>(k)) / (1.0 - d);
        for (Index j = k; j < k + truncation_terms; ++j) {
          const double w = scale * std::pow(d, static_cast<double>(j - k));
          add(k, 2 * j, w * inv_root);
          add(k, 2 * j + 1, -w);
        }
        for (Index j = 1; j <= k - 1; ++j) {
          add(k, 2 * j, scale * inv_root);
          add(k, 2 * j - 1, -scale);
        }
        add(k, 2 * k - 1, -scale);
      }
      return c;
    }
    case Statistic::cgne_error:
      break;
  }
  throw std::domain_error("limit process: not defined for " + std::string(to_string(s)));
}

std::vector<double> sample_limit_process(Statistic s, double d, Index kmax, Index truncation_terms,
                                         RngStream& rng) {
  const Matrix<double> c = limit_process_coefficients(s, d, kmax, truncation_terms);
  Vector<double> z(c.cols());
  for (Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  const Vector<double> draw = c * z;
  return std::vector<double>(draw.data(), draw.data() + draw.size());
}

HaltingPrediction halting_prediction(Statistic s, double d, double eps) {
  require_aspect(d, false);
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("halting_prediction: eps must lie in (0, 1)");
  const double log_d = std::log(d);
  double x = 0.0;
  switch (s) {
    case Statistic::cg_residual:
      x = 2.0 * std::log(eps) / log_d;
      break;
    case Statistic::cg_error:
      x = std::log(eps * eps * (1.0 - d)) / log_d;
      break;
    case Statistic::minres_residual:
      x = std::log(eps * eps / (1.0 - d + eps * eps * d)) / log_d;
      break;
    default:
      throw std::invalid_argument("halting_prediction: no halting formula for " + std::string(to_string(s)));
  }
  HaltingPrediction out;
  const double nearest = std::round(x);
  out.boundary = std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x));
  const double k = out.boundary ? nearest : std::ceil(x);
  out.iterations = static_cast<Index>(std::max(0.0, k));
  return out;
}

ExpectedNorms expected_norms_gamma(BetaField beta, Index n, Index m, Index kmax) {
  if (n < 1 || n > m) throw std::invalid_argument("expected_norms_gamma: requires 1 <= n <= m");
  if (kmax < 0 || kmax >= n) throw std::invalid_argument("expected_norms_gamma: requires 0 <= kmax < n");
  const double b = beta.value();
  const double inf = std::numeric_limits<double>::infinity();
  using boost::math::tgamma_delta_ratio;

  ExpectedNorms out;
  double log_r = 0.0;
  out.residual.push_back(1.0);
  for (Index j = 0; j < kmax; ++j) {
    // E chi_a / E-inverse chi_b per step: Gamma((a+1)/2)/Gamma(a/2) * Gamma((b-1)/2)/Gamma(b/2).
    const double a = b * static_cast<double>(n - j - 1);
    const double c = b * static_cast<double>(m - j);
    log_r -= std::log(tgamma_delta_ratio(0.5 * a, 0.5));
    log_r += c > 1.0 ? std::log(tgamma_delta_ratio(0.5 * (c - 1.0), 0.5)) : inf;
    out.residual.push_back(std::exp(log_r));
  }
  const double nu = b * static_cast<double>(m - n + 1);
  const double sigma_mean =
      nu > 1.0 ? std::sqrt(0.5 * b * static_cast<double>(m)) * tgamma_delta_ratio(0.5 * (nu - 1.0), 0.5) : inf;
  for (double r : out.residual) out.error.push_back(sigma_mean * r);
  return out;
}

double table1_prediction(double d, Index k) {
  require_aspect(d, false);
  require_k(k, 1);
  return 0.5 * static_cast<double>(k) * (1.0 + 1.0 / d);
}

double rescaled_variance_prediction(Statistic s, double d, Index k, BetaField beta) {
  const double level = leading_order(s, d, k);
  return fluctuation_variance(s, d, k) / (2.0 * beta.value() * level * level);
}

}  // namespace krylov
