#include <doctest.h>

#include <cmath>
#include <vector>

#include "krylov/chimodel.hpp"
#include "krylov/ensembles.hpp"
#include "krylov/orthopoly.hpp"
#include "krylov/solvers.hpp"
#include "krylov/stats.hpp"
#include "krylov/tridiag.hpp"

using namespace krylov;

namespace {

template <typename Scalar>
LinearOperator<Scalar> dense_op(const Matrix<Scalar>& w) {
  return [&w](const Vector<Scalar>& x, Vector<Scalar>& y) { y.noalias() = w * x; };
}

template <typename Scalar>
Matrix<Scalar> sample_x(Index n, Index m, BetaField beta, std::uint64_t seed) {
  RngStream rng(seed, 0);
  const DataMatrix x = sample_data_matrix({EnsembleKind::gaussian, n, m, beta}, rng);
  if constexpr (std::is_same_v<Scalar, double>) return x.real_entries();
  else return x.complex_entries();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("CG on trivial systems") {
  const Matrix<double> id = Matrix<double>::Identity(4, 4);
  const auto tr = cg_solve<double>(dense_op(id), Vector<double>::Unit(4, 2), 5, 1e-12);
  REQUIRE(tr.r2sq.size() == 2);
  CHECK(tr.r2sq[0] == 1.0);
  CHECK(tr.r2sq[1] == 0.0);
  CHECK(tr.converged_at == 1);

  Matrix<double> w = Matrix<double>::Zero(2, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 2.0;
  Vector<double> b(2);
  b << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  Vector<double> x;
  const auto two = cg_solve<double>(dense_op(w), b, 5, 1e-12, nullptr, &x);
  CHECK(two.converged_at == 2);
  CHECK(std::sqrt(two.r2sq[2]) < 1e-12);
  CHECK(std::abs(x(1) - b(1) / 2.0) < 1e-14);

  CHECK_THROWS_AS(cg_solve<double>(dense_op(Matrix<double>(-id)), Vector<double>::Unit(4, 0), 3, 0.0),
                  NotPositiveDefinite);
  CHECK_THROWS_AS(cg_solve<double>(dense_op(id), Vector<double>::Unit(4, 0), -1, 0.0), std::invalid_argument);
}

TEST_CASE("MINRES on trivial systems") {
  const Matrix<double> id = Matrix<double>::Identity(4, 4);
  const auto tr = minres_solve<double>(dense_op(id), Vector<double>::Unit(4, 0), 5, 1e-12);
  CHECK(tr.converged_at == 1);
  CHECK(tr.r2sq.back() < 1e-24);
  // MINRES handles symmetric indefinite systems.
  Matrix<double> w = Matrix<double>::Zero(2, 2);
  w(0, 0) = -1.0;
  w(1, 1) = 2.0;
  Vector<double> b(2);
  b << 0.6, 0.8;
  Vector<double> x;
  const auto ind = minres_solve<double>(dense_op(w), b, 5, 1e-12, &x);
  CHECK(ind.converged_at == 2);
  CHECK((w * x - b).norm() < 1e-12);
}

TEST_CASE("stopping is strict at the tolerance") {
  const Matrix<double> id = Matrix<double>::Identity(3, 3);
  const Vector<double> b = Vector<double>::Unit(3, 0);
  CHECK_FALSE(cg_solve<double>(dense_op(id), b, 0, 1.0).converged_at.has_value());
  CHECK(cg_solve<double>(dense_op(id), b, 0, std::nextafter(1.0, 2.0)).converged_at == 0);
}

TEST_CASE("observer can end a run early") {
  const Matrix<double> x = sample_x<double>(30, 60, BetaField::real(), 3);
  const Matrix<double> w = x * x.transpose();
  const auto tr = cg_solve<double>(dense_op(w), Vector<double>::Unit(30, 0), 20, 0.0, nullptr, nullptr,
                                   [](Index k, const SolveTrace&) { return k < 4; });
  CHECK(tr.iterations == 4);
  CHECK(tr.r2sq.size() == 5);
  const auto mr = minres_solve<double>(dense_op(w), Vector<double>::Unit(30, 0), 20, 0.0, nullptr,
                                       [](Index k, const SolveTrace&) { return k < 6; });
  CHECK(mr.iterations == 6);
}

TEST_CASE_TEMPLATE("solver traces agree with the bidiagonal predictions", Scalar, double, Complex) {
  const Index n = 50, m = 100;
  const BetaField beta = std::is_same_v<Scalar, double> ? BetaField::real() : BetaField::complex();
  const Matrix<Scalar> x = sample_x<Scalar>(n, m, beta, 11);
  const Matrix<Scalar> w = x * x.adjoint();
  const Vector<Scalar> b = Vector<Scalar>::Unit(n, 0);
  const Vector<Scalar> x_true = w.llt().solve(b);
  const auto op = dense_op<Scalar>(w);
  const Index kmax = n - 1;
  const auto cg = cg_solve<Scalar>(op, b, kmax, 0.0, &x_true);
  const auto mr = minres_solve<Scalar>(op, b, kmax, 0.0);
  const BidiagonalFactor h = lanczos_factor<Scalar>(op, b, n);
  const auto pr = predicted_cg_residuals(h, kmax);
  const auto pe = predicted_cg_errors(h, kmax);
  const auto pm = predicted_minres_residuals(h, kmax);
  Index compared = 0;
  for (Index k = 0; k <= kmax && k < static_cast<Index>(cg.r2sq.size()); ++k) {
    if (pr[k] <= 1e-6) break;
    CHECK(rel(cg.r2sq[k], pr[k] * pr[k]) < 1e-8);
    CHECK(rel((*cg.ewsq)[k], pe[k] * pe[k]) < 1e-8);
    ++compared;
  }
  CHECK(compared > 15);
  for (Index k = 0; k < static_cast<Index>(mr.r2sq.size()); ++k) {
    if (pm.norms[k] <= 1e-6) break;
    CAPTURE(k);
    // The short Lanczos recurrence inside MINRES drifts from the exact-arithmetic
    // value as the residual shrinks: 1e-8 holds down to 1e-5, 1e-6 below that.
    const double tol = pm.norms[k] > 1e-5 ? 1e-8 : 1e-6;
    CHECK(rel(mr.r2sq[k], pm.norms[k] * pm.norms[k]) < tol);
    // MINRES minimizes the residual over the same Krylov space.
    CHECK(mr.r2sq[k] <= cg.r2sq[k] * (1.0 + 1e-10));
    if (k > 0) CHECK(mr.r2sq[k] <= mr.r2sq[k - 1] * (1.0 + 1e-12));
  }
}

TEST_CASE("oracle equivalence on a general SPD instance with a random right-hand side") {
  RngStream rng(12, 0);
  const Index n = 200;
  const Matrix<double> x = sample_x<double>(n, 320, BetaField::real(), 12);
  const Matrix<double> w = x * x.transpose();
  const Vector<double> b = make_rhs<double>(RhsKind::random_unit, n, rng);
  const Vector<double> x_true = w.llt().solve(b);
  const auto cg = cg_solve<double>(dense_op(w), b, 80, 0.0, &x_true);
  const auto mr = minres_solve<double>(dense_op(w), b, 80, 0.0);
  const auto h = lanczos_factor<double>(dense_op(w), b, n);
  const auto pr = predicted_cg_residuals(h, 80);
  const auto pe = predicted_cg_errors(h, 80);
  const auto pm = predicted_minres_residuals(h, 80);
  for (Index k = 0; k < static_cast<Index>(cg.r2sq.size()) && pr[k] > 1e-6; ++k) {
    CHECK(rel(cg.r2sq[k], pr[k] * pr[k]) < 1e-6);
    CHECK(rel((*cg.ewsq)[k], pe[k] * pe[k]) < 1e-6);
  }
  for (Index k = 0; k < static_cast<Index>(mr.r2sq.size()) && pm.norms[k] > 1e-6; ++k) {
    CHECK(rel(mr.r2sq[k], pm.norms[k] * pm.norms[k]) < 1e-6);
  }
}

TEST_CASE("CG residuals are orthogonal and the Galerkin identity holds") {
  const Index n = 40;
  const Matrix<double> x = sample_x<double>(n, 80, BetaField::real(), 13);
  const Matrix<double> w = x * x.transpose();
  const Vector<double> b = Vector<double>::Unit(n, 0);
  const Vector<double> x_true = w.llt().solve(b);
  std::vector<Vector<double>> residuals;
  for (Index k = 0; k <= 12; ++k) {
    Vector<double> xk;
    const auto tr = cg_solve<double>(dense_op(w), b, k, 0.0, &x_true, &xk);
    const Vector<double> r = b - w * xk;
    const Vector<double> e = x_true - xk;
    CHECK(std::abs(e.dot(r) - tr.ewsq->back()) < 1e-10 * tr.ewsq->back());
    CHECK(std::abs(r.squaredNorm() - tr.r2sq.back()) < 1e-8 * tr.r2sq.back());
    residuals.push_back(r);
  }
  for (std::size_t i = 0; i < residuals.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      CHECK(std::abs(residuals[i].dot(residuals[j])) < 1e-8 * residuals[i].norm() * residuals[j].norm());
}

TEST_CASE("prediction formulas on small factors") {
  const auto id = predicted_cg_residuals(BidiagonalFactor::identity(1), 3);
  REQUIRE(id.size() == 2);
  CHECK(id[0] == 1.0);
  CHECK(id[1] == 0.0);
  const auto half = predicted_cg_residuals(BidiagonalFactor({1.0, 1.0}, {0.5}), 2);
  CHECK(half[1] == doctest::Approx(0.5));
  CHECK(half[2] == 0.0);

  const BidiagonalFactor h({2.0, 1.5, 4.0}, {1.0, 0.5});
  const auto err = predicted_cg_errors(h, 2);
  const auto res = predicted_cg_residuals(h, 2);
  CHECK(err[2] == doctest::Approx(res[2] / 4.0));
  CHECK_THROWS_AS(predicted_cg_errors(h, 3), std::out_of_range);

  const auto mr = predicted_minres_residuals(BidiagonalFactor({1.0, 1.0}, {1.0}), 1);
  CHECK(mr.norms[0] == 1.0);
  CHECK(mr.norms[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_FALSE(mr.exact_convergence);
  const auto stop = predicted_minres_residuals(BidiagonalFactor({1.0, 1.0, 1.0}, {1.0, 0.0}), 5);
  CHECK(stop.exact_convergence);
  CHECK(stop.norms.size() == 3);
  CHECK(stop.norms.back() == 0.0);
}

TEST_CASE("chi-model factors reproduce finite-N means") {
  // E prod beta_j^2 / alpha_j^2 = prod (N-j-1)/(M-j-2); E[1/alpha^2 scaled] gives M/(M-N-1).
  const Index n = 500, m = 1000, trials = 10000;
  RngStream rng(14, 0);
  std::vector<double> r10, e0;
  for (Index t = 0; t < trials; ++t) {
    const auto h = golub_kahan_sample(n, m, BetaField::real(), rng);
    const double r = predicted_cg_residuals(h, 10)[10];
    r10.push_back(r * r);
    const double e = predicted_cg_errors(h, 0)[0];
    e0.push_back(e * e);
  }
  double exact_r10 = 1.0;
  for (Index j = 0; j < 10; ++j) exact_r10 *= (n - j - 1.0) / (m - j - 2.0);
  const auto sr = sample_moments(r10), se = sample_moments(e0);
  CHECK(std::abs(sr.mean - exact_r10) < 3.0 * sr.standard_error());
  CHECK(std::abs(sr.mean - std::pow(0.5, 10)) < 0.06 * std::pow(0.5, 10));
  CHECK(std::abs(se.mean - static_cast<double>(m) / (m - n - 1.0)) < 3.0 * se.standard_error());
  CHECK(std::abs(se.mean - 2.0) < 0.01);
}

TEST_CASE_TEMPLATE("CG on the normal equations matches the measure nu", Scalar, double, Complex) {
  const Index n = 30, m = 60;
  const BetaField beta = std::is_same_v<Scalar, double> ? BetaField::real() : BetaField::complex();
  const Matrix<Scalar> x = sample_x<Scalar>(n, m, beta, 15);
  RngStream rng(15, 1);
  const Vector<Scalar> b = make_rhs<Scalar>(RhsKind::random_unit, m, rng);
  const auto tr = cg_normal_equations<Scalar>(x, b, 20, 0.0);
  const SpectralMeasure nu = normal_equations_measure<Scalar>(x, b);
  const auto pred = predicted_cgne_errors(nu, 20);
  CHECK(rel((*tr.ewsq)[0], nu.total_mass()) < 1e-10);
  for (Index k = 0; k <= 20; ++k) CHECK(rel((*tr.ewsq)[k], pred[k] * pred[k]) < 1e-8);
}

TEST_CASE("CG on the normal equations with N = M decays like 1/(k+1)") {
  const Index n = 400;
  std::vector<double> ratio5;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Matrix<double> x = sample_x<double>(n, n, BetaField::real(), 100 + seed);
    RngStream rng(100 + seed, 1);
    const Vector<double> b = make_rhs<double>(RhsKind::random_unit, n, rng);
    const auto tr = cg_normal_equations<double>(x, b, 5, 0.0);
    ratio5.push_back((*tr.ewsq)[5] / (*tr.ewsq)[0]);
  }
  const auto s = sample_moments(ratio5);
  CHECK(s.mean == doctest::Approx(1.0 / 6.0).epsilon(0.15));
}

TEST_CASE("MINRES at N = M decays like 1/sqrt(k+1)") {
  RngStream rng(16, 0);
  std::vector<double> r8;
  for (int t = 0; t < 2000; ++t) {
    const auto h = golub_kahan_sample(2000, 2000, BetaField::real(), rng);
    r8.push_back(predicted_minres_residuals(h, 8).norms[8]);
  }
  CHECK(sample_moments(r8).mean == doctest::Approx(1.0 / 3.0).epsilon(0.05));
}
