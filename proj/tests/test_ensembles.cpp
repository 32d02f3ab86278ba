#include <doctest.h>

#include <cmath>
#include <vector>

#include "krylov/ensembles.hpp"
#include "krylov/stats.hpp"

using namespace krylov;

TEST_CASE("beta field accepts only 1 and 2") {
  CHECK(BetaField(1).value() == 1);
  CHECK(BetaField(2).is_complex());
  CHECK_THROWS_AS(BetaField(4), std::invalid_argument);
  CHECK_THROWS_AS(BetaField(0), std::invalid_argument);
}

TEST_CASE("ensemble spec validation") {
  CHECK_THROWS_AS((EnsembleSpec{EnsembleKind::gaussian, 5, 4, BetaField::real()}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((EnsembleSpec{EnsembleKind::bernoulli, 2, 4, BetaField::complex()}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((EnsembleSpec{EnsembleKind::moment_match4, 2, 4, BetaField::complex()}.validate()),
                  std::invalid_argument);
  CHECK_NOTHROW((EnsembleSpec{EnsembleKind::gaussian, 2, 4, BetaField::complex()}.validate()));
  CHECK(parse_ensemble_kind("wishart") == EnsembleKind::gaussian);
  CHECK(parse_ensemble_kind("mm4") == EnsembleKind::moment_match4);
  CHECK_THROWS_AS(parse_ensemble_kind("cauchy"), std::invalid_argument);
}

TEST_CASE("bernoulli entries are +-1/sqrt(M)") {
  RngStream rng(11, 0);
  const DataMatrix x = sample_data_matrix({EnsembleKind::bernoulli, 2, 2, BetaField::real()}, rng);
  REQUIRE(x.rows() == 2);
  REQUIRE(x.cols() == 2);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(std::abs(x.real_entries()(i, j)) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

namespace {

std::vector<double> scaled_entries(EnsembleKind kind, Index n, Index m, std::uint64_t seed) {
  RngStream rng(seed, 0);
  const DataMatrix x = sample_data_matrix({kind, n, m, BetaField::real()}, rng);
  std::vector<double> out;
  const double root_m = std::sqrt(static_cast<double>(m));
  const auto& e = x.real_entries();
  for (Index i = 0; i < e.size(); ++i) out.push_back(root_m * e.data()[i]);
  return out;
}

double raw_moment(const std::vector<double>& xs, int p) {
  double acc = 0.0;
  for (double x : xs) acc += std::pow(x, p);
  return acc / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("moment_match4 support and moments match the normal law to order four") {
  const auto xs = scaled_entries(EnsembleKind::moment_match4, 1000, 1000, 5);
  const double atom = std::sqrt(3.0);
  for (double x : xs) CHECK((x == 0.0 || std::abs(std::abs(x) - atom) < 1e-12));
  // Standard errors from the three-point law: Var(X^p) = E X^{2p} - (E X^p)^2.
  const double n = static_cast<double>(xs.size());
  CHECK(std::abs(raw_moment(xs, 1)) < 5.0 * std::sqrt(1.0 / n));
  CHECK(std::abs(raw_moment(xs, 2) - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(raw_moment(xs, 3)) < 5.0 * std::sqrt(9.0 / n));
  CHECK(std::abs(raw_moment(xs, 4) - 3.0) < 5.0 * std::sqrt((27.0 - 9.0) / n));
  CHECK(raw_moment(xs, 4) == doctest::Approx(3.0).epsilon(0.02 / 3.0));
}

TEST_CASE("every ensemble has mean 0 and variance 1 after rescaling") {
  for (auto kind : {EnsembleKind::gaussian, EnsembleKind::moment_match4, EnsembleKind::bernoulli}) {
    CAPTURE(to_string(kind));
    const auto xs = scaled_entries(kind, 1000, 1000, 17);
    const SampleMoments mom = sample_moments(xs);
    const double n = static_cast<double>(xs.size());
    CHECK(std::abs(mom.mean) < 5.0 / std::sqrt(n));
    const double fourth = kind == EnsembleKind::bernoulli ? 1.0 : 3.0;
    // The second moment of +-1 entries is exactly 1; the sample variance still moves with the mean.
    CHECK(std::abs(raw_moment(xs, 2) - 1.0) < 5.0 * std::sqrt((fourth - 1.0) / n) + 1e-12);
    CHECK(std::abs(mom.variance - 1.0) < 5.0 * std::sqrt((fourth - 1.0) / n) + 25.0 / n);
    if (kind == EnsembleKind::gaussian) CHECK(std::abs(mom.mean) < 0.004);
    if (kind == EnsembleKind::bernoulli) CHECK(raw_moment(xs, 4) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("complex gaussian splits the variance 1/(2M) per part") {
  RngStream rng(3, 1);
  const Index m = 500;
  const DataMatrix x = sample_data_matrix({EnsembleKind::gaussian, 400, m, BetaField::complex()}, rng);
  REQUIRE(x.is_complex());
  double re2 = 0.0, im2 = 0.0, cross = 0.0;
  const auto& e = x.complex_entries();
  for (Index i = 0; i < e.size(); ++i) {
    re2 += e.data()[i].real() * e.data()[i].real();
    im2 += e.data()[i].imag() * e.data()[i].imag();
    cross += e.data()[i].real() * e.data()[i].imag();
  }
  const double count = static_cast<double>(e.size());
  const double target = 1.0 / (2.0 * m);
  CHECK(re2 / count == doctest::Approx(target).epsilon(5.0 * std::sqrt(2.0 / count)));
  CHECK(im2 / count == doctest::Approx(target).epsilon(5.0 * std::sqrt(2.0 / count)));
  CHECK(std::abs(cross / count) < 5.0 * target / std::sqrt(count));
}

TEST_CASE("equal (seed, stream) gives bit-identical matrices; different streams differ") {
  for (auto kind : {EnsembleKind::gaussian, EnsembleKind::moment_match4, EnsembleKind::bernoulli}) {
    const EnsembleSpec spec{kind, 20, 30, BetaField::real()};
    RngStream a(99, 4), b(99, 4), c(99, 5);
    const auto xa = sample_data_matrix(spec, a).real_entries();
    const auto xb = sample_data_matrix(spec, b).real_entries();
    const auto xc = sample_data_matrix(spec, c).real_entries();
    CHECK(xa == xb);
    CHECK(xa != xc);
  }
}

TEST_CASE("chi sampler") {
  SUBCASE("dof 2: mean of squares is 2") {
    RngStream rng(1, 0);
    double acc = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) acc += sample_chi_squared(2.0, rng);
    // Var chi^2_2 = 4.
    CHECK(std::abs(acc / n - 2.0) < 5.0 * 2.0 / std::sqrt(n));
  }
  SUBCASE("dof 1 is the half-normal law") {
    RngStream rng(2, 0);
    std::vector<double> xs(100000);
    for (double& x : xs) x = sample_chi(1.0, rng);
    const double ks = one_sample_ks(xs, [](double x) { return x <= 0 ? 0.0 : std::erf(x / std::sqrt(2.0)); });
    CHECK(ks < 0.01);
  }
  SUBCASE("dof 6: inverse mean is 1/4") {
    RngStream rng(3, 0);
    double acc = 0.0, acc2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double v = 1.0 / sample_chi_squared(6.0, rng);
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 0.25) < 5.0 * se);
  }
  SUBCASE("invalid dof") {
    RngStream rng(4, 0);
    CHECK_THROWS_AS(sample_chi(0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_chi(-1.0, rng), std::invalid_argument);
  }
}

TEST_CASE("right-hand sides") {
  RngStream rng(8, 0);
  const Vector<double> e1 = make_rhs<double>(RhsKind::first_basis, 3, rng);
  CHECK(e1(0) == 1.0);
  CHECK(e1(1) == 0.0);
  CHECK(e1(2) == 0.0);

  const std::vector<double> payload{3.0, 4.0};
  const Vector<double> v = make_rhs<double>(RhsKind::explicit_vector, 2, rng, payload);
  CHECK(v(0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(v(1) == doctest::Approx(0.8).epsilon(1e-15));

  const Vector<double> r = make_rhs<double>(RhsKind::random_unit, 10000, rng);
  CHECK(std::abs(r.norm() - 1.0) < 1e-12);
  const Vector<Complex> rc = make_rhs<Complex>(RhsKind::random_unit, 100, rng);
  CHECK(std::abs(rc.norm() - 1.0) < 4.0 * 2.2e-16 * 10);

  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(make_rhs<double>(RhsKind::explicit_vector, 2, rng, zero), std::invalid_argument);
  CHECK_THROWS_AS(make_rhs<double>(RhsKind::explicit_vector, 3, rng, payload), std::invalid_argument);
}
