#include "krylov/ensembles.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/random/gamma_distribution.hpp>

namespace krylov {

BetaField::BetaField(int value) : value_(value) {
  if (value != 1 && value != 2) {
    throw std::invalid_argument("beta must be 1 (real) or 2 (complex), got " + std::to_string(value));
  }
}

std::string_view to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::gaussian:
      return "gaussian";
    case EnsembleKind::moment_match4:
      return "moment_match4";
    case EnsembleKind::bernoulli:
      return "bernoulli";
  }
  return "unknown";
}

EnsembleKind parse_ensemble_kind(std::string_view name) {
  if (name == "gaussian" || name == "wishart") return EnsembleKind::gaussian;
  if (name == "moment_match4" || name == "mm4") return EnsembleKind::moment_match4;
  if (name == "bernoulli") return EnsembleKind::bernoulli;
  throw std::invalid_argument("unknown ensemble '" + std::string(name) + "'");
}

void EnsembleSpec::validate() const {
  if (n < 1 || m < 1) throw std::invalid_argument("ensemble sizes must be positive");
  if (n > m) {
    throw std::invalid_argument("ensemble requires n <= m (got n=" + std::to_string(n) +
                                ", m=" + std::to_string(m) + ")");
  }
  if (kind != EnsembleKind::gaussian && beta.is_complex()) {
    throw std::invalid_argument(std::string(to_string(kind)) + " ensemble is real-only (beta = 1)");
  }
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::normal() { return normal_(engine_); }

Index DataMatrix::rows() const {
  return std::visit([](const auto& x) { return x.rows(); }, entries_);
}

Index DataMatrix::cols() const {
  return std::visit([](const auto& x) { return x.cols(); }, entries_);
}

namespace {

__extension__ using uint128 = unsigned __int128;

// P(0) = 2/3, P(+-sqrt 3) = 1/6. Each 64-bit word yields four base-6 digits
// by repeated multiply-high; the residual bias is below 6^4 / 2^64.
void fill_moment_match4(RngStream& rng, double scale, std::span<double> out) {
  const double atom = std::sqrt(3.0) * scale;
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = rng.bits();
    for (int digit = 0; digit < 4 && i < out.size(); ++digit, ++i) {
      const uint128 wide = static_cast<uint128>(word) * 6u;
      const auto outcome = static_cast<unsigned>(wide >> 64);
      word = static_cast<std::uint64_t>(wide);
      out[i] = outcome < 4 ? 0.0 : (outcome == 4 ? atom : -atom);
    }
  }
}

void fill_bernoulli(RngStream& rng, double scale, std::span<double> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = rng.bits();
    for (int bit = 0; bit < 64 && i < out.size(); ++bit, ++i) {
      out[i] = (word & 1u) ? scale : -scale;
      word >>= 1;
    }
  }
}

}  // namespace

void fill_data_matrix(const EnsembleSpec& spec, RngStream& rng, Matrix<double>& out) {
  spec.validate();
  if (spec.beta.is_complex()) throw std::invalid_argument("beta = 2 requires a complex buffer");
  out.resize(spec.n, spec.m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  std::span<double> entries(out.data(), static_cast<std::size_t>(out.size()));
  switch (spec.kind) {
    case EnsembleKind::gaussian:
      for (double& x : entries) x = scale * rng.normal();
      break;
    case EnsembleKind::moment_match4:
      fill_moment_match4(rng, scale, entries);
      break;
    case EnsembleKind::bernoulli:
      fill_bernoulli(rng, scale, entries);
      break;
  }
}

void fill_data_matrix(const EnsembleSpec& spec, RngStream& rng, Matrix<Complex>& out) {
  spec.validate();
  if (!spec.beta.is_complex()) throw std::invalid_argument("beta = 1 requires a real buffer");
  out.resize(spec.n, spec.m);
  // Real and imaginary parts each carry variance 1/(2M).
  const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(spec.m));
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      out(i, j) = Complex(scale * re, scale * im);
    }
  }
}

DataMatrix sample_data_matrix(const EnsembleSpec& spec, RngStream& rng) {
  spec.validate();
  if (spec.beta.is_complex()) {
    Matrix<Complex> x;
    fill_data_matrix(spec, rng, x);
    return DataMatrix(std::move(x));
  }
  Matrix<double> x;
  fill_data_matrix(spec, rng, x);
  return DataMatrix(std::move(x));
}

double sample_chi_squared(double dof, RngStream& rng) {
  if (!(dof > 0.0) || !std::isfinite(dof)) {
    throw std::invalid_argument("chi distribution needs dof > 0, got " + std::to_string(dof));
  }
  boost::random::gamma_distribution<double> gamma(0.5 * dof, 2.0);
  return gamma(rng.engine());
}

double sample_chi(double dof, RngStream& rng) { return std::sqrt(sample_chi_squared(dof, rng)); }

namespace {

template <typename Scalar>
Scalar draw_normal(RngStream& rng) {
  if constexpr (std::is_same_v<Scalar, Complex>) {
    const double re = rng.normal();
    const double im = rng.normal();
    return Complex(re, im);
  } else {
    return rng.normal();
  }
}

}  // namespace

template <typename Scalar>
Vector<Scalar> make_rhs(RhsKind kind, Index n, RngStream& rng, std::span<const Scalar> payload) {
  if (n < 1) throw std::invalid_argument("right-hand side needs n >= 1");
  Vector<Scalar> b;
  switch (kind) {
    case RhsKind::first_basis:
      b = Vector<Scalar>::Zero(n);
      b(0) = Scalar(1);
      return b;
    case RhsKind::random_unit:
      b.resize(n);
      for (Index i = 0; i < n; ++i) b(i) = draw_normal<Scalar>(rng);
      break;
    case RhsKind::explicit_vector:
      if (static_cast<Index>(payload.size()) != n) {
        throw std::invalid_argument("explicit right-hand side has length " + std::to_string(payload.size()) +
                                    ", expected " + std::to_string(n));
      }
      b = Eigen::Map<const Vector<Scalar>>(payload.data(), n);
      break;
  }
  const double norm = b.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("right-hand side payload must be nonzero and finite");
  }
  b /= norm;
  return b;
}

template Vector<double> make_rhs<double>(RhsKind, Index, RngStream&, std::span<const double>);
template Vector<Complex> make_rhs<Complex>(RhsKind, Index, RngStream&, std::span<const Complex>);

}  // namespace krylov
