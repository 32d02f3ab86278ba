#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <variant>

#include <boost/random/normal_distribution.hpp>

#include "krylov/types.hpp"

namespace krylov {

/// Real (1) or complex (2) entries.
class BetaField {
 public:
  explicit BetaField(int value);

  static BetaField real() { return BetaField(1); }
  static BetaField complex() { return BetaField(2); }

  int value() const noexcept { return value_; }
  bool is_complex() const noexcept { return value_ == 2; }

  friend bool operator==(BetaField, BetaField) = default;

 private:
  int value_;
};

enum class EnsembleKind { gaussian, moment_match4, bernoulli };

std::string_view to_string(EnsembleKind kind);
/// Accepts "gaussian"/"wishart", "moment_match4"/"mm4", "bernoulli".
EnsembleKind parse_ensemble_kind(std::string_view name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::gaussian;
  Index n = 1;
  Index m = 1;
  BetaField beta = BetaField::real();

  /// Throws std::invalid_argument on n > m, non-positive sizes, or a
  /// discrete law combined with beta = 2.
  void validate() const;

  double aspect_ratio() const { return static_cast<double>(n) / static_cast<double>(m); }
};

/// A reproducible variate stream keyed by (seed, stream_id).
///
/// The pair is hashed through std::seed_seq into a 64-bit Mersenne twister,
/// so each trial of an experiment owns a stream that does not depend on which
/// thread runs it or in what order trials are scheduled.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  engine_type& engine() noexcept { return engine_; }

  std::uint64_t bits() { return engine_(); }
  double uniform();
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  engine_type engine_;
  boost::random::normal_distribution<double> normal_;
};

/// N x M sample matrix with E|X_ij|^2 = 1/M, so W = X X^* directly.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix<double> entries) : entries_(std::move(entries)) {}
  explicit DataMatrix(Matrix<Complex> entries) : entries_(std::move(entries)) {}

  bool is_complex() const noexcept { return std::holds_alternative<Matrix<Complex>>(entries_); }
  Index rows() const;
  Index cols() const;

  const Matrix<double>& real_entries() const { return std::get<Matrix<double>>(entries_); }
  const Matrix<Complex>& complex_entries() const { return std::get<Matrix<Complex>>(entries_); }

  template <typename Visitor>
  decltype(auto) visit(Visitor&& visitor) const {
    return std::visit(std::forward<Visitor>(visitor), entries_);
  }

 private:
  std::variant<Matrix<double>, Matrix<Complex>> entries_;
};

DataMatrix sample_data_matrix(const EnsembleSpec& spec, RngStream& rng);

/// In-place variants used by the harness to reuse one buffer per worker.
void fill_data_matrix(const EnsembleSpec& spec, RngStream& rng, Matrix<double>& out);
void fill_data_matrix(const EnsembleSpec& spec, RngStream& rng, Matrix<Complex>& out);

/// One chi variate with `dof` degrees of freedom, drawn as sqrt(Gamma(dof/2, 2)).
double sample_chi(double dof, RngStream& rng);
double sample_chi_squared(double dof, RngStream& rng);

enum class RhsKind { first_basis, random_unit, explicit_vector };

/// Unit right-hand side. Scalar = double is beta = 1, Complex is beta = 2.
template <typename Scalar>
Vector<Scalar> make_rhs(RhsKind kind, Index n, RngStream& rng, std::span<const Scalar> payload = {});

}  // namespace krylov
