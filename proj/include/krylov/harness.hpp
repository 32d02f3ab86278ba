#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "krylov/ensembles.hpp"
#include "krylov/theory.hpp"

namespace krylov {

enum class SimulationMode { full_matrix, chi_model };

std::string_view to_string(SimulationMode mode);
/// Accepts "full_matrix"/"full" and "chi_model"/"chi".
SimulationMode parse_simulation_mode(std::string_view name);

std::string_view to_string(RhsKind kind);
/// Accepts "e1"/"first_basis" and "random"/"random_unit".
RhsKind parse_rhs_kind(std::string_view name);

struct ExperimentConfig {
  EnsembleSpec ensemble{EnsembleKind::gaussian, 500, 1000, BetaField::real()};
  RhsKind rhs = RhsKind::first_basis;
  std::vector<Statistic> statistics{Statistic::cg_residual};
  Index kmax = 10;
  Index trials = 1000;
  std::uint64_t seed = 0;
  /// Halting tolerance on the norm; the histogram records the first k with
  /// statistic < eps^2.
  std::optional<double> eps;
  SimulationMode mode = SimulationMode::full_matrix;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned jobs = 0;
  double budget_flops = 2e12;
  bool keep_samples = false;

  /// Throws std::invalid_argument for inconsistent settings.
  void validate() const;
  /// Rough floating-point operation count of the whole run.
  double estimated_flops() const;
};

/// Key-value form shared by output files and the CLI config file.
std::vector<std::pair<std::string, std::string>> config_to_pairs(const ExperimentConfig& config);
/// Applies recognised keys on top of `base`; unknown keys throw.
ExperimentConfig config_from_pairs(const std::map<std::string, std::string>& pairs, ExperimentConfig base = {});

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(double estimate, double budget);
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// A solver or sampler failure inside one trial.
class TrialFailure : public std::runtime_error {
 public:
  TrialFailure(Index trial, const std::string& what);
  Index trial() const noexcept { return trial_; }

 private:
  Index trial_;
};

struct SummaryRow {
  Statistic statistic = Statistic::cg_residual;
  Index k = 0;
  /// Mean of the traced squared norm.
  double sample_mean = 0.0;
  double predicted_mean = 0.0;
  /// Sample variance of sqrt(M) (norm / <norm> - 1), centred at the sample mean.
  double rescaled_var = 0.0;
  double predicted_rescaled_var = 0.0;
  double standard_error = 0.0;
  Index trials = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct HaltingRow {
  Statistic statistic = Statistic::cg_residual;
  /// -1 when the run never crossed the tolerance.
  Index halt_k = 0;
  Index count = 0;

  friend bool operator==(const HaltingRow&, const HaltingRow&) = default;
};

struct SummaryTable {
  ExperimentConfig config;
  std::vector<SummaryRow> rows;
  std::vector<HaltingRow> halting;
  /// [statistic][k][trial] squared norms, when config.keep_samples is set.
  std::optional<std::vector<std::vector<std::vector<double>>>> samples;

  /// Squared-norm samples of one statistic at iteration k.
  const std::vector<double>& samples_of(Statistic s, Index k) const;
  double halting_fraction(Statistic s, Index halt_k) const;
};

/// Runs the Monte Carlo experiment. Trial t draws from RngStream(seed, t),
/// so the result is identical for any number of workers.
SummaryTable run_experiment(const ExperimentConfig& config);

struct GaussianityReport {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  /// KS distance of (x - mean) / sd from the standard normal.
  double ks_standardized = 0.0;
  /// KS distance of (x - mean) / sqrt(predicted) from the standard normal.
  std::optional<double> ks_predicted;
};

/// Needs at least 1e4 samples; throws std::invalid_argument on constant data.
GaussianityReport gaussianity_check(std::span<const double> samples,
                                    std::optional<double> predicted_variance = std::nullopt);

void emit_csv(const SummaryTable& table, std::ostream& out);
void emit_json(const SummaryTable& table, std::ostream& out);
/// Writes to `path`; the format follows `format` ("csv" or "json").
void emit(const SummaryTable& table, const std::string& format, const std::string& path);

/// Inverses of the emitters for the summary and halting rows plus the config.
SummaryTable parse_csv(std::istream& in);
SummaryTable parse_json(std::istream& in);

}  // namespace krylov
