#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "krylov/harness.hpp"
#include "krylov/stats.hpp"

using namespace krylov;

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

void check_same_rows(const std::vector<SummaryRow>& a, const std::vector<SummaryRow>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].statistic == b[i].statistic);
    CHECK(a[i].k == b[i].k);
    CHECK(same(a[i].sample_mean, b[i].sample_mean));
    CHECK(same(a[i].predicted_mean, b[i].predicted_mean));
    CHECK(same(a[i].rescaled_var, b[i].rescaled_var));
    CHECK(same(a[i].predicted_rescaled_var, b[i].predicted_rescaled_var));
    CHECK(same(a[i].standard_error, b[i].standard_error));
    CHECK(a[i].trials == b[i].trials);
  }
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.ensemble = {EnsembleKind::gaussian, 40, 80, BetaField::real()};
  c.statistics = {Statistic::cg_residual, Statistic::cg_error, Statistic::minres_residual, Statistic::cgne_relative};
  c.kmax = 6;
  c.trials = 200;
  c.seed = 99;
  c.eps = 1e-2;
  c.jobs = 1;
  return c;
}

const SummaryRow& row_of(const SummaryTable& t, Statistic s, Index k) {
  for (const auto& r : t.rows)
    if (r.statistic == s && r.k == k) return r;
  throw std::out_of_range("row not found");
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.mode = SimulationMode::chi_model;
  c.ensemble.kind = EnsembleKind::bernoulli;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.mode = SimulationMode::chi_model;
  c.kmax = 40;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.statistics = {Statistic::cg_residual, Statistic::cg_residual};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.eps = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.ensemble.n = 100;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config key-value round trip") {
  ExperimentConfig c = small_config();
  c.ensemble.kind = EnsembleKind::moment_match4;
  c.rhs = RhsKind::random_unit;
  c.budget_flops = 1.25e11;
  std::map<std::string, std::string> pairs;
  for (const auto& [k, v] : config_to_pairs(c)) pairs[k] = v;
  const ExperimentConfig back = config_from_pairs(pairs);
  CHECK(back.ensemble.kind == c.ensemble.kind);
  CHECK(back.ensemble.n == c.ensemble.n);
  CHECK(back.rhs == c.rhs);
  CHECK(back.statistics == c.statistics);
  CHECK(back.eps == c.eps);
  CHECK(back.seed == c.seed);
  CHECK(back.budget_flops == c.budget_flops);
  CHECK_THROWS_AS(config_from_pairs({{"colour", "red"}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_pairs({{"n", "ten"}}), std::invalid_argument);
}

TEST_CASE("budget guard") {
  ExperimentConfig c = small_config();
  c.budget_flops = 1e3;
  CHECK_THROWS_AS(run_experiment(c), BudgetExceeded);
  c.mode = SimulationMode::chi_model;
  c.budget_flops = 1e9;
  CHECK_NOTHROW(run_experiment(c));
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentConfig c = small_config();
  const SummaryTable one = run_experiment(c);
  c.jobs = 3;
  const SummaryTable three = run_experiment(c);
  check_same_rows(one.rows, three.rows);
  CHECK(one.halting == three.halting);
  c.seed = 100;
  CHECK(run_experiment(c).rows[1].sample_mean != one.rows[1].sample_mean);
}

TEST_CASE("summary statistics are computed from the samples") {
  ExperimentConfig c = small_config();
  c.keep_samples = true;
  const SummaryTable t = run_experiment(c);
  for (Statistic s : c.statistics) {
    Index total = 0;
    for (const auto& h : t.halting)
      if (h.statistic == s) total += h.count;
    CHECK(total == c.trials);
  }
  const auto& xs = t.samples_of(Statistic::cg_residual, 3);
  const SampleMoments mom = sample_moments(xs);
  const SummaryRow& row = row_of(t, Statistic::cg_residual, 3);
  CHECK(row.sample_mean == doctest::Approx(mom.mean).epsilon(1e-14));
  CHECK(row.standard_error == doctest::Approx(std::sqrt(mom.variance / c.trials)).epsilon(1e-12));
  std::vector<double> norms;
  for (double v : xs) norms.push_back(std::sqrt(v));
  const double mean_norm = sample_moments(norms).mean;
  for (double& v : norms) v = std::sqrt(80.0) * (v / mean_norm - 1.0);
  CHECK(row.rescaled_var == doctest::Approx(sample_moments(norms).variance).epsilon(1e-12));
  CHECK(row.predicted_mean == doctest::Approx(0.125));
  CHECK(row.predicted_rescaled_var == doctest::Approx(4.5));
  CHECK(row_of(t, Statistic::cgne_relative, 0).sample_mean == 1.0);
  CHECK(std::isnan(row_of(t, Statistic::cg_residual, 0).predicted_rescaled_var));
  CHECK(row_of(t, Statistic::cg_residual, 0).rescaled_var == 0.0);
  CHECK(row_of(t, Statistic::cg_error, 0).predicted_mean == doctest::Approx(2.0));
}

TEST_CASE("halting histogram matches the first crossing in each trace") {
  ExperimentConfig c = small_config();
  c.keep_samples = true;
  c.kmax = 30;
  c.eps = 1e-3;
  for (SimulationMode mode : {SimulationMode::full_matrix, SimulationMode::chi_model}) {
    c.mode = mode;
    if (mode == SimulationMode::chi_model) c.statistics = {Statistic::cg_residual, Statistic::minres_residual};
    const SummaryTable t = run_experiment(c);
    for (Statistic s : c.statistics) {
      std::map<Index, Index> expected;
      for (Index trial = 0; trial < c.trials; ++trial) {
        Index halt = -1;
        for (Index k = 0; k <= c.kmax; ++k) {
          if (t.samples_of(s, k)[trial] < 1e-6) {
            halt = k;
            break;
          }
        }
        ++expected[halt];
      }
      CHECK(expected.count(-1) == 0);
      for (const auto& h : t.halting)
        if (h.statistic == s) CHECK(expected[h.halt_k] == h.count);
    }
  }
}

TEST_CASE("halting continues past kmax") {
  ExperimentConfig c = small_config();
  c.kmax = 2;
  c.eps = 1e-4;
  c.statistics = {Statistic::cg_residual, Statistic::minres_residual};
  for (SimulationMode mode : {SimulationMode::full_matrix, SimulationMode::chi_model}) {
    c.mode = mode;
    const SummaryTable t = run_experiment(c);
    for (const auto& h : t.halting) CHECK(h.halt_k > 2);
  }
}

TEST_CASE("full-matrix and chi-model summaries agree in law") {
  ExperimentConfig c;
  c.ensemble = {EnsembleKind::gaussian, 250, 500, BetaField::real()};
  c.statistics = {Statistic::cg_residual, Statistic::minres_residual};
  c.kmax = 5;
  c.trials = 10000;
  c.seed = 5;
  const SummaryTable full = run_experiment(c);
  c.mode = SimulationMode::chi_model;
  const SummaryTable chi = run_experiment(c);
  for (std::size_t i = 0; i < full.rows.size(); ++i) {
    if (full.rows[i].k == 0) continue;
    const double se = std::hypot(full.rows[i].standard_error, chi.rows[i].standard_error);
    CAPTURE(i);
    CHECK(std::abs(full.rows[i].sample_mean - chi.rows[i].sample_mean) < 4.0 * se);
  }
}

TEST_CASE("fourth-moment matching controls the fluctuation variance") {
  ExperimentConfig c;
  c.ensemble = {EnsembleKind::gaussian, 100, 200, BetaField::real()};
  c.kmax = 1;
  c.trials = 20000;
  c.seed = 6;
  c.keep_samples = true;
  auto rescaled = [&](EnsembleKind kind) {
    c.ensemble.kind = kind;
    const SummaryTable t = run_experiment(c);
    const SummaryRow& row = row_of(t, Statistic::cg_residual, 1);
    // Standard error of a sample variance from the sample kurtosis of the rescaled values.
    std::vector<double> norms;
    for (double v : t.samples_of(Statistic::cg_residual, 1)) norms.push_back(std::sqrt(v));
    const double kurt = sample_moments(norms).kurtosis;
    return std::pair{row.rescaled_var, row.rescaled_var * std::sqrt((kurt - 1.0) / c.trials)};
  };
  const auto [g, g_se] = rescaled(EnsembleKind::gaussian);
  const auto [mm, mm_se] = rescaled(EnsembleKind::moment_match4);
  const auto [bern, bern_se] = rescaled(EnsembleKind::bernoulli);
  CHECK(std::abs(g - mm) < 4.0 * std::hypot(g_se, mm_se));
  CHECK(std::abs(g - bern) > 10.0 * std::hypot(g_se, bern_se));
  CHECK(g == doctest::Approx(1.5).epsilon(0.05));
  CHECK(bern == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("trial failures carry the trial index") {
  ExperimentConfig c;
  // 2 x 2 sign matrices are singular half the time.
  c.ensemble = {EnsembleKind::bernoulli, 2, 2, BetaField::real()};
  c.statistics = {Statistic::cg_error};
  c.kmax = 2;
  c.trials = 50;
  c.jobs = 1;
  Index first = -1;
  try {
    run_experiment(c);
  } catch (const TrialFailure& e) {
    first = e.trial();
  }
  REQUIRE(first >= 0);
  c.jobs = 4;
  try {
    run_experiment(c);
    FAIL("expected a trial failure");
  } catch (const TrialFailure& e) {
    CHECK(e.trial() == first);
  }
}

TEST_CASE("gaussianity check") {
  RngStream rng(8, 0);
  std::vector<double> z(100000);
  for (double& v : z) v = rng.normal();
  const auto report = gaussianity_check(z, 1.0);
  CHECK(report.ks_standardized < 0.005);
  REQUIRE(report.ks_predicted);
  CHECK(*report.ks_predicted < 0.005);
  CHECK(report.kurtosis == doctest::Approx(3.0).epsilon(0.02));
  CHECK_THROWS_AS(gaussianity_check(std::vector<double>(20000, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(gaussianity_check(std::vector<double>(z.begin(), z.begin() + 100)), std::invalid_argument);
}

TEST_CASE("CSV and JSON emission round trip") {
  ExperimentConfig c = small_config();
  const SummaryTable t = run_experiment(c);

  std::ostringstream csv;
  emit_csv(t, csv);
  const std::string text = csv.str();
  CHECK(text.find("algorithm,k,sample_mean,predicted_mean,rescaled_var,predicted_rescaled_var,stderr,trials\n") !=
        std::string::npos);
  CHECK(text.find("\nalgorithm,halt_k,count\n") != std::string::npos);
  CHECK(text.find("# seed=99\n") != std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
  std::istringstream csv_in(text);
  const SummaryTable back = parse_csv(csv_in);
  check_same_rows(back.rows, t.rows);
  CHECK(back.halting == t.halting);
  CHECK(back.config.seed == 99);
  CHECK(back.config.statistics == c.statistics);

  std::ostringstream json;
  emit_json(t, json);
  const auto doc = nlohmann::json::parse(json.str());
  CHECK(doc.at("config").at("seed").get<std::uint64_t>() == 99);
  std::istringstream json_in(json.str());
  const SummaryTable jback = parse_json(json_in);
  check_same_rows(jback.rows, t.rows);
  CHECK(jback.halting == t.halting);

  SummaryTable empty;
  std::ostringstream header_only;
  emit_csv(empty, header_only);
  std::string last;
  std::istringstream lines(header_only.str());
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("# ", 0) != 0) last += line + "\n";
  }
  CHECK(last == "algorithm,k,sample_mean,predicted_mean,rescaled_var,predicted_rescaled_var,stderr,trials\n");

  CHECK_THROWS_AS(emit(t, "xml", "/tmp/never.xml"), std::invalid_argument);
  CHECK_THROWS(emit(t, "csv", "/nonexistent-dir/out.csv"));
}
