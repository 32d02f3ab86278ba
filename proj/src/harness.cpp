#include "krylov/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "krylov/chimodel.hpp"
#include "krylov/solvers.hpp"
#include "krylov/stats.hpp"

namespace krylov {

namespace {

constexpr double not_available = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  // stod rejects "nan" on some libraries' out_of_range paths; handle it directly.
  if (used == 0 && (text == "nan" || text == "-nan")) return not_available;
  if (used != text.size()) throw std::invalid_argument(std::string("bad number for ") + what + ": '" + text + "'");
  return v;
}

template <typename Int>
Int parse_integer(const std::string& text, const char* what) {
  Int v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw std::invalid_argument(std::string("bad integer for ") + what + ": '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

bool solver_statistic_needs_cg(Statistic s) { return s == Statistic::cg_residual || s == Statistic::cg_error; }
bool is_cgne(Statistic s) { return s == Statistic::cgne_error || s == Statistic::cgne_relative; }

// Values of one statistic for k = 0..kmax plus its halting time.
struct StatisticTrace {
  std::vector<double> values;
  Index halt = -1;
};

Index first_below(const std::vector<double>& values, std::optional<double> eps) {
  if (!eps) return -1;
  const double threshold = *eps * *eps;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] < threshold) return static_cast<Index>(k);
  }
  return -1;
}

StatisticTrace finish_trace(std::vector<double> full, Index kmax, std::optional<double> eps) {
  StatisticTrace out;
  out.halt = first_below(full, eps);
  full.resize(static_cast<std::size_t>(kmax + 1), 0.0);  // exact convergence pads with zeros
  out.values = std::move(full);
  return out;
}

// Keeps a solver running past kmax until every watched sequence has dipped
// below eps^2 at least once.
IterationObserver halting_observer(Index kmax, std::optional<double> eps,
                                   std::vector<std::function<double(const SolveTrace&)>> watched) {
  if (!eps) return {};
  const double threshold = *eps * *eps;
  auto crossed = std::make_shared<std::vector<bool>>(watched.size(), false);
  return [=](Index k, const SolveTrace& trace) {
    bool all = true;
    for (std::size_t i = 0; i < watched.size(); ++i) {
      if (!(*crossed)[i] && watched[i](trace) < threshold) (*crossed)[i] = true;
      all = all && (*crossed)[i];
    }
    return !(k >= kmax && all);
  };
}

Index iteration_cap(const ExperimentConfig& c) {
  return c.eps ? std::max(c.kmax, 4 * c.ensemble.n) : c.kmax;
}

template <typename Scalar>
std::vector<StatisticTrace> full_matrix_trial(const ExperimentConfig& c, RngStream& rng, Matrix<Scalar>& x) {
  fill_data_matrix(c.ensemble, rng, x);
  const Index n = c.ensemble.n;
  const Index cap = iteration_cap(c);
  const auto& stats = c.statistics;
  auto wants = [&](Statistic s) { return std::find(stats.begin(), stats.end(), s) != stats.end(); };

  std::map<Statistic, StatisticTrace> found;
  const bool run_cg = wants(Statistic::cg_residual) || wants(Statistic::cg_error);
  const bool run_minres = wants(Statistic::minres_residual);
  const bool run_cgne = wants(Statistic::cgne_error) || wants(Statistic::cgne_relative);

  const Vector<Scalar> b = make_rhs<Scalar>(c.rhs, n, rng);
  const LinearOperator<Scalar> op = gram_operator(x);

  if (run_cg) {
    std::optional<Vector<Scalar>> x_true;
    if (wants(Statistic::cg_error)) {
      const Matrix<Scalar> w = x * x.adjoint();
      Eigen::LLT<Matrix<Scalar>> chol(w);
      if (chol.info() != Eigen::Success) throw NotPositiveDefinite("sampled W is not positive definite", 0);
      x_true = chol.solve(b);
    }
    std::vector<std::function<double(const SolveTrace&)>> watched;
    if (wants(Statistic::cg_residual)) watched.emplace_back([](const SolveTrace& t) { return t.r2sq.back(); });
    if (wants(Statistic::cg_error)) watched.emplace_back([](const SolveTrace& t) { return t.ewsq->back(); });
    const SolveTrace tr = cg_solve<Scalar>(op, b, cap, 0.0, x_true ? &*x_true : nullptr, nullptr,
                                           halting_observer(c.kmax, c.eps, watched));
    if (wants(Statistic::cg_residual)) found[Statistic::cg_residual] = finish_trace(tr.r2sq, c.kmax, c.eps);
    if (wants(Statistic::cg_error)) found[Statistic::cg_error] = finish_trace(*tr.ewsq, c.kmax, c.eps);
  }
  if (run_minres) {
    const SolveTrace tr = minres_solve<Scalar>(op, b, cap, 0.0, nullptr,
                                               halting_observer(c.kmax, c.eps, {[](const SolveTrace& t) {
                                                                  return t.r2sq.back();
                                                                }}));
    found[Statistic::minres_residual] = finish_trace(tr.r2sq, c.kmax, c.eps);
  }
  if (run_cgne) {
    const Vector<Scalar> b_m = make_rhs<Scalar>(c.rhs, c.ensemble.m, rng);
    std::vector<std::function<double(const SolveTrace&)>> watched;
    if (wants(Statistic::cgne_error)) watched.emplace_back([](const SolveTrace& t) { return t.ewsq->back(); });
    if (wants(Statistic::cgne_relative)) {
      watched.emplace_back([](const SolveTrace& t) { return t.ewsq->back() / t.ewsq->front(); });
    }
    const SolveTrace tr = cg_normal_equations<Scalar>(x, b_m, cap, 0.0, halting_observer(c.kmax, c.eps, watched));
    if (wants(Statistic::cgne_error)) found[Statistic::cgne_error] = finish_trace(*tr.ewsq, c.kmax, c.eps);
    if (wants(Statistic::cgne_relative)) {
      std::vector<double> rel = *tr.ewsq;
      const double e0 = rel.front();
      for (double& v : rel) v /= e0;
      found[Statistic::cgne_relative] = finish_trace(std::move(rel), c.kmax, c.eps);
    }
  }

  std::vector<StatisticTrace> out;
  for (Statistic s : stats) out.push_back(found.at(s));
  return out;
}

std::vector<StatisticTrace> chi_model_trial(const ExperimentConfig& c, Index trial) {
  const Index longest = c.ensemble.n - 1;
  Index depth = c.eps ? std::min(longest, std::max<Index>(c.kmax, 64)) : c.kmax;
  while (true) {
    // Replaying the stream keeps the leading chi pairs; only the draws after them change.
    RngStream rng(c.seed, static_cast<std::uint64_t>(trial));
    const ChiModelDraw d = draw_chi_model(c.ensemble.n, c.ensemble.m, c.ensemble.beta, depth, rng);
    std::vector<StatisticTrace> out;
    bool all_halted = true;
    for (Statistic s : c.statistics) {
      std::vector<double> values;
      switch (s) {
        case Statistic::cg_residual:
          values = d.cg_r2sq;
          break;
        case Statistic::cg_error:
          values = d.cg_ewsq;
          break;
        case Statistic::minres_residual:
          values = d.minres_r2sq;
          break;
        case Statistic::cgne_relative:
          values = d.cgne_relative_ewsq;
          break;
        case Statistic::cgne_error:
          values = d.cgne_relative_ewsq;
          for (double& v : values) v *= d.delta_nm;
          break;
      }
      out.push_back(finish_trace(std::move(values), c.kmax, c.eps));
      all_halted = all_halted && out.back().halt >= 0;
    }
    if (!c.eps || all_halted || depth == longest) return out;
    depth = std::min(longest, 2 * depth);
  }
}

double optional_prediction(const std::function<double()>& f) {
  try {
    return f();
  } catch (const std::domain_error&) {
    return not_available;
  } catch (const std::invalid_argument&) {
    return not_available;
  }
}

}  // namespace

std::string_view to_string(SimulationMode mode) {
  return mode == SimulationMode::full_matrix ? "full_matrix" : "chi_model";
}

SimulationMode parse_simulation_mode(std::string_view name) {
  if (name == "full_matrix" || name == "full") return SimulationMode::full_matrix;
  if (name == "chi_model" || name == "chi") return SimulationMode::chi_model;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(RhsKind kind) {
  switch (kind) {
    case RhsKind::first_basis:
      return "e1";
    case RhsKind::random_unit:
      return "random";
    case RhsKind::explicit_vector:
      return "explicit";
  }
  return "unknown";
}

RhsKind parse_rhs_kind(std::string_view name) {
  if (name == "e1" || name == "first_basis") return RhsKind::first_basis;
  if (name == "random" || name == "random_unit") return RhsKind::random_unit;
  throw std::invalid_argument("unknown right-hand side '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  ensemble.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (kmax < 0) throw std::invalid_argument("kmax must be >= 0");
  if (statistics.empty()) throw std::invalid_argument("at least one algorithm is required");
  for (std::size_t i = 0; i < statistics.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (statistics[i] == statistics[j]) throw std::invalid_argument("algorithm listed twice");
    }
  }
  if (eps && !(*eps > 0.0 && *eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (rhs == RhsKind::explicit_vector) throw std::invalid_argument("experiments need an e1 or random right-hand side");
  if (!(budget_flops > 0.0)) throw std::invalid_argument("budget must be positive");
  if (mode == SimulationMode::chi_model) {
    if (ensemble.kind != EnsembleKind::gaussian) {
      throw std::invalid_argument("chi_model mode only describes the Gaussian ensemble");
    }
    if (kmax >= ensemble.n) throw std::invalid_argument("chi_model mode needs kmax < n");
  } else if (kmax > ensemble.n) {
    throw std::invalid_argument("kmax exceeds n; the solvers finish within n steps");
  }
}

double ExperimentConfig::estimated_flops() const {
  const double n = static_cast<double>(ensemble.n);
  const double m = static_cast<double>(ensemble.m);
  const double t = static_cast<double>(trials);
  Index steps = kmax;
  if (eps) {
    const double d = ensemble.aspect_ratio();
    const Index guess = d < 1.0 ? halting_prediction(Statistic::cg_residual, d, *eps).iterations + 2 : ensemble.n;
    steps = std::max(kmax, std::min(guess, ensemble.n));
  }
  const double s = static_cast<double>(steps);
  if (mode == SimulationMode::chi_model) return t * (2.0 * s + 2.0) * 50.0;

  const double field = ensemble.beta.is_complex() ? 4.0 : 1.0;
  double per_trial = 10.0 * n * m * field;
  bool cg = false, minres = false, cgne = false, dense = false;
  for (Statistic st : statistics) {
    cg = cg || solver_statistic_needs_cg(st);
    minres = minres || st == Statistic::minres_residual;
    cgne = cgne || is_cgne(st);
    dense = dense || st == Statistic::cg_error || is_cgne(st);
  }
  const double sweep = 4.0 * n * m * field * s;
  per_trial += (cg ? sweep : 0.0) + (minres ? sweep : 0.0) + (cgne ? sweep : 0.0);
  if (dense) per_trial += field * (2.0 * n * n * m + n * n * n / 3.0);
  return t * per_trial;
}

std::vector<std::pair<std::string, std::string>> config_to_pairs(const ExperimentConfig& c) {
  std::string algs;
  for (Statistic s : c.statistics) {
    if (!algs.empty()) algs += ',';
    algs += to_string(s);
  }
  return {
      {"ensemble", std::string(to_string(c.ensemble.kind))},
      {"beta", std::to_string(c.ensemble.beta.value())},
      {"n", std::to_string(c.ensemble.n)},
      {"m", std::to_string(c.ensemble.m)},
      {"b", std::string(to_string(c.rhs))},
      {"alg", algs},
      {"kmax", std::to_string(c.kmax)},
      {"trials", std::to_string(c.trials)},
      {"eps", c.eps ? format_double(*c.eps) : "none"},
      {"seed", std::to_string(c.seed)},
      {"mode", std::string(to_string(c.mode))},
      {"jobs", std::to_string(c.jobs)},
      {"budget", format_double(c.budget_flops)},
  };
}

ExperimentConfig config_from_pairs(const std::map<std::string, std::string>& pairs, ExperimentConfig base) {
  for (const auto& [key, value] : pairs) {
    if (key == "ensemble") base.ensemble.kind = parse_ensemble_kind(value);
    else if (key == "beta") base.ensemble.beta = BetaField(parse_integer<int>(value, "beta"));
    else if (key == "n") base.ensemble.n = parse_integer<Index>(value, "n");
    else if (key == "m") base.ensemble.m = parse_integer<Index>(value, "m");
    else if (key == "b") base.rhs = parse_rhs_kind(value);
    else if (key == "alg") {
      base.statistics.clear();
      for (const auto& name : split(value, ',')) base.statistics.push_back(parse_statistic(name));
    } else if (key == "kmax") base.kmax = parse_integer<Index>(value, "kmax");
    else if (key == "trials") base.trials = parse_integer<Index>(value, "trials");
    else if (key == "eps") {
      if (value == "none" || value.empty()) base.eps.reset();
      else base.eps = parse_double(value, "eps");
    } else if (key == "seed") base.seed = parse_integer<std::uint64_t>(value, "seed");
    else if (key == "mode") base.mode = parse_simulation_mode(value);
    else if (key == "jobs") base.jobs = parse_integer<unsigned>(value, "jobs");
    else if (key == "budget") base.budget_flops = parse_double(value, "budget");
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  return base;
}

BudgetExceeded::BudgetExceeded(double estimate, double budget)
    : std::runtime_error("estimated " + format_double(estimate) + " flops exceeds the budget of " +
                         format_double(budget) + "; raise --budget or use --mode chi"),
      estimate_(estimate) {}

TrialFailure::TrialFailure(Index trial, const std::string& what)
    : std::runtime_error("trial " + std::to_string(trial) + " failed: " + what), trial_(trial) {}

const std::vector<double>& SummaryTable::samples_of(Statistic s, Index k) const {
  if (!samples) throw std::logic_error("samples were not kept; set keep_samples");
  const auto it = std::find(config.statistics.begin(), config.statistics.end(), s);
  if (it == config.statistics.end()) throw std::out_of_range("statistic not part of this experiment");
  return samples->at(static_cast<std::size_t>(it - config.statistics.begin())).at(static_cast<std::size_t>(k));
}

double SummaryTable::halting_fraction(Statistic s, Index halt_k) const {
  Index total = 0, hit = 0;
  for (const auto& row : halting) {
    if (row.statistic != s) continue;
    total += row.count;
    if (row.halt_k == halt_k) hit += row.count;
  }
  return total > 0 ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

SummaryTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const double estimate = config.estimated_flops();
  if (estimate > config.budget_flops) throw BudgetExceeded(estimate, config.budget_flops);

  const std::size_t stat_count = config.statistics.size();
  const auto len = static_cast<std::size_t>(config.kmax + 1);
  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<std::vector<std::vector<double>>> values(
      stat_count, std::vector<std::vector<double>>(len, std::vector<double>(trials)));
  std::vector<std::vector<Index>> halts(stat_count, std::vector<Index>(trials, -1));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  std::optional<std::pair<Index, std::string>> failure;

  auto worker = [&]() {
    Matrix<double> real_buffer;
    Matrix<Complex> complex_buffer;
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t t = next.fetch_add(1);
      if (t >= trials) break;
      try {
        std::vector<StatisticTrace> traces;
        if (config.mode == SimulationMode::chi_model) {
          traces = chi_model_trial(config, static_cast<Index>(t));
        } else {
          RngStream rng(config.seed, t);
          traces = config.ensemble.beta.is_complex() ? full_matrix_trial(config, rng, complex_buffer)
                                                     : full_matrix_trial(config, rng, real_buffer);
        }
        for (std::size_t s = 0; s < stat_count; ++s) {
          for (std::size_t k = 0; k < len; ++k) values[s][k][t] = traces[s].values[k];
          halts[s][t] = traces[s].halt;
        }
      } catch (const std::exception& e) {
        const std::lock_guard lock(failure_mutex);
        if (!failure || failure->first > static_cast<Index>(t)) failure.emplace(static_cast<Index>(t), e.what());
        failed = true;
      }
    }
  };

  unsigned jobs = config.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.jobs;
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, trials));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) throw TrialFailure(failure->first, failure->second);

  SummaryTable table;
  table.config = config;
  const double d = config.ensemble.aspect_ratio();
  const double root_m = std::sqrt(static_cast<double>(config.ensemble.m));
  for (std::size_t s = 0; s < stat_count; ++s) {
    const Statistic st = config.statistics[s];
    for (std::size_t k = 0; k < len; ++k) {
      const auto& xs = values[s][k];
      const SampleMoments mom = sample_moments(xs);
      SummaryRow row;
      row.statistic = st;
      row.k = static_cast<Index>(k);
      row.trials = config.trials;
      row.sample_mean = mom.mean;
      row.standard_error = trials > 1 ? std::sqrt(mom.variance / static_cast<double>(trials)) : not_available;

      std::vector<double> norms(xs.size());
      std::transform(xs.begin(), xs.end(), norms.begin(), [](double v) { return std::sqrt(v); });
      const double mean_norm = sample_moments(norms).mean;
      if (mean_norm > 0.0 && trials > 1) {
        for (double& v : norms) v = root_m * (v / mean_norm - 1.0);
        row.rescaled_var = sample_moments(norms).variance;
      } else {
        row.rescaled_var = not_available;
      }
      const Index kk = row.k;
      row.predicted_mean = optional_prediction([&] { return leading_order(st, d, kk); });
      row.predicted_rescaled_var =
          optional_prediction([&] { return rescaled_variance_prediction(st, d, kk, config.ensemble.beta); });
      table.rows.push_back(row);
    }
    if (config.eps) {
      std::map<Index, Index> histogram;
      for (Index h : halts[s]) ++histogram[h];
      for (const auto& [k, count] : histogram) table.halting.push_back(HaltingRow{st, k, count});
    }
  }
  if (config.keep_samples) table.samples = std::move(values);
  return table;
}

GaussianityReport gaussianity_check(std::span<const double> samples, std::optional<double> predicted_variance) {
  if (samples.size() < 10000) {
    throw std::invalid_argument("gaussianity_check: needs at least 10000 samples, got " +
                                std::to_string(samples.size()));
  }
  const SampleMoments mom = sample_moments(samples);
  if (!(mom.variance > 0.0)) throw std::invalid_argument("gaussianity_check: degenerate (zero-variance) samples");
  GaussianityReport report;
  report.count = mom.count;
  report.mean = mom.mean;
  report.variance = mom.variance;
  report.skewness = mom.skewness;
  report.kurtosis = mom.kurtosis;
  auto standardized_ks = [&](double sd) {
    std::vector<double> z(samples.begin(), samples.end());
    for (double& v : z) v = (v - mom.mean) / sd;
    return one_sample_ks(z, standard_normal_cdf);
  };
  report.ks_standardized = standardized_ks(std::sqrt(mom.variance));
  if (predicted_variance) {
    if (!(*predicted_variance > 0.0)) throw std::invalid_argument("gaussianity_check: predicted variance must be positive");
    report.ks_predicted = standardized_ks(std::sqrt(*predicted_variance));
  }
  return report;
}

namespace {

constexpr const char* summary_header =
    "algorithm,k,sample_mean,predicted_mean,rescaled_var,predicted_rescaled_var,stderr,trials";
constexpr const char* halting_header = "algorithm,halt_k,count";

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double number_from(const nlohmann::json& j) { return j.is_null() ? not_available : j.get<double>(); }

}  // namespace

void emit_csv(const SummaryTable& table, std::ostream& out) {
  for (const auto& [key, value] : config_to_pairs(table.config)) out << "# " << key << '=' << value << '\n';
  out << summary_header << '\n';
  for (const auto& r : table.rows) {
    out << to_string(r.statistic) << ',' << r.k << ',' << format_double(r.sample_mean) << ','
        << format_double(r.predicted_mean) << ',' << format_double(r.rescaled_var) << ','
        << format_double(r.predicted_rescaled_var) << ',' << format_double(r.standard_error) << ',' << r.trials
        << '\n';
  }
  if (!table.halting.empty()) {
    out << '\n' << halting_header << '\n';
    for (const auto& h : table.halting) out << to_string(h.statistic) << ',' << h.halt_k << ',' << h.count << '\n';
  }
  if (!out) throw std::runtime_error("emit_csv: write failed");
}

void emit_json(const SummaryTable& table, std::ostream& out) {
  nlohmann::ordered_json config;
  for (const auto& [key, value] : config_to_pairs(table.config)) config[key] = value;
  config["seed"] = table.config.seed;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"algorithm", to_string(r.statistic)},
                    {"k", r.k},
                    {"sample_mean", number_or_null(r.sample_mean)},
                    {"predicted_mean", number_or_null(r.predicted_mean)},
                    {"rescaled_var", number_or_null(r.rescaled_var)},
                    {"predicted_rescaled_var", number_or_null(r.predicted_rescaled_var)},
                    {"stderr", number_or_null(r.standard_error)},
                    {"trials", r.trials}});
  }
  nlohmann::ordered_json halting = nlohmann::ordered_json::array();
  for (const auto& h : table.halting) {
    halting.push_back({{"algorithm", to_string(h.statistic)}, {"halt_k", h.halt_k}, {"count", h.count}});
  }
  nlohmann::ordered_json doc;
  doc["config"] = std::move(config);
  doc["rows"] = std::move(rows);
  doc["halting"] = std::move(halting);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("emit_json: write failed");
}

void emit(const SummaryTable& table, const std::string& format, const std::string& path) {
  if (format != "csv" && format != "json") throw std::invalid_argument("unknown format '" + format + "'");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (format == "csv") emit_csv(table, out);
  else emit_json(table, out);
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

SummaryTable parse_csv(std::istream& in) {
  SummaryTable table;
  std::map<std::string, std::string> pairs;
  std::string line;
  enum class Section { preamble, summary, halting } section = Section::preamble;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("parse_csv: malformed config line '" + line + "'");
      pairs[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (line.empty()) continue;
    if (line == summary_header) {
      section = Section::summary;
      continue;
    }
    if (line == halting_header) {
      section = Section::halting;
      continue;
    }
    const auto f = split(line, ',');
    if (section == Section::summary && f.size() == 8) {
      SummaryRow r;
      r.statistic = parse_statistic(f[0]);
      r.k = parse_integer<Index>(f[1], "k");
      r.sample_mean = parse_double(f[2], "sample_mean");
      r.predicted_mean = parse_double(f[3], "predicted_mean");
      r.rescaled_var = parse_double(f[4], "rescaled_var");
      r.predicted_rescaled_var = parse_double(f[5], "predicted_rescaled_var");
      r.standard_error = parse_double(f[6], "stderr");
      r.trials = parse_integer<Index>(f[7], "trials");
      table.rows.push_back(r);
    } else if (section == Section::halting && f.size() == 3) {
      table.halting.push_back(
          HaltingRow{parse_statistic(f[0]), parse_integer<Index>(f[1], "halt_k"), parse_integer<Index>(f[2], "count")});
    } else {
      throw std::invalid_argument("parse_csv: unexpected line '" + line + "'");
    }
  }
  table.config = config_from_pairs(pairs);
  return table;
}

SummaryTable parse_json(std::istream& in) {
  const nlohmann::json doc = nlohmann::json::parse(in);
  SummaryTable table;
  std::map<std::string, std::string> pairs;
  for (const auto& [key, value] : doc.at("config").items()) {
    pairs[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  table.config = config_from_pairs(pairs);
  for (const auto& r : doc.at("rows")) {
    SummaryRow row;
    row.statistic = parse_statistic(r.at("algorithm").get<std::string>());
    row.k = r.at("k").get<Index>();
    row.sample_mean = number_from(r.at("sample_mean"));
    row.predicted_mean = number_from(r.at("predicted_mean"));
    row.rescaled_var = number_from(r.at("rescaled_var"));
    row.predicted_rescaled_var = number_from(r.at("predicted_rescaled_var"));
    row.standard_error = number_from(r.at("stderr"));
    row.trials = r.at("trials").get<Index>();
    table.rows.push_back(row);
  }
  for (const auto& h : doc.at("halting")) {
    table.halting.push_back(HaltingRow{parse_statistic(h.at("algorithm").get<std::string>()),
                                       h.at("halt_k").get<Index>(), h.at("count").get<Index>()});
  }
  return table;
}

}  // namespace krylov
