#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "krylov/chimodel.hpp"
#include "krylov/harness.hpp"
#include "krylov/solvers.hpp"
#include "krylov/theory.hpp"

namespace {

using namespace krylov;

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_runtime = 2;

// Keys shared by flags and the --config file.
const std::vector<std::string> config_keys{"ensemble", "beta", "n",    "m",    "b",    "alg",   "kmax",
                                           "trials",   "eps",  "seed", "mode", "jobs", "budget"};

struct CommandLine {
  std::map<std::string, std::string> flags;
  std::string config_path;
  std::string out;
  std::string format = "csv";
  double d = 0.5;
  std::optional<Index> k;
};

void add_config_flags(CLI::App* cmd, CommandLine& cl) {
  const std::map<std::string, std::string> help{
      {"ensemble", "wishart | mm4 | bernoulli (comma list for table1)"},
      {"beta", "1 (real) or 2 (complex)"},
      {"n", "rows N"},
      {"m", "columns M"},
      {"b", "right-hand side: e1 | random"},
      {"alg", "cg | cg-error | minres | cgne (comma list allowed)"},
      {"kmax", "last iteration recorded"},
      {"trials", "number of Monte Carlo trials"},
      {"eps", "halting tolerance on the norm"},
      {"seed", "master seed"},
      {"mode", "full | chi"},
      {"jobs", "worker threads (0 = all cores)"},
      {"budget", "flop budget for full-matrix runs"},
  };
  for (const auto& key : config_keys) cmd->add_option("--" + key, cl.flags[key], help.at(key));
  cmd->add_option("--config", cl.config_path, "key=value file; flags override it");
  cmd->add_option("--out", cl.out, "output path (stdout when omitted)");
  cmd->add_option("--format", cl.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::map<std::string, std::string> pairs;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    pairs[key] = value;
  }
  return pairs;
}

// Reference defaults (d = 1/2, b = e1, beta = 1), overlaid by the
// config file and then by explicit flags.
ExperimentConfig resolve_config(CLI::App* cmd, const CommandLine& cl, std::map<std::string, std::string> defaults = {}) {
  ExperimentConfig base;
  std::map<std::string, std::string> pairs = std::move(defaults);
  if (!cl.config_path.empty()) {
    for (const auto& [k, v] : read_config_file(cl.config_path)) pairs[k] = v;
  }
  for (const auto& key : config_keys) {
    if (cmd->count("--" + key) > 0) pairs[key] = cl.flags.at(key);
  }
  return config_from_pairs(pairs, base);
}

void echo_config(const ExperimentConfig& c, std::ostream& out) {
  for (const auto& [key, value] : config_to_pairs(c)) out << "# " << key << '=' << value << '\n';
}

// Writes either to the named file or to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Scalar>
Matrix<Scalar> entries_of(const DataMatrix& x) {
  if constexpr (std::is_same_v<Scalar, double>) return x.real_entries();
  else return x.complex_entries();
}

// solve: one instance, per-iteration trace next to the bidiagonal predictions.
template <typename Scalar>
int solve_instance(const ExperimentConfig& c, std::ostream& out) {
  RngStream rng(c.seed, 0);
  const Matrix<Scalar> x = entries_of<Scalar>(sample_data_matrix(c.ensemble, rng));
  const Index n = c.ensemble.n;
  const Vector<Scalar> b = make_rhs<Scalar>(c.rhs, n, rng);
  const Matrix<Scalar> w = x * x.adjoint();
  const Vector<Scalar> x_true = w.llt().solve(b);
  const LinearOperator<Scalar> op = gram_operator(x);
  const BidiagonalFactor h = lanczos_factor<Scalar>(op, b, n);

  echo_config(c, out);
  out << "algorithm,k,value,predicted\n";
  for (Statistic s : c.statistics) {
    std::vector<double> values, predicted;
    switch (s) {
      case Statistic::cg_residual:
      case Statistic::cg_error: {
        const SolveTrace tr = cg_solve<Scalar>(op, b, c.kmax, 0.0, &x_true);
        values = s == Statistic::cg_residual ? tr.r2sq : *tr.ewsq;
        predicted = s == Statistic::cg_residual ? predicted_cg_residuals(h, c.kmax)
                                                : predicted_cg_errors(h, std::min(c.kmax, n - 1));
        for (double& p : predicted) p *= p;
        break;
      }
      case Statistic::minres_residual: {
        values = minres_solve<Scalar>(op, b, c.kmax, 0.0).r2sq;
        for (double p : predicted_minres_residuals(h, c.kmax).norms) predicted.push_back(p * p);
        break;
      }
      case Statistic::cgne_error:
      case Statistic::cgne_relative: {
        const Vector<Scalar> b_m = make_rhs<Scalar>(c.rhs, c.ensemble.m, rng);
        values = *cg_normal_equations<Scalar>(x, b_m, c.kmax, 0.0).ewsq;
        for (double p : predicted_cgne_errors(normal_equations_measure<Scalar>(x, b_m), c.kmax)) {
          predicted.push_back(p * p);
        }
        if (s == Statistic::cgne_relative) {
          const double v0 = values.front(), p0 = predicted.front();
          for (double& v : values) v /= v0;
          for (double& p : predicted) p /= p0;
        }
        break;
      }
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
      out << to_string(s) << ',' << k << ',' << fmt(values[k]) << ','
          << (k < predicted.size() ? fmt(predicted[k]) : "nan") << '\n';
    }
  }
  return exit_ok;
}

int run_solve(CLI::App* cmd, const CommandLine& cl) {
  ExperimentConfig c = resolve_config(cmd, cl, {{"n", "50"}, {"m", "100"}, {"trials", "1"}});
  c.trials = 1;
  c.validate();
  Output out(cl.out);
  return c.ensemble.beta.is_complex() ? solve_instance<Complex>(c, out.stream()) : solve_instance<double>(c, out.stream());
}

// sample: chi-model statistics per trial in chi mode, matrix entries otherwise.
int run_sample(CLI::App* cmd, const CommandLine& cl) {
  ExperimentConfig c = resolve_config(cmd, cl, {{"n", "50"}, {"m", "100"}, {"trials", "1"}});
  c.validate();
  Output out(cl.out);
  std::ostream& os = out.stream();
  echo_config(c, os);
  if (c.mode == SimulationMode::chi_model) {
    os << "trial,k,cg_r2sq,cg_ewsq,minres_r2sq,cgne_relative_ewsq,sigma_inv,delta_nm\n";
    for (Index t = 0; t < c.trials; ++t) {
      RngStream rng(c.seed, static_cast<std::uint64_t>(t));
      const ChiModelDraw d = draw_chi_model(c.ensemble.n, c.ensemble.m, c.ensemble.beta, c.kmax, rng);
      for (Index k = 0; k <= c.kmax; ++k) {
        os << t << ',' << k << ',' << fmt(d.cg_r2sq[k]) << ',' << fmt(d.cg_ewsq[k]) << ',' << fmt(d.minres_r2sq[k])
           << ',' << fmt(d.cgne_relative_ewsq[k]) << ',' << fmt(d.sigma_inv) << ',' << fmt(d.delta_nm) << '\n';
      }
    }
    return exit_ok;
  }
  os << (c.ensemble.beta.is_complex() ? "trial,i,j,re,im\n" : "trial,i,j,value\n");
  for (Index t = 0; t < c.trials; ++t) {
    RngStream rng(c.seed, static_cast<std::uint64_t>(t));
    const DataMatrix x = sample_data_matrix(c.ensemble, rng);
    x.visit([&](const auto& e) {
      for (Index i = 0; i < e.rows(); ++i) {
        for (Index j = 0; j < e.cols(); ++j) {
          os << t << ',' << i << ',' << j << ',';
          if constexpr (std::is_same_v<std::decay_t<decltype(e)>, Matrix<Complex>>) {
            os << fmt(e(i, j).real()) << ',' << fmt(e(i, j).imag()) << '\n';
          } else {
            os << fmt(e(i, j)) << '\n';
          }
        }
      }
    });
  }
  return exit_ok;
}

struct VerifyErrors {
  double cg_residual = 0.0;
  double cg_error = 0.0;
  double minres = 0.0;
  Index compared = 0;
};

template <typename Scalar>
void verify_instance(const EnsembleSpec& spec, RhsKind rhs, std::uint64_t seed, std::uint64_t stream,
                     VerifyErrors& err) {
  RngStream rng(seed, stream);
  const Matrix<Scalar> x = entries_of<Scalar>(sample_data_matrix(spec, rng));
  const Vector<Scalar> b = make_rhs<Scalar>(rhs, spec.n, rng);
  const Matrix<Scalar> w = x * x.adjoint();
  const Vector<Scalar> x_true = w.llt().solve(b);
  const LinearOperator<Scalar> op = [&w](const Vector<Scalar>& in, Vector<Scalar>& y) { y.noalias() = w * in; };
  const Index kmax = spec.n - 1;
  const SolveTrace cg = cg_solve<Scalar>(op, b, kmax, 0.0, &x_true);
  const SolveTrace mr = minres_solve<Scalar>(op, b, kmax, 0.0);
  const BidiagonalFactor h = lanczos_factor<Scalar>(op, b, spec.n);
  const auto pr = predicted_cg_residuals(h, kmax);
  const auto pe = predicted_cg_errors(h, kmax);
  const auto pm = predicted_minres_residuals(h, kmax).norms;
  auto rel = [](double got, double want) { return std::abs(got - want) / want; };
  for (std::size_t k = 0; k < cg.r2sq.size() && k < pr.size() && pr[k] > 1e-6; ++k) {
    err.cg_residual = std::max(err.cg_residual, rel(std::sqrt(cg.r2sq[k]), pr[k]));
    err.cg_error = std::max(err.cg_error, rel(std::sqrt((*cg.ewsq)[k]), pe[k]));
    ++err.compared;
  }
  for (std::size_t k = 0; k < mr.r2sq.size() && k < pm.size() && pm[k] > 1e-6; ++k) {
    err.minres = std::max(err.minres, rel(std::sqrt(mr.r2sq[k]), pm[k]));
    ++err.compared;
  }
}

int run_verify(CLI::App* cmd, const CommandLine& cl) {
  ExperimentConfig c = resolve_config(cmd, cl, {{"n", "50"}, {"m", "100"}, {"trials", "10"}});
  c.validate();
  std::vector<EnsembleKind> kinds{c.ensemble.kind};
  if (cmd->count("--ensemble") == 0 && c.ensemble.beta == BetaField::real()) {
    kinds = {EnsembleKind::gaussian, EnsembleKind::moment_match4};
  }
  echo_config(c, std::cout);
  VerifyErrors err;
  for (Index t = 0; t < c.trials; ++t) {
    for (EnsembleKind kind : kinds) {
      EnsembleSpec spec = c.ensemble;
      spec.kind = kind;
      const auto stream = static_cast<std::uint64_t>(t);
      if (spec.beta.is_complex()) verify_instance<Complex>(spec, c.rhs, c.seed, stream, err);
      else verify_instance<double>(spec, c.rhs, c.seed, stream, err);
    }
  }
  const double worst = std::max({err.cg_residual, err.cg_error, err.minres});
  std::cout << "instances " << c.trials * static_cast<Index>(kinds.size()) << ", iterations compared "
            << err.compared << '\n';
  std::cout << "max relative error cg residual " << fmt(err.cg_residual) << '\n';
  std::cout << "max relative error cg W-norm error " << fmt(err.cg_error) << '\n';
  std::cout << "max relative error minres residual " << fmt(err.minres) << '\n';
  std::cout << "max relative error " << fmt(worst) << (worst < 1e-6 ? " PASS" : " FAIL") << '\n';
  return worst < 1e-6 ? exit_ok : exit_runtime;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + suffix;
  return path.substr(0, dot) + "_" + suffix + path.substr(dot);
}

int run_table1(CLI::App* cmd, const CommandLine& cl) {
  std::vector<std::string> kinds{"wishart", "mm4", "bernoulli"};
  if (cmd->count("--ensemble") > 0) {
    kinds.clear();
    std::stringstream list(cl.flags.at("ensemble"));
    for (std::string item; std::getline(list, item, ',');) kinds.push_back(item);
  }
  std::vector<SummaryTable> tables;
  for (const auto& kind : kinds) {
    CommandLine one = cl;
    one.flags["ensemble"] = kind;
    ExperimentConfig c = resolve_config(cmd, one, {{"kmax", "6"}, {"trials", "1000"}});
    c.ensemble.kind = parse_ensemble_kind(kind);
    c.statistics = {Statistic::cg_residual};
    echo_config(c, std::cout);
    tables.push_back(run_experiment(c));
  }
  std::cout << "k,prediction";
  for (const auto& kind : kinds) std::cout << ',' << kind;
  std::cout << '\n';
  const auto& first = tables.front();
  for (std::size_t i = 1; i < first.rows.size(); ++i) {
    std::cout << first.rows[i].k << ',' << fmt(first.rows[i].predicted_rescaled_var);
    for (const auto& t : tables) std::cout << ',' << fmt(t.rows[i].rescaled_var);
    std::cout << '\n';
  }
  if (!cl.out.empty()) {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      emit(tables[i], cl.format, kinds.size() == 1 ? cl.out : with_suffix(cl.out, kinds[i]));
    }
  }
  return exit_ok;
}

int run_halting(CLI::App* cmd, const CommandLine& cl) {
  ExperimentConfig c =
      resolve_config(cmd, cl, {{"eps", "1e-3"}, {"alg", "cg_residual,minres_residual"}, {"kmax", "1"}});
  c.validate();
  echo_config(c, std::cout);
  const SummaryTable t = run_experiment(c);
  const double d = c.ensemble.aspect_ratio();
  std::cout << "algorithm,halt_k,count,fraction,predicted\n";
  for (const auto& h : t.halting) {
    std::string predicted = "n/a";
    if (d < 1.0 && h.statistic != Statistic::cgne_error && h.statistic != Statistic::cgne_relative) {
      const HaltingPrediction p = halting_prediction(h.statistic, d, *c.eps);
      predicted = std::to_string(p.iterations) + (p.boundary ? " (boundary)" : "");
    }
    std::cout << to_string(h.statistic) << ',' << h.halt_k << ',' << h.count << ','
              << fmt(static_cast<double>(h.count) / static_cast<double>(c.trials)) << ',' << predicted << '\n';
  }
  if (!cl.out.empty()) emit(t, cl.format, cl.out);
  return exit_ok;
}

int run_predict(CLI::App* cmd, const CommandLine& cl) {
  const std::string alg = cmd->count("--alg") > 0 ? cl.flags.at("alg") : "cg-residual";
  const Statistic s = parse_statistic(alg);
  const double d = cl.d;
  std::cerr << "# alg=" << to_string(s) << "\n# d=" << fmt(d) << '\n';
  if (cmd->count("--eps") > 0) {
    const double eps = std::stod(cl.flags.at("eps"));
    std::cerr << "# eps=" << fmt(eps) << '\n';
    const HaltingPrediction p = halting_prediction(s, d, eps);
    std::cout << p.iterations << '\n';
    if (p.boundary) std::cerr << "# eps on the lattice: the limit splits between " << p.iterations << " and "
                              << p.iterations + 1 << '\n';
    return exit_ok;
  }
  const Index kmax = cl.k.value_or(10);
  std::cerr << "# k=" << kmax << '\n';
  const int beta = cmd->count("--beta") > 0 ? std::stoi(cl.flags.at("beta")) : 1;
  std::cout << "k,leading_order,fluctuation_variance,rescaled_variance\n";
  for (Index k = cl.k ? kmax : 0; k <= kmax; ++k) {
    auto guarded = [](auto f) {
      try {
        return fmt(f());
      } catch (const std::domain_error&) {
        return std::string("nan");
      }
    };
    std::cout << k << ',' << guarded([&] { return leading_order(s, d, k); }) << ','
              << guarded([&] { return fluctuation_variance(s, d, k); }) << ','
              << guarded([&] { return rescaled_variance_prediction(s, d, k, BetaField(beta)); }) << '\n';
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-matrix experiments for CG, MINRES and CG on the normal equations"};
  app.require_subcommand(1);
  CommandLine cl;

  auto* solve = app.add_subcommand("solve", "one instance: solver trace next to its bidiagonal prediction");
  auto* sample = app.add_subcommand("sample", "ensemble draws (matrix entries, or chi-model statistics with --mode chi)");
  auto* verify = app.add_subcommand("verify", "check solver traces against the bidiagonal formulas");
  auto* table1 = app.add_subcommand("table1", "rescaled CG residual variances per ensemble");
  auto* halting = app.add_subcommand("halting", "halting-time histogram with its prediction");
  auto* predict = app.add_subcommand("predict", "closed-form limits, variances and halting times");
  for (auto* cmd : {solve, sample, verify, table1, halting, predict}) add_config_flags(cmd, cl);
  predict->add_option("--d", cl.d, "aspect ratio N/M");
  predict->add_option("--k", cl.k, "iteration (a table up to 10 without it)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << app.help();
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (*solve) return run_solve(solve, cl);
    if (*sample) return run_sample(sample, cl);
    if (*verify) return run_verify(verify, cl);
    if (*table1) return run_table1(table1, cl);
    if (*halting) return run_halting(halting, cl);
    if (*predict) return run_predict(predict, cl);
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const TrialFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_runtime;
}
