// ume: command-line front end for the estimators and the experiment harness.

#include <cstdint>
#include <filesystem>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ume/config.hpp"
#include "ume/countable_union.hpp"
#include "ume/errors.hpp"
#include "ume/estimators.hpp"
#include "ume/families.hpp"
#include "ume/format.hpp"
#include "ume/harness.hpp"
#include "ume/rng.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitEstimator = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  ume::Coord horizon = 0;
  std::string out;
  std::string config;
};

std::vector<std::size_t> grid_from(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::logic_error&) {
      throw ume::ConfigError("--n entry '" + item + "' is not an integer");
    }
  }
  return out;
}

std::string output_path(const Globals& g, const std::string& fallback_name) {
  if (!g.out.empty()) return g.out;
  return (std::filesystem::path(ume::default_output_dir()) / fallback_name).string();
}

int cmd_learn(const Globals& g, const std::string& family_text, const std::string& estimator_text, std::size_t n,
              std::optional<std::uint64_t> truth_seed, ume::Coord show) {
  ume::ExperimentConfig cfg;
  if (!g.config.empty()) cfg = ume::experiment_from_entries(ume::read_key_values_file(g.config));
  if (!family_text.empty()) cfg.family_spec = family_text;
  if (!estimator_text.empty()) cfg.estimator_spec = estimator_text;
  if (n) cfg.n_grid = {n};
  if (cfg.n_grid.size() != 1) throw ume::ConfigError("learn needs exactly one --n");
  if (g.horizon) cfg.j_eval = g.horizon;
  if (truth_seed) cfg.truth_seed = truth_seed;
  if (cfg.estimator_spec.empty() && !cfg.family_spec.empty()) {
    cfg.estimator_spec = ume::default_estimator_for(*ume::parse_family(cfg.family_spec)).text();
  }
  const ume::Spec est = ume::parse_spec(cfg.estimator_spec);
  if (!cfg.j_eval) {
    const std::size_t nn = cfg.n_grid.front();
    cfg.j_eval = est.name == "tree" ? (ume::Coord{1} << (est.integer("depth", 12) + 1)) - 1 : nn + nn % 2;
  }
  cfg.validate();
  const auto setup = ume::setup_from_config(cfg);
  const std::uint64_t tseed = cfg.truth_seed ? *cfg.truth_seed : setup.truth_seed.value_or(g.seed);
  const ume::MeanVector truth = setup.family->random_member(tseed);
  const auto s = ume::sample(*setup.family, truth, setup.rows_per_n * cfg.n_grid.front(), cfg.j_eval,
                             ume::derive_seed({g.seed, 2}));
  const auto report = setup.learner(truth)(s);
  nlohmann::json out = ume::report_json(report, show);
  out["family"] = setup.family->spec();
  out["estimator"] = cfg.estimator_spec;
  out["n"] = cfg.n_grid.front();
  out["J"] = cfg.j_eval;
  out["seed"] = g.seed;
  out["truth_seed"] = tseed;
  out["truth_prefix"] = truth.values(std::min(show, cfg.j_eval));
  out["sup_dev"] = ume::sup_deviation(report.estimate, truth, cfg.j_eval);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& family_text, const std::string& estimator_text,
              const std::string& n_text, bool timing, unsigned threads, bool trials_given,
              std::optional<std::uint64_t> truth_seed, bool seed_given) {
  ume::ExperimentConfig cfg;
  if (!g.config.empty()) cfg = ume::experiment_from_entries(ume::read_key_values_file(g.config));
  if (!family_text.empty()) cfg.family_spec = family_text;
  if (!estimator_text.empty()) cfg.estimator_spec = estimator_text;
  if (!n_text.empty()) cfg.n_grid = grid_from(n_text);
  if (g.horizon) cfg.j_eval = g.horizon;
  if (trials_given || g.config.empty()) cfg.trials = g.trials;
  if (seed_given || g.config.empty()) cfg.base_seed = g.seed;
  if (truth_seed) cfg.truth_seed = truth_seed;
  if (timing) cfg.timing = true;
  if (threads) cfg.threads = threads;
  if (!g.out.empty()) cfg.output_path = g.out;
  if (cfg.output_path.empty()) cfg.output_path = output_path(g, "sweep.csv");
  const auto report = ume::run_risk(cfg);
  ume::write_report_files(report, cfg.output_path);
  std::cout << "wrote " << report.rows.size() << " rows to " << cfg.output_path << '\n';
  for (const auto& a : report.aggregates) {
    std::cout << "n=" << a.n << " mean_sup_dev=" << ume::shortest(a.mean_sup_dev)
              << " p95_sup_dev=" << ume::shortest(a.p95_sup_dev) << " failure_rate=" << ume::shortest(a.failure_rate)
              << '\n';
  }
  return 0;
}

int cmd_demo(const Globals& g, std::size_t n, ume::Coord J, unsigned threads) {
  const auto report = ume::demo_empirical_failure(n, J, g.trials, g.seed, threads);
  const auto json = ume::failure_json(report);
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    if (!f) throw ume::ConfigError("cannot write '" + g.out + "'");
    f << json.dump(2) << '\n';
  }
  std::cout << "n=" << n << " J=" << J << " trials=" << g.trials << '\n'
            << "trials with sup_dev = 0.5: " << report.half_deviation_trials << '\n'
            << "constant-column rate (Monte Carlo): " << ume::shortest(report.monte_carlo_rate) << '\n'
            << "constant-column probability (closed form): " << ume::digits17(report.closed_form) << '\n';
  return 0;
}

int cmd_union(const Globals& g, const std::string& registry_path, std::size_t n, int k_cap,
              const std::string& verdict_log) {
  const std::string path = registry_path.empty() ? g.config : registry_path;
  if (path.empty()) throw ume::ConfigError("union needs --registry (or --config) naming a registry file");
  if (n < 1) throw ume::ConfigError("union needs --n >= 1");
  const auto reg = ume::load_registry(path);
  const ume::FamilyPtr truth_family =
      reg.truth_learner ? reg.learners[*reg.truth_learner - 1].family : reg.union_family;
  const ume::Coord J = g.horizon ? g.horizon : n + n % 2;
  std::ofstream log;
  if (!verdict_log.empty()) {
    log.open(verdict_log);
    if (!log) throw ume::ConfigError("cannot write '" + verdict_log + "'");
  }
  nlohmann::json rows = nlohmann::json::array();
  const ume::MeanVector fixed_truth = truth_family->random_member(reg.truth_seed);
  // Monte Carlo stand-in for (eps*)_n: sqrt of the truth learner's mean deviation on S1
  double star_sum = 0.0;
  std::size_t star_count = 0;
  for (std::size_t t = 0; t < g.trials; ++t) {
    const std::uint64_t seed = ume::trial_seed(g.seed, n, t);
    const auto s = ume::sample(*truth_family, fixed_truth, 2 * n, J, ume::derive_seed({seed, 2}));
    const auto result = ume::union_learn(reg.learners, *reg.union_family, s, k_cap);
    if (log) ume::write_verdict_log(log, result, reg.learners);
    nlohmann::json survivors = nlohmann::json::array();
    for (const auto& r : result.rounds) {
      survivors.push_back(r.survivor ? nlohmann::json(*r.survivor + 1) : nlohmann::json(nullptr));
    }
    if (reg.truth_learner) {
      if (const auto& c = result.candidates[*reg.truth_learner - 1]) {
        star_sum += ume::sup_deviation(*c, fixed_truth, J);
        ++star_count;
      }
    }
    const int K = *result.report.k_reached;
    const double dev = ume::sup_deviation(result.report.estimate, fixed_truth, J);
    rows.push_back({{"trial", t},
                    {"seed", seed},
                    {"k_reached", K},
                    {"survivors", survivors},
                    {"sup_dev", dev},
                    {"within_bound", dev <= 10.0 * std::ldexp(1.0, -K)},
                    {"notes", result.report.notes}});
  }
  nlohmann::json out{{"registry", path}, {"n", n}, {"J", J}, {"trials", rows}};
  if (star_count) {
    out["epsilon_star_estimate"] = {{"value", std::sqrt(star_sum / static_cast<double>(star_count))},
                                    {"trials_used", star_count},
                                    {"method", "monte_carlo"}};
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_tree(const Globals& g, int depth, std::size_t n, unsigned threads) {
  if (n < 36) throw ume::ConfigError("tree needs --n >= 36");
  const auto r = ume::tree_recovery(depth, n, g.trials, g.seed, threads);
  std::cout << "depth=" << depth << " n=" << n << " trials=" << r.trials << '\n'
            << "recovered: " << r.recovered << '\n'
            << "rejected: " << r.rejected << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniform mean estimation over product Bernoulli families"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Base seed");
  auto* trials_opt = app.add_option("--trials", g.trials, "Number of seeded trials")->check(CLI::PositiveNumber);
  app.add_option("--horizon,--J,--j-eval", g.horizon, "Coordinate horizon J");
  app.add_option("--out", g.out, "Output path");
  app.add_option("--config", g.config, "Config file (key = value lines)");

  std::string family, estimator, n_list, registry, verdict_log;
  std::size_t n = 0;
  int depth = 12, k_cap = 0;
  ume::Coord show = 20;
  unsigned threads = 0;
  bool timing = false;
  std::optional<std::uint64_t> truth_seed;

  auto* learn = app.add_subcommand("learn", "Run one estimator on one sample");
  learn->add_option("--family", family, "Family spec, e.g. qprop:c=1");
  learn->add_option("--estimator", estimator, "Estimator spec, e.g. separable:k_max=8");
  learn->add_option("--n", n, "Sample size");
  learn->add_option("--truth-seed", truth_seed, "Seed of the ground truth (defaults to --seed)");
  learn->add_option("--show", show, "Number of estimate coordinates to print");

  auto* sweep = app.add_subcommand("sweep", "Risk sweep over a grid of sample sizes");
  sweep->add_option("--family", family, "Family spec");
  sweep->add_option("--estimator", estimator, "Estimator spec");
  sweep->add_option("--n", n_list, "Comma-separated sample sizes");
  sweep->add_option("--truth-seed", truth_seed, "Fix the ground truth across trials");
  sweep->add_flag("--timing", timing, "Record per-trial runtimes (makes the CSV non-reproducible)");
  sweep->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  auto* demo = app.add_subcommand("demo-failure", "Empirical mean on the all-1/2 product measure");
  demo->add_option("--n", n, "Sample size")->required();
  demo->add_option("--threads", threads, "Worker threads");

  auto* uni = app.add_subcommand("union", "Countable-union meta-learner with a learner registry");
  uni->add_option("--registry", registry, "Registry file");
  uni->add_option("--n", n, "Half sample size (2n rows are drawn)")->required();
  uni->add_option("--k-cap", k_cap, "Round cap (0 = default schedule)");
  uni->add_option("--verdict-log", verdict_log, "JSON-lines survival-test log");

  auto* tree = app.add_subcommand("tree", "Branch recovery on random Q_tree truths");
  tree->add_option("--depth", depth, "Tree depth D")->check(CLI::Range(1, 30));
  tree->add_option("--n", n, "Sample size")->required();
  tree->add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*learn) return cmd_learn(g, family, estimator, n, truth_seed, show);
    if (*sweep) {
      return cmd_sweep(g, family, estimator, n_list, timing, threads, trials_opt->count() > 0, truth_seed,
                       seed_opt->count() > 0);
    }
    if (*demo) return cmd_demo(g, n, g.horizon ? g.horizon : 100000, threads);
    if (*uni) return cmd_union(g, registry, n, k_cap, verdict_log);
    if (*tree) return cmd_tree(g, depth, n, threads);
  } catch (const ume::EstimatorError& e) {
    std::cerr << "estimator error: " << e.what() << '\n';
    return kExitEstimator;
  } catch (const ume::HorizonExceeded& e) {
    std::cerr << "estimator error: " << e.what() << '\n';
    return kExitEstimator;
  } catch (const ume::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
