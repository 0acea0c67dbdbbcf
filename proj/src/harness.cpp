#include "ume/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ume/errors.hpp"
#include "ume/format.hpp"
#include "ume/rng.hpp"

namespace ume {
namespace {

/// Runs body(0..count-1) on up to `threads` workers; the first exception is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(item, &pos);
      if (pos != item.size() && item.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ConfigError("n grid entry '" + item + "' is not an integer");
    }
  }
  return out;
}

bool needs_j_at_least_n(const std::string& estimator) {
  const std::string name = parse_spec(estimator).name;
  return name == "eps" || name == "separable" || name == "union";
}

}  // namespace

Coord ExperimentConfig::effective_j_eval() const {
  if (j_eval) return j_eval;
  return n_grid.empty() ? 1 : *std::max_element(n_grid.begin(), n_grid.end());
}

void ExperimentConfig::validate() const {
  if (estimator_spec.empty()) throw ConfigError("no estimator given");
  if (family_spec.empty() && parse_spec(estimator_spec).name != "union") throw ConfigError("no family given");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (n_grid.empty()) throw ConfigError("n grid is empty");
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    if (n_grid[k] < 1) throw ConfigError("sample sizes must be positive");
    if (k && n_grid[k] <= n_grid[k - 1]) throw ConfigError("n grid must be strictly increasing");
  }
  if (needs_j_at_least_n(estimator_spec) && effective_j_eval() < n_grid.back()) {
    throw ConfigError("j_eval = " + std::to_string(effective_j_eval()) + " is below the largest n = " +
                      std::to_string(n_grid.back()) + ", which this estimator requires");
  }
}

ExperimentConfig experiment_from_entries(const KeyValues& entries) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : entries) {
    try {
      if (k == "family") cfg.family_spec = v;
      else if (k == "member") cfg.members.push_back(v);
      else if (k == "estimator") cfg.estimator_spec = v;
      else if (k == "n") cfg.n_grid = parse_grid(v);
      else if (k == "j_eval" || k == "horizon") cfg.j_eval = std::stoull(v);
      else if (k == "trials") cfg.trials = std::stoull(v);
      else if (k == "seed") cfg.base_seed = std::stoull(v);
      else if (k == "truth_seed") cfg.truth_seed = std::stoull(v);
      else if (k == "out") cfg.output_path = v;
      else if (k == "timing") cfg.timing = v == "1" || v == "true" || v == "yes";
      else if (k == "threads") cfg.threads = static_cast<unsigned>(std::stoul(v));
      else throw ConfigError("unknown experiment key '" + k + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("value '" + v + "' for '" + k + "' is not a valid integer");
    }
  }
  return cfg;
}

ExperimentSetup setup_from_config(const ExperimentConfig& cfg) {
  const Spec est = parse_spec(cfg.estimator_spec);
  ExperimentSetup setup;
  if (est.name == "union") {
    auto reg = std::make_shared<RegistryConfig>(load_registry(est.string("registry", "")));
    setup.family = reg->truth_learner ? reg->learners[*reg->truth_learner - 1].family : reg->union_family;
    if (reg->truth_learner) setup.truth_seed = reg->truth_seed;
    const int k_cap = static_cast<int>(est.integer("k_cap", 0));
    est.only({"registry", "k_cap"});
    setup.learner = [reg, k_cap](const MeanVector&) -> Learner {
      return [reg, k_cap](const SampleSet& s) { return union_learn(reg->learners, *reg->union_family, s, k_cap).report; };
    };
    setup.rows_per_n = 2;
    return setup;
  }
  if (cfg.family_spec == "list" && !cfg.members.empty()) {
    std::vector<MeanVector> members;
    for (const auto& m : cfg.members) members.push_back(parse_member(m));
    setup.family = make_countable_list(std::move(members));
  } else {
    setup.family = parse_family(cfg.family_spec);
  }
  Learner learner = make_learner(est, setup.family);
  setup.learner = [learner](const MeanVector&) { return learner; };
  return setup;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) {
  return derive_seed({base_seed, n, trial});
}

double sup_deviation(const MeanVector& estimate, const MeanVector& truth, Coord j_eval) {
  if (auto d = sup_distance(estimate, truth)) return *d;
  Coord range = j_eval;
  if (auto l = estimate.limit()) range = std::min(range, *l);
  if (auto l = truth.limit()) range = std::min(range, *l);
  return prefix_linf(estimate, truth, range);
}

ExperimentReport run_risk(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_risk(cfg, setup_from_config(cfg));
}

ExperimentReport run_risk(const ExperimentConfig& cfg, const ExperimentSetup& setup) {
  cfg.validate();
  const Coord J = cfg.effective_j_eval();
  const std::optional<std::uint64_t> fixed_seed = cfg.truth_seed ? cfg.truth_seed : setup.truth_seed;
  std::optional<MeanVector> fixed_truth;
  if (fixed_seed) fixed_truth = setup.family->random_member(*fixed_seed);

  ExperimentReport report;
  report.config = cfg;
  report.family = setup.family->spec();
  report.rows.resize(cfg.n_grid.size() * cfg.trials);
  parallel_for(report.rows.size(), cfg.threads, [&](std::size_t idx) {
    TrialRow& row = report.rows[idx];
    row.n = cfg.n_grid[idx / cfg.trials];
    row.trial = idx % cfg.trials;
    row.seed = trial_seed(cfg.base_seed, row.n, row.trial);
    const auto start = std::chrono::steady_clock::now();
    try {
      const MeanVector truth = fixed_truth ? *fixed_truth : setup.family->random_member(derive_seed({row.seed, 1}));
      const SampleSet s = sample(*setup.family, truth, setup.rows_per_n * row.n, J, derive_seed({row.seed, 2}));
      const EstimatorReport est = setup.learner(truth)(s);
      row.sup_dev = sup_deviation(est.estimate, truth, J);
      row.accepted = true;
      row.k_reached = est.k_reached;
    } catch (const Error& e) {
      row.error = e.what();
    } catch (const std::invalid_argument& e) {
      row.error = e.what();
    }
    const auto stop = std::chrono::steady_clock::now();
    row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  });
  report.aggregates = aggregate_rows(report.rows);
  return report;
}

std::vector<Aggregate> aggregate_rows(const std::vector<TrialRow>& rows) {
  std::vector<Aggregate> out;
  for (std::size_t begin = 0; begin < rows.size();) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].n == rows[begin].n) ++end;
    Aggregate a;
    a.n = rows[begin].n;
    a.trials = end - begin;
    std::vector<double> devs;
    double sum = 0.0;
    std::size_t failures = 0;
    for (std::size_t i = begin; i < end; ++i) {
      sum += rows[i].sup_dev;
      devs.push_back(rows[i].sup_dev);
      failures += rows[i].accepted ? 0 : 1;
    }
    std::sort(devs.begin(), devs.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(devs.size())));
    a.mean_sup_dev = sum / static_cast<double>(a.trials);
    a.p95_sup_dev = devs[std::max<std::size_t>(rank, 1) - 1];
    a.failure_rate = static_cast<double>(failures) / static_cast<double>(a.trials);
    out.push_back(a);
    begin = end;
  }
  return out;
}

void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << "n,trial,seed,sup_dev,accepted,runtime_ms\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.trial << ',' << r.seed << ',' << digits17(r.sup_dev) << ',' << (r.accepted ? 1 : 0) << ',';
    if (report.config.timing) out << digits17(r.runtime_ms);
    out << '\n';
  }
}

nlohmann::json summary_json(const ExperimentReport& report) {
  const auto& c = report.config;
  nlohmann::json cfg{{"family", report.family},
                     {"estimator", c.estimator_spec},
                     {"n_grid", c.n_grid},
                     {"j_eval", c.effective_j_eval()},
                     {"trials", c.trials},
                     {"base_seed", c.base_seed}};
  cfg["truth_seed"] = c.truth_seed ? nlohmann::json(*c.truth_seed) : nlohmann::json(nullptr);
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    aggs.push_back({{"n", a.n},
                    {"trials", a.trials},
                    {"mean_sup_dev", a.mean_sup_dev},
                    {"p95_sup_dev", a.p95_sup_dev},
                    {"failure_rate", a.failure_rate}});
  }
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& r : report.rows) {
    if (!r.error.empty()) errors.push_back({{"n", r.n}, {"trial", r.trial}, {"error", r.error}});
  }
  return {{"config", cfg}, {"aggregates", aggs}, {"errors", errors}};
}

void write_report_files(const ExperimentReport& report, const std::string& csv_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write '" + csv_path + "'");
  write_csv(csv, report);
  std::string json_path = csv_path;
  const auto dot = json_path.find_last_of('.');
  const auto slash = json_path.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) json_path.erase(dot);
  json_path += ".json";
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw ConfigError("cannot write '" + json_path + "'");
  js << summary_json(report).dump(2) << '\n';
}

std::string default_output_dir() {
  if (const char* dir = std::getenv("UME_OUT_DIR"); dir && *dir) return dir;
  return ".";
}

FailureReport demo_empirical_failure(std::size_t n, Coord J, std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (n < 1 || J < 1) throw std::invalid_argument("demo needs n >= 1 and J >= 1");
  FailureReport report;
  report.n = n;
  report.J = J;
  report.seed = seed;
  report.trials.resize(trials);
  const MeanVector half = MeanVector::constant(0.5);
  parallel_for(trials, threads, [&](std::size_t t) {
    const SampleSet s = sample_product(half, n, J, derive_seed({seed, n, J, t}));
    const auto counts = s.column_counts();
    FailureTrial& out = report.trials[t];
    for (std::uint32_t c : counts) {
      if (c == 0 || c == n) ++out.constant_columns;
      out.sup_dev = std::max(out.sup_dev, std::abs(c / static_cast<double>(n) - 0.5));
    }
  });
  std::size_t hits = 0;
  for (const auto& t : report.trials) {
    hits += t.constant_columns > 0 ? 1 : 0;
    report.half_deviation_trials += t.sup_dev == 0.5 ? 1 : 0;
  }
  const double p_const = 2.0 * std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(n, 2000)));
  report.closed_form = -std::expm1(static_cast<double>(J) * std::log1p(-std::min(p_const, 1.0)));
  if (p_const >= 1.0) report.closed_form = 1.0;
  report.monte_carlo_rate = trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
  return report;
}

nlohmann::json failure_json(const FailureReport& r) {
  nlohmann::json devs = nlohmann::json::array();
  nlohmann::json consts = nlohmann::json::array();
  for (const auto& t : r.trials) {
    devs.push_back(t.sup_dev);
    consts.push_back(t.constant_columns);
  }
  return {{"n", r.n},
          {"J", r.J},
          {"seed", r.seed},
          {"trials", r.trials.size()},
          {"sup_dev", devs},
          {"constant_columns", consts},
          {"half_deviation_trials", r.half_deviation_trials},
          {"monte_carlo_constant_column_rate", r.monte_carlo_rate},
          {"closed_form_constant_column_probability", r.closed_form}};
}

TreeRecovery tree_recovery(int depth, std::size_t n, std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (depth < 1 || depth > 30) throw std::invalid_argument("tree depth must lie in 1..30");
  const FamilyPtr family = make_qtree(static_cast<std::size_t>(depth));
  const Coord J = (Coord{1} << (depth + 1)) - 1;
  std::vector<int> outcome(trials, 0);  // 1 recovered, 2 rejected
  parallel_for(trials, threads, [&](std::size_t t) {
    const std::uint64_t s = trial_seed(seed, n, t);
    const MeanVector truth = family->random_member(derive_seed({s, 1}));
    const SampleSet data = sample(*family, truth, n, J, derive_seed({s, 2}));
    try {
      const auto est = tree_learn(data, depth);
      if (*est.branch_bits == truth.tree_branch_data()->bits) outcome[t] = 1;
    } catch (const NoBranchAccepted&) {
      outcome[t] = 2;
    }
  });
  TreeRecovery r{depth, n, trials, 0, 0};
  for (int o : outcome) {
    r.recovered += o == 1 ? 1 : 0;
    r.rejected += o == 2 ? 1 : 0;
  }
  return r;
}

nlohmann::json report_json(const EstimatorReport& report, Coord show) {
  Coord count = show;
  if (auto l = report.estimate.limit()) count = std::min(count, *l);
  nlohmann::json out{{"estimate_prefix", report.estimate.values(count)}, {"candidates_scanned", report.candidates_scanned}};
  if (report.candidate_index) {
    out["candidate_index"] = *report.candidate_index;
    out["candidate_index_saturated"] = report.candidate_index_saturated;
  }
  if (report.k_reached) out["k_reached"] = *report.k_reached;
  if (report.branch_bits) {
    std::string bits;
    for (auto b : *report.branch_bits) bits += static_cast<char>('0' + b);
    out["branch_bits"] = bits;
  }
  if (report.branch_score) out["branch_score"] = *report.branch_score;
  if (!report.constraints.empty()) {
    nlohmann::json radii = nlohmann::json::array();
    for (const auto& b : report.constraints) radii.push_back(b.radius);
    out["constraint_radii"] = radii;
  }
  if (!report.notes.empty()) out["notes"] = report.notes;
  if (auto l = report.estimate.limit()) out["estimate_horizon"] = *l;
  return out;
}

}  // namespace ume
