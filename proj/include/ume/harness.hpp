#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ume/config.hpp"
#include "ume/estimators.hpp"
#include "ume/families.hpp"

namespace ume {

struct ExperimentConfig {
  std::string family_spec;
  std::string estimator_spec;
  std::vector<std::size_t> n_grid;
  Coord j_eval = 0;  // 0 selects max(n_grid)
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::optional<std::uint64_t> truth_seed;  // fixed truth; otherwise one truth per trial
  std::string output_path;
  std::vector<std::string> members;  // explicit `member` lines for `family = list`
  bool timing = false;    // runtime_ms is left empty unless set, so CSVs stay reproducible
  unsigned threads = 0;   // 0 selects the hardware concurrency

  Coord effective_j_eval() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Reads family, estimator, n, j_eval, trials, seed, truth_seed, out, timing, threads and
/// member lines from a `key = value` config.
ExperimentConfig experiment_from_entries(const KeyValues& entries);

struct TrialRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double sup_dev = 1.0;
  bool accepted = false;
  double runtime_ms = 0.0;
  std::optional<int> k_reached;
  std::string error;
};

struct Aggregate {
  std::size_t n = 0;
  std::size_t trials = 0;
  double mean_sup_dev = 0.0;
  double p95_sup_dev = 0.0;  // nearest-rank
  double failure_rate = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string family;
  std::vector<TrialRow> rows;  // ordered by (n, trial)
  std::vector<Aggregate> aggregates;
};

/// Builds the learner for one trial. `truth` is handed over for oracle fixtures.
using LearnerFactory = std::function<Learner(const MeanVector& truth)>;

/// The setup shared by every trial of a sweep.
struct ExperimentSetup {
  FamilyPtr family;          // family the truth is drawn from and checked against
  LearnerFactory learner;
  std::size_t rows_per_n = 1;  // 2 for the union learner, which splits its sample
  std::optional<std::uint64_t> truth_seed;  // used when the config fixes none
};

ExperimentSetup setup_from_config(const ExperimentConfig& cfg);

/// child seed for (n, trial); stable under changes to the grid.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial);

/// sup_j |a_j - b_j|: exact when both vectors are structured, otherwise over j <= j_eval.
double sup_deviation(const MeanVector& estimate, const MeanVector& truth, Coord j_eval);

ExperimentReport run_risk(const ExperimentConfig& cfg);
ExperimentReport run_risk(const ExperimentConfig& cfg, const ExperimentSetup& setup);

std::vector<Aggregate> aggregate_rows(const std::vector<TrialRow>& rows);

/// Header `n,trial,seed,sup_dev,accepted,runtime_ms`; values at 17 significant digits.
void write_csv(std::ostream& out, const ExperimentReport& report);
nlohmann::json summary_json(const ExperimentReport& report);
/// Writes the CSV to `csv_path` and the summary next to it (extension .json).
void write_report_files(const ExperimentReport& report, const std::string& csv_path);

/// `UME_OUT_DIR` when set, otherwise the working directory.
std::string default_output_dir();

struct FailureTrial {
  double sup_dev = 0.0;
  std::size_t constant_columns = 0;
};

struct FailureReport {
  std::size_t n = 0;
  Coord J = 0;
  std::uint64_t seed = 0;
  std::vector<FailureTrial> trials;
  double closed_form = 0.0;          // 1 - (1 - 2 * 2^-n)^J
  double monte_carlo_rate = 0.0;     // fraction of trials with a constant column
  std::size_t half_deviation_trials = 0;  // trials with sup_dev = 1/2
};

/// Empirical mean of the all-1/2 product measure.
FailureReport demo_empirical_failure(std::size_t n, Coord J, std::size_t trials, std::uint64_t seed,
                                     unsigned threads = 0);
nlohmann::json failure_json(const FailureReport& report);

struct TreeRecovery {
  int depth = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t recovered = 0;  // returned bits equal the true branch on depths 1..D
  std::size_t rejected = 0;   // NoBranchAccepted
};

/// Random Q_tree branches of length `depth`, n draws each, recovered by tree_learn.
TreeRecovery tree_recovery(int depth, std::size_t n, std::size_t trials, std::uint64_t seed, unsigned threads = 0);

nlohmann::json report_json(const EstimatorReport& report, Coord show);

}  // namespace ume
