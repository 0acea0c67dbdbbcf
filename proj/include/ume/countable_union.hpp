#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ume/estimators.hpp"
#include "ume/families.hpp"

namespace ume {

/// Base learner A_i for the sub-family Q_i.
struct RegisteredLearner {
  std::string name;
  FamilyPtr family;
  Learner learn;
};

/// Ordered; position in the list is the learner index.
using LearnerRegistry = std::vector<RegisteredLearner>;

struct SurvivalVerdict {
  bool passed = false;
  std::size_t wins = 0;
  std::optional<std::size_t> first_failure_opponent;  // 0-based candidate position
  std::optional<Coord> first_failure_coordinate;
  Certainty certainty = Certainty::Exact;
};

/// Candidate i against every opponent t: a win when no coordinate differs by more than
/// 4 eps, or when the empirical mean at the first such coordinate lies within
/// eps + threshold(n) of candidate i. Passes when every opponent is beaten.
SurvivalVerdict survival_test(std::size_t i, double eps, std::size_t n, std::span<const MeanVector> candidates,
                              const MeanVector& qhat, Coord horizon = kDefaultHorizon);

/// The elimination arithmetic: given a 4 eps gap between candidates t and i and qhat
/// within eps + threshold(n) of i at that coordinate, checks |t - qhat| >= 2 eps once n > 9 / eps^4.
/// Returns true when the premises fail or the conclusion holds.
bool elimination_holds(double t_value, double i_value, double qhat_value, double eps, std::size_t n);

/// max(1, floor(ln(n / 9) / 4)).
int default_union_k_cap(std::size_t n);

struct UnionRound {
  int k = 0;
  double epsilon = 0.0;
  std::vector<std::size_t> tested;  // candidate positions, same order as verdicts
  std::vector<SurvivalVerdict> verdicts;
  std::optional<std::size_t> survivor;
  bool intersection_empty = false;
};

struct UnionResult {
  EstimatorReport report;
  std::vector<std::optional<MeanVector>> candidates;  // per registry position; nullopt when the learner failed
  std::vector<std::string> learner_errors;            // per registry position; empty on success
  std::vector<UnionRound> rounds;
};

/// Splits s_full into S1 (rows 1..n) and S2 (rows n+1..2n), trains the first min(n, R)
/// learners on S1, then chains 5 eps_k balls around the first survivor of each round.
/// k_cap = 0 selects default_union_k_cap(n).
UnionResult union_learn(const LearnerRegistry& reg, const Family& f_union, const SampleSet& s_full, int k_cap = 0);

/// One JSON object per (k, i) survival test.
void write_verdict_log(std::ostream& out, const UnionResult& result, const LearnerRegistry& reg);

}  // namespace ume
