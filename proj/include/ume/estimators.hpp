#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ume/families.hpp"
#include "ume/meanvec.hpp"

namespace ume {

inline constexpr std::uint64_t kDefaultMaxCandidates = 1'000'000;

/// sqrt(3 ln n / n), natural log. n = 1 gives 0.
struct Threshold {
  std::size_t n;
  double value;

  static Threshold for_samples(std::size_t n);
};
double hoeffding_threshold(std::size_t n);

struct EstimatorReport {
  MeanVector estimate;
  std::optional<std::uint64_t> candidate_index;  // 1-based position of the accepted cover candidate
  bool candidate_index_saturated = false;        // index exceeded 2^64 - 1 and is clamped
  std::optional<int> k_reached;
  std::optional<std::vector<std::uint8_t>> branch_bits;
  std::optional<double> branch_score;
  std::uint64_t candidates_scanned = 0;
  std::vector<BallConstraint> constraints;  // accumulated by chaining learners
  std::vector<std::string> notes;

  explicit EstimatorReport(MeanVector e) : estimate(std::move(e)) {}
};

using Learner = std::function<EstimatorReport(const SampleSet&)>;

/// Column means on 1..J. Reads past J raise HorizonExceeded.
MeanVector empirical_mean(const SampleSet& s);

/// First candidate within threshold + epsilon of the empirical mean on coordinates 1..n-1.
/// Product-grid covers are resolved in closed form; other covers are streamed and give up
/// after max_candidates.
EstimatorReport eps_approximate(CoverEnumerator& cov, const SampleSet& s, double epsilon,
                                std::uint64_t max_candidates = kDefaultMaxCandidates);

/// k_max = 0 selects ceil(log2 n).
EstimatorReport separable_learn(const Family& f, const SampleSet& s, int k_max = 0,
                                std::uint64_t max_candidates = kDefaultMaxCandidates);

EstimatorReport bin_learn(const SampleSet& s);
EstimatorReport round_learn(const SampleSet& s);

/// Best root-to-depth-D path by summed node counts, excluding the root; ties go left.
struct BranchScore {
  std::vector<std::uint8_t> bits;
  std::uint64_t count_sum = 0;
};
BranchScore max_average_branch(const std::vector<std::uint32_t>& node_counts, int depth);

EstimatorReport tree_learn(const SampleSet& s, int depth);

}  // namespace ume
