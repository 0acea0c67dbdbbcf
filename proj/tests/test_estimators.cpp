#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "ume/errors.hpp"
#include "ume/estimators.hpp"
#include "ume/families.hpp"

using namespace ume;

namespace {

constexpr double kThird = 1.0 / 3.0;
constexpr double kTwoThirds = 2.0 / 3.0;

/// Forwards a cover but hides its product structure, forcing a literal scan.
class Streamed : public CoverEnumerator {
 public:
  explicit Streamed(std::unique_ptr<CoverEnumerator> inner) : CoverEnumerator(inner->epsilon()), inner_(std::move(inner)) {}
  std::optional<MeanVector> next() override { return inner_->next(); }

 private:
  std::unique_ptr<CoverEnumerator> inner_;
};

SampleSet rows_from(const std::vector<std::vector<std::uint8_t>>& rows) {
  std::vector<std::uint8_t> bits;
  for (const auto& r : rows) bits.insert(bits.end(), r.begin(), r.end());
  return SampleSet(rows.size(), rows.front().size(), bits, 0);
}

}  // namespace

TEST(Threshold, NaturalLogValues) {
  EXPECT_NEAR(hoeffding_threshold(100), 0.3717, 5e-5);
  EXPECT_NEAR(hoeffding_threshold(3), 1.0481, 5e-5);
  EXPECT_EQ(hoeffding_threshold(1), 0.0);
  EXPECT_EQ(Threshold::for_samples(100).value, hoeffding_threshold(100));
  EXPECT_THROW(hoeffding_threshold(0), std::invalid_argument);
}

TEST(EmpiricalMean, AllOnes) {
  auto s = sample_product(MeanVector::constant(1.0), 7, 5, 3);
  auto m = empirical_mean(s);
  for (Coord j = 1; j <= 5; ++j) EXPECT_EQ(m.coord(j), 1.0);
  EXPECT_THROW(m.coord(6), HorizonExceeded);
}

TEST(EmpiricalMean, TwoRows) {
  auto m = empirical_mean(rows_from({{0}, {1}}));
  EXPECT_EQ(m.coord(1), 0.5);
}

TEST(EmpiricalMean, ConcentratesAtTwoThirds) {
  int close = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    auto s = sample_product(MeanVector::constant(kTwoThirds), 10000, 1, derive_seed({5, t}));
    close += std::abs(empirical_mean(s).coord(1) - kTwoThirds) <= 0.02 ? 1 : 0;
  }
  EXPECT_GE(close, 198);
}

TEST(EpsApproximate, SingleTruthIsAccepted) {
  auto truth = MeanVector::explicit_tail({0.3, 0.7}, 0.5);
  auto f = make_countable_list({truth});
  auto s = sample(*f, truth, 200, 200, 4);
  auto cov = cover(*f, 0.0);
  auto r = eps_approximate(*cov, s, 0.0);
  EXPECT_EQ(r.candidate_index, 1u);
  EXPECT_EQ(*sup_distance(r.estimate, truth), 0.0);
}

TEST(EpsApproximate, FarCandidateIsRejected) {
  auto truth = MeanVector::explicit_tail({0.05}, 0.5);
  auto far = MeanVector::explicit_tail({0.95}, 0.5);
  auto f = make_countable_list({far, truth});
  int second = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto s = sample(*f, truth, 100, 100, seed);
    auto cov = cover(*f, 0.0);
    second += eps_approximate(*cov, s, 0.0).candidate_index == 2u ? 1 : 0;
  }
  EXPECT_EQ(second, 100);
}

TEST(EpsApproximate, OneSampleAcceptsFirstCandidate) {
  auto f = make_countable_list({MeanVector::constant(0.1), MeanVector::constant(0.9)});
  auto s = sample_product(MeanVector::constant(0.9), 1, 4, 0);
  auto cov = cover(*f, 0.0);
  auto r = eps_approximate(*cov, s, 0.0);
  EXPECT_EQ(r.candidate_index, 1u);
  EXPECT_EQ(r.estimate.coord(1), 0.1);
}

TEST(EpsApproximate, ExhaustionAndCapRaise) {
  auto f = make_countable_list({MeanVector::constant(0.0), MeanVector::constant(0.1)});
  auto s = sample_product(MeanVector::constant(1.0), 50, 50, 0);
  auto cov = cover(*f, 0.0);
  EXPECT_THROW(eps_approximate(*cov, s, 0.0), NoCandidateAccepted);
  auto f2 = make_countable_list({MeanVector::constant(0.0), MeanVector::constant(1.0)});
  auto cov2 = cover(*f2, 0.0);
  EXPECT_THROW(eps_approximate(*cov2, s, 0.0, 1), NoCandidateAccepted);
  auto s_short = sample_product(MeanVector::constant(1.0), 50, 10, 0);
  auto cov3 = cover(*f2, 0.0);
  EXPECT_THROW(eps_approximate(*cov3, s_short, 0.0), std::invalid_argument);
}

TEST(EpsApproximate, GridShortcutMatchesLiteralScan) {
  Rng rng(3);
  int accepted = 0, rejected = 0;
  for (int it = 0; it < 300; ++it) {
    const double c = it % 2 ? 1.0 : 0.5;
    const double eps = c == 0.5 && it % 3 == 0 ? 0.25 : 0.5;
    auto f = make_qprop(c, 6);
    auto truth = f->random_member(rng.bits());
    const std::size_t n = 1 + rng.below(200);
    // a non-member truth now and then so both outcomes occur
    auto s = rng.below(3) == 0 ? sample_product(MeanVector::constant(1.0), n, n + 3, rng.bits())
                               : sample(*f, truth, n, n + 3, rng.bits());
    const double used_eps = rng.below(4) == 0 ? 0.0 : eps;
    std::optional<EstimatorReport> fast, slow;
    try {
      auto cov = cover(*f, eps);
      fast = eps_approximate(*cov, s, used_eps);
    } catch (const NoCandidateAccepted&) {
    }
    try {
      Streamed cov(cover(*f, eps));
      slow = eps_approximate(cov, s, used_eps, 100'000'000);
    } catch (const NoCandidateAccepted&) {
    }
    ASSERT_EQ(fast.has_value(), slow.has_value()) << "iteration " << it;
    if (!fast) {
      ++rejected;
      continue;
    }
    ++accepted;
    EXPECT_EQ(fast->candidate_index, slow->candidate_index);
    EXPECT_EQ(*sup_distance(fast->estimate, slow->estimate), 0.0);
  }
  EXPECT_GT(accepted, 0);
  EXPECT_GT(rejected, 0);
}

TEST(EpsApproximate, HugeGridIndexSaturates) {
  auto f = make_qprop(1.0);
  auto truth = MeanVector::explicit_tail({0.9, 0.1, 0.9, 0.1}, 0.5);
  auto s = sample(*f, truth, 2000, 2000, 1);
  auto cov = cover(*f, 1.0 / 64);
  auto r = eps_approximate(*cov, s, 1.0 / 64);
  EXPECT_TRUE(r.candidate_index_saturated);
}

TEST(SeparableLearn, QpropEstimateWithinTwiceLastRadius) {
  auto f = make_qprop(1.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto truth = f->random_member(100 + seed);
    auto s = sample(*f, truth, 4096, 4096, seed);
    auto r = separable_learn(*f, s, 8);
    ASSERT_TRUE(r.k_reached);
    // K: the last round whose ball still holds the truth
    int K = 0;
    for (const auto& ball : r.constraints) {
      if (!satisfies(truth, ball)) break;
      ++K;
    }
    ASSERT_GE(K, 1);
    EXPECT_LE(prefix_linf(r.estimate, truth, 4096), 2 * std::ldexp(1.0, -K));
  }
}

TEST(SeparableLearn, SingleMemberListRunsToCap) {
  auto truth = MeanVector::explicit_tail({0.2, 0.8}, 0.4);
  auto f = make_countable_list({truth});
  auto s = sample(*f, truth, 32, 32, 2);
  auto r = separable_learn(*f, s, 6);
  EXPECT_EQ(r.k_reached, 6);
  EXPECT_EQ(*sup_distance(r.estimate, truth), 0.0);
  EXPECT_EQ(r.constraints.size(), 6u);
}

TEST(SeparableLearn, TruthOutsideFamilyIsFlagged) {
  auto f = make_qprop(1.0);
  auto outside = MeanVector::constant(0.95);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = sample_product(outside, 256, 256, seed);
    try {
      auto r = separable_learn(*f, s);
      EXPECT_GT(*sup_distance(r.estimate, outside), 0.3);
      EXPECT_FALSE(f->contains(outside, 256));
    } catch (const EstimatorError&) {
    }
  }
}

TEST(SeparableLearn, ChainRadiiHalveAndEstimateSatisfiesAll) {
  auto f = make_qprop(1.0);
  Rng rng(9);
  for (int it = 0; it < 20; ++it) {
    auto truth = f->random_member(rng.bits());
    const std::size_t n = 64 << rng.below(4);
    auto s = sample(*f, truth, n, n, rng.bits());
    auto r = separable_learn(*f, s);
    ASSERT_EQ(r.constraints.size(), static_cast<std::size_t>(*r.k_reached));
    for (std::size_t k = 0; k < r.constraints.size(); ++k) {
      EXPECT_EQ(r.constraints[k].radius, std::ldexp(1.0, -static_cast<int>(k + 1)));
      EXPECT_FALSE(first_violation(r.estimate, r.constraints[k].center, r.constraints[k].radius).index);
    }
    EXPECT_TRUE(f->contains(r.estimate, n));
  }
}

TEST(SeparableLearn, NonSeparableFamilyRefuses) {
  auto s = sample_product(MeanVector::constant(1.0), 4, 4, 0);
  EXPECT_THROW(separable_learn(*make_qbin(), s), NotSeparable);
}

TEST(BinLearn, FirstRowIsExact) {
  auto f = make_qbin(8);
  auto truth = MeanVector::explicit_tail({1, 0, 1}, 0.0);
  auto s = sample(*f, truth, 5, 6, 0);
  auto r = bin_learn(s);
  EXPECT_EQ(r.estimate.values(6), truth.values(6));
  EXPECT_TRUE(r.notes.empty());
  EXPECT_EQ(*r.estimate.limit(), 6u);
}

TEST(BinLearn, SingleCoordinateAndNonBinaryNote) {
  EXPECT_EQ(bin_learn(rows_from({{1}})).estimate.coord(1), 1.0);
  auto r = bin_learn(rows_from({{1, 0}, {0, 0}}));
  EXPECT_EQ(r.notes.size(), 1u);
}

TEST(RoundLearn, EvenCoordinateDecidesPair) {
  auto r = round_learn(rows_from({{0, 1, 1, 0}}));
  EXPECT_EQ(r.estimate.coord(1), kTwoThirds);
  EXPECT_EQ(r.estimate.coord(2), 1.0);
  EXPECT_EQ(r.estimate.coord(3), kThird);
  EXPECT_EQ(r.estimate.coord(4), 0.0);
}

TEST(RoundLearn, RecoversTruthFromOneRow) {
  auto f = make_qround(60);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto truth = f->random_member(seed);
    auto r = round_learn(sample(*f, truth, 1, 100, seed));
    EXPECT_EQ(r.estimate.values(100), truth.values(100));
  }
}

TEST(RoundLearn, RejectsMisuse) {
  EXPECT_THROW(round_learn(rows_from({{0, 1}, {0, 0}})), InconsistentRows);
  EXPECT_THROW(round_learn(rows_from({{0, 1, 1}})), std::invalid_argument);
}

TEST(TreeDp, NoiselessScores) {
  const int D = 6;
  const std::uint32_t n = 3;
  auto truth = MeanVector::tree_branch({1, 0, 1, 1, 0, 0});
  const Coord nodes = (Coord{1} << (D + 1)) - 1;
  std::vector<std::uint32_t> counts(nodes + 1, 0);
  for (Coord j = 1; j <= nodes; ++j) counts[j] = static_cast<std::uint32_t>(std::lround(truth.coord(j) * n));
  auto best = max_average_branch(counts, D);
  EXPECT_EQ(best.bits, truth.tree_branch_data()->bits);
  EXPECT_DOUBLE_EQ(best.count_sum / double(n * D), kTwoThirds);
  // a branch leaving the truth after t shared steps scores (t * 2/3 + (D - t) / 3) / D
  for (int t = 0; t < D; ++t) {
    double sum = 0.0;
    Coord v = 1;
    for (int d = 1; d <= D; ++d) {
      const int b = d <= t ? truth.tree_branch_data()->bits[d - 1] : (d == t + 1 ? 1 - truth.tree_branch_data()->bits[d - 1] : 0);
      v = 2 * v + b;
      sum += counts[v] / double(n);
    }
    EXPECT_DOUBLE_EQ(sum / D, (t * kTwoThirds + (D - t) * kThird) / D);
    EXPECT_LT(sum / D, kTwoThirds);
  }
}

TEST(TreeDp, TiesGoToSmallestBitString) {
  std::vector<std::uint32_t> counts(8, 1);
  auto best = max_average_branch(counts, 2);
  EXPECT_EQ(best.bits, (std::vector<std::uint8_t>{0, 0}));
  counts[5] = 2;
  counts[6] = 2;
  best = max_average_branch(counts, 2);
  EXPECT_EQ(best.bits, (std::vector<std::uint8_t>{0, 1}));
}

TEST(TreeDp, MatchesExhaustiveEnumeration) {
  Rng rng(77);
  for (int depth = 1; depth <= 10; ++depth) {
    for (int it = 0; it < 30; ++it) {
      const Coord nodes = (Coord{1} << (depth + 1)) - 1;
      std::vector<std::uint32_t> counts(nodes + 1);
      for (auto& c : counts) c = static_cast<std::uint32_t>(rng.below(4));
      std::uint64_t best_sum = 0;
      std::vector<std::uint8_t> best_bits;
      for (std::uint64_t b = 0; b < (std::uint64_t{1} << depth); ++b) {
        std::vector<std::uint8_t> bits(depth);
        std::uint64_t sum = 0;
        Coord v = 1;
        for (int d = 0; d < depth; ++d) {
          bits[d] = (b >> (depth - 1 - d)) & 1;
          v = 2 * v + bits[d];
          sum += counts[v];
        }
        if (best_bits.empty() || sum > best_sum) {
          best_sum = sum;
          best_bits = bits;
        }
      }
      auto dp = max_average_branch(counts, depth);
      EXPECT_EQ(dp.count_sum, best_sum);
      EXPECT_EQ(dp.bits, best_bits);
    }
  }
}

TEST(TreeLearn, RecoversRandomBranches) {
  auto f = make_qtree(8);
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto truth = f->random_member(seed);
    auto r = tree_learn(sample(*f, truth, 100, 511, seed + 1000), 8);
    recovered += *r.branch_bits == truth.tree_branch_data()->bits ? 1 : 0;
    EXPECT_GT(*r.branch_score, 0.5);
  }
  EXPECT_GE(recovered, 49);
}

TEST(TreeLearn, PreconditionsAndRejection) {
  auto flat = MeanVector::constant(kThird);
  EXPECT_THROW(tree_learn(sample_product(flat, 35, 127, 0), 6), std::invalid_argument);
  EXPECT_THROW(tree_learn(sample_product(flat, 40, 126, 0), 6), std::invalid_argument);
  EXPECT_THROW(tree_learn(sample_product(flat, 100, 127, 0), 6), NoBranchAccepted);
}

TEST(EstimatorProperty, ReportsAreDeterministic) {
  auto f = make_qprop(1.0);
  auto truth = f->random_member(4);
  auto a = separable_learn(*f, sample(*f, truth, 256, 256, 8));
  auto b = separable_learn(*f, sample(*f, truth, 256, 256, 8));
  EXPECT_EQ(a.candidate_index, b.candidate_index);
  EXPECT_EQ(a.k_reached, b.k_reached);
  EXPECT_EQ(a.estimate.values(300), b.estimate.values(300));
}

TEST(EstimatorProperty, HoeffdingEnvelopeAtThreeSamples) {
  const std::size_t n = 3, trials = 100000;
  const double thr = hoeffding_threshold(n);
  std::size_t hits = 0;
  Rng rng(123);
  for (std::size_t t = 0; t < trials; ++t) {
    int ones = 0;
    for (std::size_t i = 0; i < n; ++i) ones += rng.bernoulli(0.5) ? 1 : 0;
    hits += std::abs(ones / 3.0 - 0.5) >= thr ? 1 : 0;
  }
  const double freq = static_cast<double>(hits) / trials;
  const double sigma = std::sqrt(freq * (1 - freq) / trials);
  EXPECT_LE(freq, 2.0 / 729.0 + 3 * sigma);
  // the threshold exceeds 1/2 at n = 3, so no deviation can reach it
  EXPECT_GT(thr, 0.5);
  EXPECT_EQ(hits, 0u);
}

TEST(EstimatorProperty, HoeffdingEnvelopeWhereThresholdBinds) {
  // at n = 64 the threshold is below 1/2, so the bound has teeth
  const std::size_t n = 64, trials = 20000;
  const double thr = hoeffding_threshold(n);
  ASSERT_LT(thr, 0.5);
  std::size_t hits = 0;
  Rng rng(321);
  for (std::size_t t = 0; t < trials; ++t) {
    const double q = 0.9;
    int ones = 0;
    for (std::size_t i = 0; i < n; ++i) ones += rng.bernoulli(q) ? 1 : 0;
    hits += std::abs(ones / double(n) - q) >= thr ? 1 : 0;
  }
  EXPECT_LE(static_cast<double>(hits) / trials, 2.0 / std::pow(double(n), 6));
}
