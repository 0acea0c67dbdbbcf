#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "generators.hpp"
#include "ume/errors.hpp"
#include "ume/meanvec.hpp"

using namespace ume;
using ume::testing::random_closure;
using ume::testing::random_explicit;
using ume::testing::random_structured;
using ume::testing::random_tree;
using ume::testing::scan_violation;

namespace {
constexpr double kThird = 1.0 / 3.0;
constexpr double kTwoThirds = 2.0 / 3.0;
}  // namespace

TEST(Coord, ExplicitTailReadsTail) {
  auto v = MeanVector::explicit_tail({0.9}, 0.5);
  EXPECT_EQ(v.coord(1), 0.9);
  EXPECT_EQ(v.coord(3), 0.5);
  EXPECT_EQ(v.coord(3), v.coord(3));
}

TEST(Coord, TreeRootIsOnEveryBranch) {
  auto v = MeanVector::tree_branch({0, 0, 0});
  EXPECT_EQ(v.coord(1), kTwoThirds);
}

TEST(Coord, RightChildIsOffTheAllLeftBranch) {
  auto v = MeanVector::tree_branch({0});
  EXPECT_EQ(v.coord(3), kThird);
  for (Coord j : {1, 2, 4, 8, 16, 1024}) EXPECT_EQ(v.coord(j), kTwoThirds) << j;
}

TEST(Coord, CyclicTail) {
  auto v = MeanVector::explicit_tail({1.0}, std::vector<double>{kThird, 0.0});
  EXPECT_EQ(v.coord(2), kThird);
  EXPECT_EQ(v.coord(3), 0.0);
  EXPECT_EQ(v.coord(1001), 0.0);
}

TEST(Coord, ClosureBeyondHintThrows) {
  auto v = MeanVector::closure([](Coord j) { return 1.0 / static_cast<double>(j + 1); }, 10);
  EXPECT_DOUBLE_EQ(v.coord(10), 1.0 / 11.0);
  EXPECT_THROW(v.coord(11), HorizonExceeded);
}

TEST(Coord, TruncatedBeyondLimitThrows) {
  auto v = MeanVector::truncated({0.25, 0.75});
  EXPECT_EQ(v.coord(2), 0.75);
  EXPECT_THROW(v.coord(3), HorizonExceeded);
  EXPECT_FALSE(v.structured());
}

TEST(Coord, RejectsValuesOutsideUnitInterval) {
  EXPECT_THROW(MeanVector::explicit_tail({1.5}, 0.5), std::invalid_argument);
  EXPECT_THROW(MeanVector::explicit_tail({}, -0.1), std::invalid_argument);
  EXPECT_THROW(MeanVector::tree_branch({2}), std::invalid_argument);
  auto bad = MeanVector::closure([](Coord) { return 2.0; }, 5);
  EXPECT_THROW(bad.coord(1), std::domain_error);
  EXPECT_THROW(MeanVector::constant(0.5).coord(0), std::out_of_range);
}

TEST(BallConstraint, RadiusMustBePositive) {
  EXPECT_THROW(BallConstraint(MeanVector::constant(0.5), 0.0), std::invalid_argument);
  EXPECT_NO_THROW(BallConstraint(MeanVector::constant(0.5), 2.5));
}

TEST(PrefixLinf, Identity) {
  auto v = MeanVector::explicit_tail({0.1, 0.7}, 0.3);
  EXPECT_EQ(prefix_linf(v, v, 100), 0.0);
}

TEST(PrefixLinf, ThirdsDifferByOneThird) {
  auto a = MeanVector::explicit_tail({kThird, kTwoThirds, kThird}, kThird);
  auto b = MeanVector::explicit_tail({kThird, kThird, kThird}, kThird);
  EXPECT_DOUBLE_EQ(prefix_linf(a, b, 3), kThird);
  EXPECT_EQ(prefix_linf(a, b, 1), 0.0);
}

TEST(PrefixLinf, BinaryVectorsDifferByOne) {
  auto a = MeanVector::explicit_tail({1, 0, 1}, 0.0);
  auto b = MeanVector::explicit_tail({1, 1, 1}, 0.0);
  EXPECT_EQ(prefix_linf(a, b, 5), 1.0);
}

TEST(FirstViolation, EqualVectorsHaveNone) {
  auto a = MeanVector::tree_branch({1, 0, 1});
  auto v = first_violation(a, a, 0.0);
  EXPECT_FALSE(v.index);
  EXPECT_EQ(v.certainty, Certainty::Exact);
}

TEST(FirstViolation, TailsDiffer) {
  auto a = MeanVector::explicit_tail({kThird}, kTwoThirds);
  auto b = MeanVector::explicit_tail({kThird}, kThird);
  auto v = first_violation(a, b, 0.1);
  ASSERT_TRUE(v.index);
  EXPECT_EQ(*v.index, 2u);
  EXPECT_EQ(v.certainty, Certainty::Exact);
}

TEST(FirstViolation, DivergingTreeBranchesMatchBruteForce) {
  for (std::size_t d = 0; d <= 10; ++d) {
    std::vector<std::uint8_t> shared(d, 0);
    for (std::size_t k = 0; k < d; ++k) shared[k] = static_cast<std::uint8_t>((k * 7 + 3) % 2);
    auto left = shared, right = shared;
    left.push_back(0);
    right.push_back(1);
    auto a = MeanVector::tree_branch(left);
    auto b = MeanVector::tree_branch(right);
    auto v = first_violation(a, b, 0.1);
    ASSERT_TRUE(v.index);
    EXPECT_EQ(v.certainty, Certainty::Exact);
    const Coord scan = Coord{1} << (d + 2);
    EXPECT_EQ(*v.index, scan_violation(a, b, 0.1, scan)) << "d = " << d;
    // first off-path node of one branch lying on the other: the branch node at depth d+1
    EXPECT_EQ(*v.index, std::min(a.tree_branch_data()->label_at(d + 1), b.tree_branch_data()->label_at(d + 1)));
  }
}

TEST(FirstViolation, ClosureIsHorizonLimited) {
  auto c = MeanVector::closure([](Coord) { return 0.5; }, 1000);
  auto v = first_violation(c, MeanVector::constant(0.5), 0.0, 500);
  EXPECT_FALSE(v.index);
  EXPECT_EQ(v.certainty, Certainty::HorizonLimited);
  EXPECT_EQ(v.searched_to, 500u);
  auto w = first_violation(c, MeanVector::constant(0.5), 0.0, 5000);
  EXPECT_EQ(w.searched_to, 1000u);
}

TEST(IntersectBallIntervals, SingleBall) {
  std::vector<BallConstraint> cs{{MeanVector::constant(0.5), 0.25}};
  auto iv = intersect_ball_intervals(cs, 1);
  ASSERT_TRUE(iv);
  EXPECT_EQ(iv->lo, 0.25);
  EXPECT_EQ(iv->hi, 0.75);
}

TEST(IntersectBallIntervals, DisjointBallsAreEmpty) {
  std::vector<BallConstraint> cs{{MeanVector::constant(0.5), 0.25}, {MeanVector::constant(0.9), 0.1}};
  EXPECT_FALSE(intersect_ball_intervals(cs, 7));
}

TEST(IntersectBallIntervals, ClampsToUnitInterval) {
  std::vector<BallConstraint> cs{{MeanVector::constant(0.5), 0.5}};
  auto iv = intersect_ball_intervals(cs, 1);
  ASSERT_TRUE(iv);
  EXPECT_EQ(iv->lo, 0.0);
  EXPECT_EQ(iv->hi, 1.0);
  EXPECT_THROW(intersect_ball_intervals({}, 1), std::invalid_argument);
}

TEST(Satisfies, LimitedCenterChecksOnlyItsRange) {
  auto center = MeanVector::truncated({0.5, 0.5});
  EXPECT_TRUE(satisfies(MeanVector::explicit_tail({0.6, 0.4}, 1.0), {center, 0.1}));
  EXPECT_FALSE(satisfies(MeanVector::explicit_tail({0.7}, 0.5), {center, 0.1}));
  EXPECT_THROW(satisfies(MeanVector::truncated({0.5}), {center, 0.1}), HorizonExceeded);
  EXPECT_THROW(satisfies(center, {MeanVector::constant(0.5), 0.1}), HorizonExceeded);
}

// ---------------------------------------------------------------------------
// properties

TEST(MeanVecProperty, PrefixLinfIsAPseudometricMonotoneInJ) {
  Rng rng(11);
  for (int it = 0; it < 300; ++it) {
    auto a = random_structured(rng), b = random_structured(rng), c = random_structured(rng);
    const Coord J = 1 + rng.below(200);
    const double ab = prefix_linf(a, b, J), ba = prefix_linf(b, a, J);
    EXPECT_EQ(ab, ba);
    EXPECT_LE(ab, prefix_linf(a, c, J) + prefix_linf(c, b, J) + 1e-15);
    EXPECT_LE(prefix_linf(a, b, J), prefix_linf(a, b, J + 1 + rng.below(50)));
    double brute = 0.0;
    for (Coord j = 1; j <= J; ++j) brute = std::max(brute, std::abs(a.coord(j) - b.coord(j)));
    EXPECT_EQ(ab, brute);
  }
}

TEST(MeanVecProperty, ExactFirstViolationMatchesLongScan) {
  Rng rng(12);
  std::vector<std::pair<MeanVector, MeanVector>> fixtures;
  for (int it = 0; it < 12; ++it) fixtures.emplace_back(random_explicit(rng), random_explicit(rng));
  for (int it = 0; it < 12; ++it) fixtures.emplace_back(random_explicit(rng), random_tree(rng));
  for (int it = 0; it < 12; ++it) fixtures.emplace_back(random_tree(rng), random_tree(rng));
  for (const auto& [a, b] : fixtures) {
    for (double thr : {0.0, 0.2, 0.5}) {
      const auto v = first_violation(a, b, thr);
      ASSERT_EQ(v.certainty, Certainty::Exact);
      EXPECT_EQ(v.index.value_or(0), scan_violation(a, b, thr, 1'000'000));
    }
  }
}

TEST(MeanVecProperty, SupDistanceMatchesScan) {
  Rng rng(13);
  for (int it = 0; it < 500; ++it) {
    auto a = random_structured(rng), b = random_structured(rng);
    double brute = 0.0;
    for (Coord j = 1; j <= (1u << 14); ++j) brute = std::max(brute, std::abs(a.coord(j) - b.coord(j)));
    EXPECT_EQ(*sup_distance(a, b), brute);
  }
}

TEST(MeanVecProperty, RepresentativesCoverEveryValuePair) {
  Rng rng(14);
  for (int it = 0; it < 300; ++it) {
    auto a = random_structured(rng), b = random_structured(rng);
    const auto reps = representative_coords(a, b);
    std::set<std::pair<double, double>> seen;
    for (Coord r : reps) seen.emplace(a.coord(r), b.coord(r));
    for (Coord j = 1; j <= 4096; ++j) {
      ASSERT_TRUE(seen.count({a.coord(j), b.coord(j)})) << "coordinate " << j;
    }
  }
}

TEST(MeanVecProperty, TreeOnSetMatchesRecursiveWalk) {
  Rng rng(15);
  for (int it = 0; it < 40; ++it) {
    const std::size_t depth = 1 + rng.below(16);
    std::vector<std::uint8_t> bits(depth);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(2));
    auto v = MeanVector::tree_branch(bits);

    // walk the tree from the root, descending only into the branch child
    std::set<Coord> on;
    std::function<void(Coord, std::size_t)> walk = [&](Coord node, std::size_t d) {
      on.insert(node);
      if (d == depth) return;
      walk(bits[d] ? 2 * node + 1 : 2 * node, d + 1);
    };
    walk(1, 0);
    const Coord last = (Coord{1} << (depth + 1)) - 1;
    for (Coord j = 1; j <= last; ++j) {
      EXPECT_EQ(v.coord(j) == kTwoThirds, on.count(j) == 1) << "label " << j;
    }
  }
}

TEST(MeanVecProperty, IntersectionIsNeverFalselyEmpty) {
  Rng rng(16);
  for (int it = 0; it < 2000; ++it) {
    // build constraints around a witness so the intersection is known to be nonempty at j
    const double witness = rng.uniform();
    std::vector<BallConstraint> cs;
    const std::size_t count = 1 + rng.below(4);
    for (std::size_t k = 0; k < count; ++k) {
      const double r = 0.01 + 0.5 * rng.uniform();
      const double center = std::clamp(witness + (2 * rng.uniform() - 1) * r, 0.0, 1.0);
      if (std::abs(center - witness) > r) continue;
      cs.emplace_back(MeanVector::constant(center), r);
    }
    if (cs.empty()) continue;
    auto iv = intersect_ball_intervals(cs, 1 + rng.below(10));
    ASSERT_TRUE(iv);
    EXPECT_TRUE(iv->contains(witness));
  }
}

TEST(MeanVecProperty, ClosureFirstViolationMatchesScanWithinHorizon) {
  Rng rng(17);
  for (int it = 0; it < 200; ++it) {
    auto a = random_closure(rng, 300);
    auto b = random_structured(rng);
    const auto v = first_violation(a, b, 0.5, 250);
    EXPECT_EQ(v.certainty, Certainty::HorizonLimited);
    EXPECT_EQ(v.index.value_or(0), scan_violation(a, b, 0.5, 250));
  }
}
