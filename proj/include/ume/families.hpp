#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ume/meanvec.hpp"

namespace ume {

/// n i.i.d. draws truncated to coordinates 1..J, stored row-major.
class SampleSet {
 public:
  SampleSet(std::size_t rows, Coord horizon, std::vector<std::uint8_t> bits, std::uint64_t seed);

  std::size_t rows() const { return rows_; }
  Coord horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }

  /// X^{(row)}_j with row 0-based and j 1-based.
  std::uint8_t at(std::size_t row, Coord j) const { return bits_[row * horizon_ + (j - 1)]; }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return {bits_.data() + r * horizon_, static_cast<std::size_t>(horizon_)};
  }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Number of ones in each column 1..J (index j-1).
  std::vector<std::uint32_t> column_counts() const;

  SampleSet slice_rows(std::size_t first, std::size_t count) const;

 private:
  std::size_t rows_;
  Coord horizon_;
  std::vector<std::uint8_t> bits_;
  std::uint64_t seed_;
};

/// Candidates q^1, q^2, ... of a countable epsilon-cover, in a fixed order.
/// Owned by a single consumer.
class CoverEnumerator {
 public:
  explicit CoverEnumerator(double epsilon) : epsilon_(epsilon) {}
  virtual ~CoverEnumerator() = default;

  double epsilon() const { return epsilon_; }

  /// Next candidate, or nullopt once a finite cover is exhausted.
  virtual std::optional<MeanVector> next() = 0;

  class ProductGrid;
  /// Non-null when the candidates are the lexicographic product of per-coordinate value
  /// lists (coordinate 1 most significant) followed by a fixed tail.
  virtual const ProductGrid* product_grid() const { return nullptr; }

 private:
  double epsilon_;
};

class CoverEnumerator::ProductGrid {
 public:
  virtual ~ProductGrid() = default;
  /// Number of coordinates carrying a grid; later coordinates equal tail_value().
  virtual Coord length() const = 0;
  virtual double tail_value() const = 0;
  /// Grid values of coordinate j in enumeration order; never empty.
  virtual std::vector<double> values_at(Coord j) const = 0;
  /// Size of values_at(j) without building it.
  virtual std::uint64_t size_at(Coord j) const = 0;
  /// values_at(j).front() without building the list.
  virtual double first_value(Coord j) const { return values_at(j).front(); }

  /// Candidate chosen by per-coordinate positions; trailing tail-valued entries are dropped.
  MeanVector candidate(std::span<const double> prefix) const;
};

/// A collection Q of distributions on {0,1}^N, described through its mean vectors.
class Family {
 public:
  virtual ~Family() = default;

  /// Round-trippable description, e.g. "qprop:c=1,len=32".
  virtual std::string spec() const = 0;

  /// Membership of a mean vector, checked to `horizon` plus structural tail rules.
  virtual bool contains(const MeanVector& q, Coord horizon) const = 0;

  /// Throws NotSeparable for families without countable covers.
  virtual std::unique_ptr<CoverEnumerator> cover(double epsilon) const;

  /// Some member within every ball, or nullopt when the intersection is provably empty.
  virtual std::optional<MeanVector> find_member(std::span<const BallConstraint> constraints,
                                                Coord horizon) const = 0;

  /// Reproducible ground truth drawn from the family.
  virtual MeanVector random_member(std::uint64_t seed) const = 0;
};

using FamilyPtr = std::shared_ptr<const Family>;

/// |q_j - 1/2| <= c / sqrt(j). Ground truths carry `truth_len` perturbed coordinates.
FamilyPtr make_qprop(double c, std::size_t truth_len = 32);
/// Mean vectors in {0,1}^N.
FamilyPtr make_qbin(std::size_t truth_len = 64);
/// Product measures with means in {1/3, 2/3}^N.
FamilyPtr make_qtert(std::size_t truth_len = 64);
/// One level-order tree branch at 2/3, every other node at 1/3.
FamilyPtr make_qtree(std::size_t truth_len = 64);
/// q_{2m-1} in {1/3, 2/3} and q_{2m} = 1[q_{2m-1} = 2/3]. truth_len counts pairs.
FamilyPtr make_qround(std::size_t truth_len = 32);
FamilyPtr make_countable_list(std::vector<MeanVector> members);
/// `count` distinct vectors with `len` prefix entries from {0.1, 0.3, 0.5, 0.7, 0.9} and
/// tail 0.5, so any two members are at least 0.2 apart in sup norm.
FamilyPtr make_generated_list(std::size_t count, std::size_t len, std::uint64_t seed);
FamilyPtr make_union(std::vector<FamilyPtr> parts);

/// Members of a CountableList family, or nullptr for other families.
const std::vector<MeanVector>* list_members(const Family& f);
/// Parts of a UnionOf family, or nullptr.
const std::vector<FamilyPtr>* union_parts(const Family& f);

/// Rows of independent Bernoulli(truth_j) draws. Throws TruthNotInFamily.
SampleSet sample(const Family& f, const MeanVector& truth, std::size_t n, Coord J, std::uint64_t seed);
/// Same draws without the membership check.
SampleSet sample_product(const MeanVector& truth, std::size_t n, Coord J, std::uint64_t seed);

std::unique_ptr<CoverEnumerator> cover(const Family& f, double epsilon);

std::optional<MeanVector> find_member_in_balls(const Family& f,
                                               std::span<const BallConstraint> constraints, Coord horizon);

/// T(p) = sup_{j <= horizon} log(j+1) / log(1/p_j); p_j = 0 contributes 0, p_j = 1 gives +inf.
struct LgcValue {
  double value;
  Coord horizon;
};
LgcValue lgc_functional(const MeanVector& p, Coord horizon);

/// Rows are draws, columns are coordinates; header x1..xJ.
void write_sample_csv(std::ostream& out, const SampleSet& s);

}  // namespace ume
