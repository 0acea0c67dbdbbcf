#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace ume {

/// 1-based coordinate index into [0,1]^N.
using Coord = std::uint64_t;

/// Largest coordinate scanned by generic (non-structural) searches unless told otherwise.
inline constexpr Coord kDefaultHorizon = 1'000'000;

enum class VectorKind { ExplicitTail, TreeBranch, Closure };

/// EXACT: the answer holds over every coordinate. HORIZON_LIMITED: only up to a scanned range.
enum class Certainty { Exact, HorizonLimited };

/// prefix followed by `tail` repeated cyclically. A single-entry tail is the usual
/// constant tail; longer cycles describe periodic families such as Q_round.
/// When `limit` is set the vector is only known up to that coordinate.
struct ExplicitTail {
  std::vector<double> prefix;
  std::vector<double> tail;
  std::optional<Coord> limit;
};

/// Mean vector of a binary tree labelled in level order (root 1, children of k are
/// 2k and 2k+1): nodes on one infinite root path take `on`, all others `off`.
struct TreeBranch {
  std::vector<std::uint8_t> bits;  // b_1, b_2, ... (0 = left child, 1 = right child)
  std::uint8_t extension = 0;      // bit used for every depth past bits.size()
  double on = 2.0 / 3.0;
  double off = 1.0 / 3.0;

  /// Branch bit at depth d >= 1.
  std::uint8_t bit(std::size_t depth) const {
    return depth <= bits.size() ? bits[depth - 1] : extension;
  }
  /// Label of the branch node at depth d (the root is depth 0). Requires d <= 62.
  Coord label_at(std::size_t depth) const;
  bool on_path(Coord j) const;
};

/// Arbitrary coordinate function, certified only up to `horizon`.
struct Closure {
  std::function<double(Coord)> fn;
  Coord horizon = 0;
};

/// Immutable element of [0,1]^N. Copies share state, so vectors are cheap to pass
/// around and safe to read from several threads.
class MeanVector {
 public:
  static MeanVector constant(double value);
  static MeanVector explicit_tail(std::vector<double> prefix, double tail);
  static MeanVector explicit_tail(std::vector<double> prefix, std::vector<double> tail_cycle);
  /// Known only on coordinates 1..values.size(); later reads raise HorizonExceeded.
  static MeanVector truncated(std::vector<double> values);
  static MeanVector tree_branch(std::vector<std::uint8_t> bits, double on = 2.0 / 3.0,
                                double off = 1.0 / 3.0, std::uint8_t extension = 0);
  static MeanVector closure(std::function<double(Coord)> fn, Coord horizon_hint);

  VectorKind kind() const;

  /// q_j for j >= 1. Throws HorizonExceeded past limit().
  double coord(Coord j) const;

  /// Coordinates 1..count.
  std::vector<double> values(Coord count) const;

  /// Largest certified coordinate, or nullopt when every coordinate is known.
  std::optional<Coord> limit() const;

  /// True when every coordinate is known and tails admit exact reasoning.
  bool structured() const { return !limit().has_value(); }

  const ExplicitTail* explicit_tail_data() const { return std::get_if<ExplicitTail>(repr_.get()); }
  const TreeBranch* tree_branch_data() const { return std::get_if<TreeBranch>(repr_.get()); }
  const Closure* closure_data() const { return std::get_if<Closure>(repr_.get()); }

 private:
  using Repr = std::variant<ExplicitTail, TreeBranch, Closure>;
  explicit MeanVector(Repr repr);

  std::shared_ptr<const Repr> repr_;
};

struct BallConstraint {
  MeanVector center;
  double radius;

  BallConstraint(MeanVector c, double r);
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
  bool empty() const { return lo > hi; }
};

/// [c - r, c + r] clamped to [0,1], with endpoints adjusted so that every double x inside
/// satisfies |x - c| <= r as evaluated in floating point.
Interval ball_interval(double center, double radius);

struct Violation {
  std::optional<Coord> index;
  Certainty certainty = Certainty::Exact;
  Coord searched_to = 0;  // last coordinate scanned when the answer is horizon limited
};

/// max_{1 <= j <= J} |a_j - b_j|.
double prefix_linf(const MeanVector& a, const MeanVector& b, Coord J);

/// Exact sup_j |a_j - b_j| over all coordinates; nullopt unless both vectors are structured.
std::optional<double> sup_distance(const MeanVector& a, const MeanVector& b);

/// Smallest j with |a_j - b_j| > threshold. Exact for structured pairs, otherwise the
/// scan stops at min(horizon, limit(a), limit(b)).
Violation first_violation(const MeanVector& a, const MeanVector& b, double threshold,
                          Coord horizon = kDefaultHorizon);

/// Intersection over the constraints of [center_j - r, center_j + r], clamped to [0,1];
/// nullopt when empty.
std::optional<Interval> intersect_ball_intervals(std::span<const BallConstraint> constraints, Coord j);

/// ||v - center||_inf <= radius, decided over the coordinates the center certifies.
/// Throws HorizonExceeded when v cannot be evaluated that far, or when neither side is
/// structured and the range exceeds `horizon`.
bool satisfies(const MeanVector& v, const BallConstraint& ball, Coord horizon = kDefaultHorizon);

/// Coordinates whose values cover every (a_j, b_j) pair: for each j there is an r <= j
/// in the list with (a_r, b_r) == (a_j, b_j). Sorted. Both vectors must be structured.
std::vector<Coord> representative_coords(const MeanVector& a, const MeanVector& b);

}  // namespace ume
