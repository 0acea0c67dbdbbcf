#include "ume/families.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "ume/errors.hpp"
#include "ume/format.hpp"
#include "ume/rng.hpp"

namespace ume {

// ---------------------------------------------------------------------------
// SampleSet

SampleSet::SampleSet(std::size_t rows, Coord horizon, std::vector<std::uint8_t> bits, std::uint64_t seed)
    : rows_(rows), horizon_(horizon), bits_(std::move(bits)), seed_(seed) {
  if (bits_.size() != rows_ * horizon_) throw std::invalid_argument("sample bits do not match rows x horizon");
}

std::vector<std::uint32_t> SampleSet::column_counts() const {
  std::vector<std::uint32_t> counts(horizon_, 0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::uint8_t* row_bits = bits_.data() + r * horizon_;
    for (Coord j = 0; j < horizon_; ++j) counts[j] += row_bits[j];
  }
  return counts;
}

SampleSet SampleSet::slice_rows(std::size_t first, std::size_t count) const {
  if (first + count > rows_) throw std::out_of_range("row slice beyond sample");
  auto begin = bits_.begin() + static_cast<std::ptrdiff_t>(first * horizon_);
  std::vector<std::uint8_t> bits(begin, begin + static_cast<std::ptrdiff_t>(count * horizon_));
  return SampleSet(count, horizon_, std::move(bits), seed_);
}

MeanVector CoverEnumerator::ProductGrid::candidate(std::span<const double> prefix) const {
  std::size_t keep = prefix.size();
  while (keep > 0 && prefix[keep - 1] == tail_value()) --keep;
  return MeanVector::explicit_tail(std::vector<double>(prefix.begin(), prefix.begin() + keep), tail_value());
}

std::unique_ptr<CoverEnumerator> Family::cover(double) const {
  throw NotSeparable(spec() + " admits no countable epsilon-cover of its mean vectors");
}

namespace {

constexpr double kThird = 1.0 / 3.0;
constexpr double kTwoThirds = 2.0 / 3.0;

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) { return derive_seed({seed, tag}); }

bool is_tail_region_constant(const ExplicitTail& e, double value) {
  return std::all_of(e.tail.begin(), e.tail.end(), [&](double t) { return t == value; });
}

/// Constraints whose centers are known at coordinate j.
std::optional<Interval> active_interval(std::span<const BallConstraint> constraints, Coord j) {
  Interval out{0.0, 1.0};
  for (const auto& ball : constraints) {
    if (auto lim = ball.center.limit(); lim && j > *lim) continue;
    const Interval iv = ball_interval(ball.center.coord(j), ball.radius);
    out.lo = std::max(out.lo, iv.lo);
    out.hi = std::min(out.hi, iv.hi);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

// ---------------------------------------------------------------------------
// Families decided one coordinate block at a time (Q_prop, Q_bin, Q_tert, Q_round).

class CoordinatewiseFamily : public Family {
 public:
  std::optional<MeanVector> find_member(std::span<const BallConstraint> constraints,
                                        Coord horizon) const override;

 protected:
  virtual std::size_t block() const { return 1; }
  /// Member values for coordinates j0 .. j0+block-1 inside `allowed`.
  virtual std::optional<std::vector<double>> choose(Coord j0, std::span<const Interval> allowed) const = 0;
  /// A tail cycle (one entry per phase, block aligned) valid for every later coordinate.
  virtual std::optional<std::vector<double>> choose_tail(std::span<const Interval> allowed) const {
    std::vector<double> out;
    for (std::size_t k = 0; k < allowed.size(); k += block()) {
      auto part = choose(0, allowed.subspan(k, block()));
      if (!part) return std::nullopt;
      out.insert(out.end(), part->begin(), part->end());
    }
    return out;
  }
};

std::optional<MeanVector> CoordinatewiseFamily::find_member(std::span<const BallConstraint> constraints,
                                                            Coord) const {
  const std::size_t blk = block();
  Coord scan_end = 0;
  std::size_t period = blk;
  for (const auto& ball : constraints) {
    if (ball.center.kind() == VectorKind::TreeBranch) {
      throw HorizonExceeded(spec() + " cannot decide ball intersections around tree-structured centers");
    }
    if (auto lim = ball.center.limit()) {
      scan_end = std::max(scan_end, *lim);
    } else {
      const auto* e = ball.center.explicit_tail_data();
      scan_end = std::max<Coord>(scan_end, e->prefix.size());
      period = std::lcm(period, e->tail.size());
    }
  }
  scan_end = (scan_end + blk - 1) / blk * blk;

  std::vector<double> prefix;
  prefix.reserve(scan_end);
  std::vector<Interval> allowed(blk);
  for (Coord j0 = 1; j0 <= scan_end; j0 += blk) {
    for (std::size_t k = 0; k < blk; ++k) {
      auto iv = active_interval(constraints, j0 + k);
      if (!iv) return std::nullopt;
      allowed[k] = *iv;
    }
    auto values = choose(j0, allowed);
    if (!values) return std::nullopt;
    prefix.insert(prefix.end(), values->begin(), values->end());
  }

  // past scan_end only unlimited centers constrain, and they repeat with `period`
  std::vector<Interval> phases(period);
  for (std::size_t k = 0; k < period; ++k) {
    auto iv = active_interval(constraints, scan_end + 1 + k);
    if (!iv) return std::nullopt;
    phases[k] = *iv;
  }
  auto tail = choose_tail(phases);
  if (!tail) return std::nullopt;
  return MeanVector::explicit_tail(std::move(prefix), std::move(*tail));
}

// ---------------------------------------------------------------------------
// Q_prop

Interval qprop_interval(double c, Coord j) {
  const double r = c / std::sqrt(static_cast<double>(j));
  return {std::max(0.0, 0.5 - r), std::min(1.0, 0.5 + r)};
}

/// Smallest and largest m with m * step inside `iv`.
std::pair<long long, long long> grid_range(const Interval& iv, double step) {
  auto first = static_cast<long long>(std::ceil(iv.lo / step));
  auto last = static_cast<long long>(std::floor(iv.hi / step));
  while (first * step < iv.lo) ++first;
  while ((first - 1) * step >= iv.lo) --first;
  while (last * step > iv.hi) --last;
  while ((last + 1) * step <= iv.hi) ++last;
  return {first, last};
}

/// Multiples of `step` inside `iv`, nearest to 1/2 first (ties: smaller value first).
std::vector<double> centered_grid(const Interval& iv, double step) {
  const auto [first, last] = grid_range(iv, step);
  std::vector<double> out;
  for (long long m = first; m <= last; ++m) out.push_back(m * step);
  std::stable_sort(out.begin(), out.end(),
                   [](double a, double b) { return std::abs(a - 0.5) < std::abs(b - 0.5); });
  return out;
}

class QpropCover final : public CoverEnumerator, public CoverEnumerator::ProductGrid {
 public:
  QpropCover(double c, double epsilon)
      : CoverEnumerator(epsilon),
        c_(c),
        step_(epsilon / 2.0),
        length_(static_cast<Coord>(std::ceil(c * c / (epsilon * epsilon)))) {}

  const CoverEnumerator::ProductGrid* product_grid() const override { return this; }

  Coord length() const override { return length_; }
  double tail_value() const override { return 0.5; }
  std::vector<double> values_at(Coord j) const override { return centered_grid(qprop_interval(c_, j), step_); }
  std::uint64_t size_at(Coord j) const override {
    const auto [first, last] = grid_range(qprop_interval(c_, j), step_);
    return static_cast<std::uint64_t>(last - first + 1);
  }
  double first_value(Coord j) const override {
    const auto [first, last] = grid_range(qprop_interval(c_, j), step_);
    const auto below = std::clamp(static_cast<long long>(std::floor(0.5 / step_)), first, last);
    const auto above = std::clamp(below + 1, first, last);
    const double a = below * step_, b = above * step_;
    return std::abs(b - 0.5) < std::abs(a - 0.5) ? b : a;
  }

  std::optional<MeanVector> next() override {
    if (exhausted_) return std::nullopt;
    if (grids_.empty()) {
      grids_.reserve(length_);
      for (Coord j = 1; j <= length_; ++j) grids_.push_back(values_at(j));
      positions_.assign(length_, 0);
    }
    std::vector<double> prefix(length_);
    for (Coord k = 0; k < length_; ++k) prefix[k] = grids_[k][positions_[k]];
    // odometer: the last coordinate varies fastest
    std::size_t k = length_;
    for (; k > 0; --k) {
      if (++positions_[k - 1] < grids_[k - 1].size()) break;
      positions_[k - 1] = 0;
    }
    if (k == 0) exhausted_ = true;
    return candidate(prefix);
  }

 private:
  double c_;
  double step_;
  Coord length_;
  std::vector<std::vector<double>> grids_;
  std::vector<std::size_t> positions_;
  bool exhausted_ = false;
};

class Qprop final : public CoordinatewiseFamily {
 public:
  Qprop(double c, std::size_t truth_len) : c_(c), truth_len_(truth_len) {
    if (!(c > 0.0)) throw std::invalid_argument("qprop needs c > 0");
  }

  std::string spec() const override { return "qprop:c=" + shortest(c_) + ",len=" + std::to_string(truth_len_); }

  bool contains(const MeanVector& q, Coord horizon) const override {
    if (const auto* t = q.tree_branch_data()) return t->on == 0.5 && t->off == 0.5;
    Coord end = horizon;
    if (const auto* e = q.explicit_tail_data(); e && !e->limit) {
      // intervals shrink to {1/2}, so an infinite tail must be exactly 1/2
      if (!is_tail_region_constant(*e, 0.5)) return false;
      end = e->prefix.size();
    } else if (auto lim = q.limit()) {
      end = std::min(end, *lim);
    }
    for (Coord j = 1; j <= end; ++j) {
      if (!qprop_interval(c_, j).contains(q.coord(j))) return false;
    }
    return true;
  }

  std::unique_ptr<CoverEnumerator> cover(double epsilon) const override {
    if (!(epsilon > 0.0)) throw std::invalid_argument("qprop covers need epsilon > 0");
    return std::make_unique<QpropCover>(c_, epsilon);
  }

  MeanVector random_member(std::uint64_t seed) const override {
    Rng rng(stream_seed(seed, 0x9901));
    std::vector<double> prefix;
    prefix.reserve(truth_len_);
    for (Coord j = 1; j <= truth_len_; ++j) {
      auto grid = centered_grid(qprop_interval(c_, j), 1.0 / 64.0);
      std::sort(grid.begin(), grid.end());
      prefix.push_back(grid[rng.below(grid.size())]);
    }
    return MeanVector::explicit_tail(std::move(prefix), 0.5);
  }

 protected:
  std::optional<std::vector<double>> choose(Coord j0, std::span<const Interval> allowed) const override {
    const Interval fam = qprop_interval(c_, j0);
    const double lo = std::max(fam.lo, allowed[0].lo);
    const double hi = std::min(fam.hi, allowed[0].hi);
    if (lo > hi) return std::nullopt;
    return std::vector<double>{std::clamp(0.5, lo, hi)};
  }

  std::optional<std::vector<double>> choose_tail(std::span<const Interval> allowed) const override {
    for (const auto& iv : allowed) {
      if (!iv.contains(0.5)) return std::nullopt;
    }
    return std::vector<double>{0.5};
  }

 private:
  double c_;
  std::size_t truth_len_;
};

// ---------------------------------------------------------------------------
// Families whose coordinate blocks come from a finite pattern list.

class PatternFamily final : public CoordinatewiseFamily {
 public:
  PatternFamily(std::string name, std::vector<std::vector<double>> patterns, std::size_t truth_len)
      : name_(std::move(name)), patterns_(std::move(patterns)), truth_len_(truth_len) {}

  std::string spec() const override { return name_ + ":len=" + std::to_string(truth_len_); }

  bool contains(const MeanVector& q, Coord horizon) const override {
    const std::size_t blk = block();
    if (const auto* t = q.tree_branch_data(); t && blk == 1) {
      return valid_value(t->on) && valid_value(t->off);
    }
    Coord end = horizon;
    if (const auto* e = q.explicit_tail_data(); e && !e->limit) {
      // coordinates past this extent repeat an already checked (parity, phase) pair
      end = e->prefix.size() + std::lcm(blk, e->tail.size()) + blk;
    } else if (auto lim = q.limit()) {
      end = std::min(end, *lim);
    }
    std::vector<double> values(blk);
    for (Coord j0 = 1; j0 + blk - 1 <= end; j0 += blk) {
      for (std::size_t k = 0; k < blk; ++k) values[k] = q.coord(j0 + k);
      if (std::find(patterns_.begin(), patterns_.end(), values) == patterns_.end()) return false;
    }
    return true;
  }

  MeanVector random_member(std::uint64_t seed) const override {
    Rng rng(stream_seed(seed, 0x9902));
    std::vector<double> prefix;
    for (std::size_t k = 0; k < truth_len_; ++k) {
      const auto& p = patterns_[rng.below(patterns_.size())];
      prefix.insert(prefix.end(), p.begin(), p.end());
    }
    return MeanVector::explicit_tail(std::move(prefix), patterns_[rng.below(patterns_.size())]);
  }

 protected:
  std::size_t block() const override { return patterns_.front().size(); }

  std::optional<std::vector<double>> choose(Coord, std::span<const Interval> allowed) const override {
    for (const auto& p : patterns_) {
      bool ok = true;
      for (std::size_t k = 0; k < p.size() && ok; ++k) ok = allowed[k].contains(p[k]);
      if (ok) return p;
    }
    return std::nullopt;
  }

 private:
  bool valid_value(double v) const {
    return std::any_of(patterns_.begin(), patterns_.end(), [&](const auto& p) { return p[0] == v; });
  }

  std::string name_;
  std::vector<std::vector<double>> patterns_;
  std::size_t truth_len_;
};

// ---------------------------------------------------------------------------
// Q_tree

class Qtree final : public Family {
 public:
  explicit Qtree(std::size_t truth_len) : truth_len_(truth_len) {}

  std::string spec() const override { return "qtree:len=" + std::to_string(truth_len_); }

  bool contains(const MeanVector& q, Coord) const override {
    const auto* t = q.tree_branch_data();
    return t && t->on == kTwoThirds && t->off == kThird;
  }

  MeanVector random_member(std::uint64_t seed) const override {
    Rng rng(stream_seed(seed, 0x9903));
    std::vector<std::uint8_t> bits(truth_len_);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bits() >> 63);
    return MeanVector::tree_branch(std::move(bits));
  }

  std::optional<MeanVector> find_member(std::span<const BallConstraint> constraints,
                                        Coord horizon) const override;

 private:
  std::size_t truth_len_;
};

std::optional<MeanVector> Qtree::find_member(std::span<const BallConstraint> constraints, Coord horizon) const {
  constexpr int kMaxDepth = 20;
  constexpr int kMaxLeafChecks = 64;
  if (horizon == 0) throw HorizonExceeded("tree search needs a positive horizon");
  int depth = 0;
  while (depth < kMaxDepth && (Coord{1} << (depth + 2)) - 1 <= horizon) ++depth;
  const Coord nodes = (Coord{1} << (depth + 1)) - 1;
  const Coord first_leaf = Coord{1} << depth;

  // on_ok: 2/3 allowed at the node; off_ok: 1/3 allowed
  std::vector<std::uint8_t> on_ok(nodes + 1, 1), off_ok(nodes + 1, 1);
  for (const auto& ball : constraints) {
    Coord end = nodes;
    if (auto lim = ball.center.limit()) end = std::min(end, *lim);
    for (Coord j = 1; j <= end; ++j) {
      const double c = ball.center.coord(j);
      if (std::abs(kTwoThirds - c) > ball.radius) on_ok[j] = 0;
      if (std::abs(kThird - c) > ball.radius) off_ok[j] = 0;
    }
  }
  // clear: whole subtree may stay off the branch; feasible: a branch through j exists
  std::vector<std::uint8_t> clear(nodes + 1), feasible(nodes + 1);
  for (Coord j = nodes; j >= 1; --j) {
    if (j >= first_leaf) {
      clear[j] = off_ok[j];
      feasible[j] = on_ok[j];
    } else {
      const Coord l = 2 * j, r = 2 * j + 1;
      clear[j] = off_ok[j] && clear[l] && clear[r];
      feasible[j] = on_ok[j] && ((feasible[l] && clear[r]) || (feasible[r] && clear[l]));
    }
  }
  if (!feasible[1]) return std::nullopt;

  // feasible leaves in lexicographic order; confirm each against the full constraints
  int checks = 0;
  std::vector<std::uint8_t> bits;
  std::optional<MeanVector> found;
  std::function<bool(Coord)> walk = [&](Coord j) -> bool {
    if (j >= first_leaf) {
      if (++checks > kMaxLeafChecks) {
        throw HorizonExceeded("tree ball intersection undecided past horizon " + std::to_string(horizon));
      }
      auto candidate = MeanVector::tree_branch(bits);
      for (const auto& ball : constraints) {
        if (!satisfies(candidate, ball, horizon)) return false;
      }
      found = std::move(candidate);
      return true;
    }
    const Coord l = 2 * j, r = 2 * j + 1;
    if (feasible[l] && clear[r]) {
      bits.push_back(0);
      if (walk(l)) return true;
      bits.pop_back();
    }
    if (feasible[r] && clear[l]) {
      bits.push_back(1);
      if (walk(r)) return true;
      bits.pop_back();
    }
    return false;
  };
  if (walk(1)) return found;
  throw HorizonExceeded("tree ball intersection undecided past horizon " + std::to_string(horizon));
}

// ---------------------------------------------------------------------------
// CountableList

class ListCover final : public CoverEnumerator {
 public:
  ListCover(std::vector<MeanVector> members, double epsilon)
      : CoverEnumerator(epsilon), members_(std::move(members)) {}
  std::optional<MeanVector> next() override {
    if (pos_ >= members_.size()) return std::nullopt;
    return members_[pos_++];
  }

 private:
  std::vector<MeanVector> members_;
  std::size_t pos_ = 0;
};

bool same_vector(const MeanVector& a, const MeanVector& b, Coord horizon) {
  if (auto d = sup_distance(a, b)) return *d == 0.0;
  return !first_violation(a, b, 0.0, horizon).index.has_value();
}

class CountableList final : public Family {
 public:
  CountableList(std::vector<MeanVector> members, std::string spec)
      : members_(std::move(members)), spec_(std::move(spec)) {
    if (members_.empty()) throw std::invalid_argument("countable list needs at least one member");
  }

  std::string spec() const override { return spec_; }
  const std::vector<MeanVector>& members() const { return members_; }

  bool contains(const MeanVector& q, Coord horizon) const override {
    return std::any_of(members_.begin(), members_.end(), [&](const auto& m) { return same_vector(m, q, horizon); });
  }

  std::unique_ptr<CoverEnumerator> cover(double epsilon) const override {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("cover epsilon must be non-negative");
    return std::make_unique<ListCover>(members_, epsilon);
  }

  std::optional<MeanVector> find_member(std::span<const BallConstraint> constraints,
                                        Coord horizon) const override {
    for (const auto& m : members_) {
      const bool ok = std::all_of(constraints.begin(), constraints.end(),
                                  [&](const auto& ball) { return satisfies(m, ball, horizon); });
      if (ok) return m;
    }
    return std::nullopt;
  }

  MeanVector random_member(std::uint64_t seed) const override {
    Rng rng(stream_seed(seed, 0x9904));
    return members_[rng.below(members_.size())];
  }

 private:
  std::vector<MeanVector> members_;
  std::string spec_;
};

// ---------------------------------------------------------------------------
// UnionOf

class UnionCover final : public CoverEnumerator {
 public:
  UnionCover(std::vector<std::unique_ptr<CoverEnumerator>> parts, double epsilon)
      : CoverEnumerator(epsilon), parts_(std::move(parts)), live_(parts_.size(), true) {}

  std::optional<MeanVector> next() override {
    for (std::size_t tries = 0; tries < parts_.size(); ++tries) {
      const std::size_t k = cursor_;
      cursor_ = (cursor_ + 1) % parts_.size();
      if (!live_[k]) continue;
      if (auto v = parts_[k]->next()) return v;
      live_[k] = false;
    }
    return std::nullopt;
  }

 private:
  std::vector<std::unique_ptr<CoverEnumerator>> parts_;
  std::vector<bool> live_;
  std::size_t cursor_ = 0;
};

class UnionOf final : public Family {
 public:
  explicit UnionOf(std::vector<FamilyPtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("union needs at least one family");
  }

  const std::vector<FamilyPtr>& parts() const { return parts_; }

  std::string spec() const override {
    std::string out = "union(";
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      if (k) out += '|';
      out += parts_[k]->spec();
    }
    return out + ")";
  }

  bool contains(const MeanVector& q, Coord horizon) const override {
    return std::any_of(parts_.begin(), parts_.end(), [&](const auto& f) { return f->contains(q, horizon); });
  }

  std::unique_ptr<CoverEnumerator> cover(double epsilon) const override {
    std::vector<std::unique_ptr<CoverEnumerator>> covers;
    for (const auto& f : parts_) covers.push_back(f->cover(epsilon));
    return std::make_unique<UnionCover>(std::move(covers), epsilon);
  }

  std::optional<MeanVector> find_member(std::span<const BallConstraint> constraints,
                                        Coord horizon) const override {
    std::optional<HorizonExceeded> undecided;
    for (const auto& f : parts_) {
      try {
        if (auto m = f->find_member(constraints, horizon)) return m;
      } catch (const HorizonExceeded& e) {
        if (!undecided) undecided = e;
      }
    }
    if (undecided) throw *undecided;
    return std::nullopt;
  }

  MeanVector random_member(std::uint64_t seed) const override {
    Rng rng(stream_seed(seed, 0x9905));
    return parts_[rng.below(parts_.size())]->random_member(derive_seed({seed, 0x9906}));
  }

 private:
  std::vector<FamilyPtr> parts_;
};

}  // namespace

// ---------------------------------------------------------------------------
// factories and free functions

FamilyPtr make_qprop(double c, std::size_t truth_len) { return std::make_shared<Qprop>(c, truth_len); }

FamilyPtr make_qbin(std::size_t truth_len) {
  return std::make_shared<PatternFamily>("qbin", std::vector<std::vector<double>>{{0.0}, {1.0}}, truth_len);
}

FamilyPtr make_qtert(std::size_t truth_len) {
  return std::make_shared<PatternFamily>("qtert", std::vector<std::vector<double>>{{kThird}, {kTwoThirds}},
                                         truth_len);
}

FamilyPtr make_qround(std::size_t truth_len) {
  return std::make_shared<PatternFamily>(
      "qround", std::vector<std::vector<double>>{{kThird, 0.0}, {kTwoThirds, 1.0}}, truth_len);
}

FamilyPtr make_qtree(std::size_t truth_len) { return std::make_shared<Qtree>(truth_len); }

FamilyPtr make_countable_list(std::vector<MeanVector> members) {
  return std::make_shared<CountableList>(std::move(members), "list");
}

FamilyPtr make_generated_list(std::size_t count, std::size_t len, std::uint64_t seed) {
  static constexpr double kLevels[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  if (count == 0 || len == 0) throw std::invalid_argument("generated list needs count and len > 0");
  const double capacity = std::pow(5.0, static_cast<double>(len));
  if (static_cast<double>(count) > capacity) throw std::invalid_argument("generated list has too few distinct vectors");
  Rng rng(stream_seed(seed, 0x9907));
  std::set<std::vector<double>> seen;
  std::vector<MeanVector> members;
  while (members.size() < count) {
    std::vector<double> prefix(len);
    for (auto& v : prefix) v = kLevels[rng.below(5)];
    if (!seen.insert(prefix).second) continue;
    members.push_back(MeanVector::explicit_tail(prefix, 0.5));
  }
  std::string spec = "list:count=" + std::to_string(count) + ",len=" + std::to_string(len) +
                     ",seed=" + std::to_string(seed);
  return std::make_shared<CountableList>(std::move(members), std::move(spec));
}

FamilyPtr make_union(std::vector<FamilyPtr> parts) { return std::make_shared<UnionOf>(std::move(parts)); }

const std::vector<MeanVector>* list_members(const Family& f) {
  const auto* list = dynamic_cast<const CountableList*>(&f);
  return list ? &list->members() : nullptr;
}

const std::vector<FamilyPtr>* union_parts(const Family& f) {
  const auto* u = dynamic_cast<const UnionOf*>(&f);
  return u ? &u->parts() : nullptr;
}

SampleSet sample_product(const MeanVector& truth, std::size_t n, Coord J, std::uint64_t seed) {
  if (n == 0 || J == 0) throw std::invalid_argument("sample needs n >= 1 and J >= 1");
  const std::vector<double> q = truth.values(J);
  std::vector<std::uint8_t> bits(n * J);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t* row = bits.data() + i * J;
    for (Coord j = 0; j < J; ++j) row[j] = rng.uniform() < q[j] ? 1 : 0;
  }
  return SampleSet(n, J, std::move(bits), seed);
}

SampleSet sample(const Family& f, const MeanVector& truth, std::size_t n, Coord J, std::uint64_t seed) {
  if (!f.contains(truth, J)) throw TruthNotInFamily("ground truth is not a member of " + f.spec());
  return sample_product(truth, n, J, seed);
}

std::unique_ptr<CoverEnumerator> cover(const Family& f, double epsilon) { return f.cover(epsilon); }

std::optional<MeanVector> find_member_in_balls(const Family& f, std::span<const BallConstraint> constraints,
                                               Coord horizon) {
  return f.find_member(constraints, horizon);
}

LgcValue lgc_functional(const MeanVector& p, Coord horizon) {
  double best = 0.0;
  for (Coord j = 1; j <= horizon; ++j) {
    const double pj = p.coord(j);
    if (pj == 0.0) continue;
    if (pj == 1.0) return {std::numeric_limits<double>::infinity(), horizon};
    best = std::max(best, std::log(static_cast<double>(j + 1)) / -std::log(pj));
  }
  return {best, horizon};
}

void write_sample_csv(std::ostream& out, const SampleSet& s) {
  for (Coord j = 1; j <= s.horizon(); ++j) out << (j > 1 ? "," : "") << 'x' << j;
  out << '\n';
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const auto row = s.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << static_cast<int>(row[j]);
    out << '\n';
  }
}

}  // namespace ume
