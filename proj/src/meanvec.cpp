#include "ume/meanvec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "ume/errors.hpp"

namespace ume {
namespace {

constexpr std::size_t kMaxTreeDepth = 62;

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0,1], got " + std::to_string(v));
  }
}

[[noreturn]] void beyond(Coord j, Coord limit) {
  throw HorizonExceeded("coordinate " + std::to_string(j) + " is beyond the certified horizon " +
                        std::to_string(limit));
}

double explicit_coord(const ExplicitTail& v, Coord j) {
  if (v.limit && j > *v.limit) beyond(j, *v.limit);
  const Coord p = v.prefix.size();
  if (j <= p) return v.prefix[j - 1];
  return v.tail[(j - p - 1) % v.tail.size()];
}

std::vector<Coord> explicit_explicit_reps(const ExplicitTail& a, const ExplicitTail& b) {
  const Coord p = std::max(a.prefix.size(), b.prefix.size());
  const Coord period = std::lcm(a.tail.size(), b.tail.size());
  std::vector<Coord> reps(p + period);
  std::iota(reps.begin(), reps.end(), Coord{1});
  return reps;
}

std::vector<Coord> explicit_tree_reps(const ExplicitTail& e, const TreeBranch& t) {
  const Coord p = e.prefix.size();
  const Coord period = e.tail.size();
  std::vector<Coord> reps(p);
  std::iota(reps.begin(), reps.end(), Coord{1});

  // off-path coordinates of every tail phase; on-path nodes are one per depth, so a
  // short forward scan always finds them
  std::vector<bool> off_seen(period, false);
  std::size_t missing = period;
  for (Coord j = p + 1; missing > 0; ++j) {
    if (j > p + 64 * period + 64) throw std::logic_error("off-path representative search did not settle");
    const Coord phase = (j - p - 1) % period;
    if (!off_seen[phase] && !t.on_path(j)) {
      off_seen[phase] = true;
      --missing;
      reps.push_back(j);
    }
  }

  // on-path phases: labels past the stored bits follow l -> 2l + ext, so the residue
  // modulo the period is eventually periodic and the walk can stop at the first repeat
  std::vector<bool> on_seen(period, false);
  std::unordered_set<Coord> residues;
  Coord label = 1;
  for (std::size_t d = 0; d <= kMaxTreeDepth; ++d) {
    if (d > 0) label = 2 * label + t.bit(d);
    if (label <= p) continue;
    const Coord phase = (label - p - 1) % period;
    if (!on_seen[phase]) {
      on_seen[phase] = true;
      reps.push_back(label);
    }
    if (d > t.bits.size() && !residues.insert(label % period).second) break;
  }
  return reps;
}

std::vector<Coord> tree_tree_reps(const TreeBranch& a, const TreeBranch& b) {
  std::vector<Coord> reps{1};
  for (Coord j = 2;; ++j) {
    if (!a.on_path(j) && !b.on_path(j)) {
      reps.push_back(j);
      break;
    }
  }
  const std::size_t horizon = std::max(a.bits.size(), b.bits.size()) + 1;
  for (std::size_t d = 1; d <= std::min(horizon, kMaxTreeDepth); ++d) {
    if (a.bit(d) != b.bit(d)) {
      reps.push_back(a.label_at(d));
      reps.push_back(b.label_at(d));
      break;
    }
  }
  return reps;
}

}  // namespace

Coord TreeBranch::label_at(std::size_t depth) const {
  if (depth > kMaxTreeDepth) throw std::out_of_range("tree depth beyond 62 is not addressable");
  Coord label = 1;
  for (std::size_t d = 1; d <= depth; ++d) label = 2 * label + bit(d);
  return label;
}

bool TreeBranch::on_path(Coord j) const {
  const std::size_t depth = std::bit_width(j) - 1;
  for (std::size_t d = 1; d <= depth; ++d) {
    if (((j >> (depth - d)) & 1U) != bit(d)) return false;
  }
  return true;
}

MeanVector::MeanVector(Repr repr) : repr_(std::make_shared<const Repr>(std::move(repr))) {}

MeanVector MeanVector::constant(double value) { return explicit_tail({}, value); }

MeanVector MeanVector::explicit_tail(std::vector<double> prefix, double tail) {
  return explicit_tail(std::move(prefix), std::vector<double>{tail});
}

MeanVector MeanVector::explicit_tail(std::vector<double> prefix, std::vector<double> tail_cycle) {
  if (tail_cycle.empty()) throw std::invalid_argument("tail cycle must be non-empty");
  for (double v : prefix) check_unit(v, "prefix value");
  for (double v : tail_cycle) check_unit(v, "tail value");
  return MeanVector(ExplicitTail{std::move(prefix), std::move(tail_cycle), std::nullopt});
}

MeanVector MeanVector::truncated(std::vector<double> values) {
  for (double v : values) check_unit(v, "value");
  const Coord limit = values.size();
  return MeanVector(ExplicitTail{std::move(values), {0.0}, limit});
}

MeanVector MeanVector::tree_branch(std::vector<std::uint8_t> bits, double on, double off,
                                   std::uint8_t extension) {
  check_unit(on, "on value");
  check_unit(off, "off value");
  for (auto b : bits) {
    if (b > 1) throw std::invalid_argument("branch bits must be 0 or 1");
  }
  if (extension > 1) throw std::invalid_argument("extension bit must be 0 or 1");
  return MeanVector(TreeBranch{std::move(bits), extension, on, off});
}

MeanVector MeanVector::closure(std::function<double(Coord)> fn, Coord horizon_hint) {
  if (!fn) throw std::invalid_argument("closure needs a coordinate function");
  return MeanVector(Closure{std::move(fn), horizon_hint});
}

VectorKind MeanVector::kind() const {
  return static_cast<VectorKind>(repr_->index());
}

double MeanVector::coord(Coord j) const {
  if (j == 0) throw std::out_of_range("coordinates are 1-based");
  switch (kind()) {
    case VectorKind::ExplicitTail:
      return explicit_coord(std::get<ExplicitTail>(*repr_), j);
    case VectorKind::TreeBranch: {
      const auto& t = std::get<TreeBranch>(*repr_);
      return t.on_path(j) ? t.on : t.off;
    }
    case VectorKind::Closure: {
      const auto& c = std::get<Closure>(*repr_);
      if (j > c.horizon) beyond(j, c.horizon);
      const double v = c.fn(j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error("closure coordinate " + std::to_string(j) + " is outside [0,1]");
      }
      return v;
    }
  }
  throw std::logic_error("unknown vector kind");
}

std::vector<double> MeanVector::values(Coord count) const {
  std::vector<double> out;
  out.reserve(count);
  for (Coord j = 1; j <= count; ++j) out.push_back(coord(j));
  return out;
}

std::optional<Coord> MeanVector::limit() const {
  switch (kind()) {
    case VectorKind::ExplicitTail:
      return std::get<ExplicitTail>(*repr_).limit;
    case VectorKind::TreeBranch:
      return std::nullopt;
    case VectorKind::Closure:
      return std::get<Closure>(*repr_).horizon;
  }
  return std::nullopt;
}

BallConstraint::BallConstraint(MeanVector c, double r) : center(std::move(c)), radius(r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
}

std::vector<Coord> representative_coords(const MeanVector& a, const MeanVector& b) {
  if (!a.structured() || !b.structured()) {
    throw std::invalid_argument("representative coordinates need two structured vectors");
  }
  std::vector<Coord> reps;
  const auto* ea = a.explicit_tail_data();
  const auto* eb = b.explicit_tail_data();
  const auto* ta = a.tree_branch_data();
  const auto* tb = b.tree_branch_data();
  if (ea && eb) {
    reps = explicit_explicit_reps(*ea, *eb);
  } else if (ea && tb) {
    reps = explicit_tree_reps(*ea, *tb);
  } else if (ta && eb) {
    reps = explicit_tree_reps(*eb, *ta);
  } else {
    reps = tree_tree_reps(*ta, *tb);
  }
  std::sort(reps.begin(), reps.end());
  reps.erase(std::unique(reps.begin(), reps.end()), reps.end());
  return reps;
}

double prefix_linf(const MeanVector& a, const MeanVector& b, Coord J) {
  double best = 0.0;
  if (a.structured() && b.structured()) {
    for (Coord r : representative_coords(a, b)) {
      if (r > J) break;
      best = std::max(best, std::abs(a.coord(r) - b.coord(r)));
    }
    return best;
  }
  for (Coord j = 1; j <= J; ++j) best = std::max(best, std::abs(a.coord(j) - b.coord(j)));
  return best;
}

std::optional<double> sup_distance(const MeanVector& a, const MeanVector& b) {
  if (!a.structured() || !b.structured()) return std::nullopt;
  double best = 0.0;
  for (Coord r : representative_coords(a, b)) best = std::max(best, std::abs(a.coord(r) - b.coord(r)));
  return best;
}

Violation first_violation(const MeanVector& a, const MeanVector& b, double threshold, Coord horizon) {
  if (a.structured() && b.structured()) {
    const auto reps = representative_coords(a, b);
    for (Coord r : reps) {
      if (std::abs(a.coord(r) - b.coord(r)) > threshold) return {r, Certainty::Exact, r};
    }
    return {std::nullopt, Certainty::Exact, reps.empty() ? 0 : reps.back()};
  }
  Coord range = horizon;
  if (auto la = a.limit()) range = std::min(range, *la);
  if (auto lb = b.limit()) range = std::min(range, *lb);
  for (Coord j = 1; j <= range; ++j) {
    if (std::abs(a.coord(j) - b.coord(j)) > threshold) return {j, Certainty::HorizonLimited, j};
  }
  return {std::nullopt, Certainty::HorizonLimited, range};
}

Interval ball_interval(double center, double radius) {
  double lo = center - radius, hi = center + radius;
  while (std::abs(lo - center) > radius) lo = std::nextafter(lo, center);
  while (std::abs(hi - center) > radius) hi = std::nextafter(hi, center);
  return {std::max(0.0, lo), std::min(1.0, hi)};
}

std::optional<Interval> intersect_ball_intervals(std::span<const BallConstraint> constraints, Coord j) {
  if (constraints.empty()) throw std::invalid_argument("at least one ball constraint is required");
  Interval out{0.0, 1.0};
  for (const auto& ball : constraints) {
    const Interval iv = ball_interval(ball.center.coord(j), ball.radius);
    out.lo = std::max(out.lo, iv.lo);
    out.hi = std::min(out.hi, iv.hi);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

bool satisfies(const MeanVector& v, const BallConstraint& ball, Coord horizon) {
  const auto center_limit = ball.center.limit();
  const auto v_limit = v.limit();
  if (!center_limit) {
    if (v_limit) {
      throw HorizonExceeded("vector certified to " + std::to_string(*v_limit) +
                            " cannot be checked against a ball with an infinite center");
    }
    return !first_violation(v, ball.center, ball.radius).index.has_value();
  }
  const Coord range = *center_limit;
  if (v_limit && *v_limit < range) beyond(range, *v_limit);
  if (!v.structured() && range > horizon) beyond(range, horizon);
  for (Coord j = 1; j <= range; ++j) {
    if (std::abs(v.coord(j) - ball.center.coord(j)) > ball.radius) return false;
  }
  return true;
}

}  // namespace ume
