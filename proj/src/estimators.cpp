#include "ume/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ume/errors.hpp"

namespace ume {
namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return b > kSaturated - a ? kSaturated : a + b; }

void require_horizon_covers_n(const SampleSet& s, const char* who) {
  if (s.horizon() < s.rows()) {
    throw std::invalid_argument(std::string(who) + " needs J >= n (J = " + std::to_string(s.horizon()) +
                                ", n = " + std::to_string(s.rows()) + ")");
  }
}

bool accepts(const MeanVector& q, const std::vector<double>& qhat, Coord tested, double bound) {
  for (Coord j = 1; j <= tested; ++j) {
    if (std::abs(q.coord(j) - qhat[j - 1]) > bound) return false;
  }
  return true;
}

EstimatorReport grid_approximate(const CoverEnumerator::ProductGrid& grid, const std::vector<double>& qhat,
                                 Coord tested, double bound) {
  const Coord len = grid.length();
  const Coord decided = std::min(len, tested);
  std::vector<double> prefix;
  prefix.reserve(decided);
  std::vector<std::uint64_t> position(decided + 1, 0);
  for (Coord j = 1; j <= decided; ++j) {
    const auto values = grid.values_at(j);
    auto it = std::find_if(values.begin(), values.end(),
                           [&](double v) { return std::abs(v - qhat[j - 1]) <= bound; });
    if (it == values.end()) {
      throw NoCandidateAccepted("no grid value within " + std::to_string(bound) + " of the empirical mean at coordinate " +
                                std::to_string(j));
    }
    prefix.push_back(*it);
    position[j] = static_cast<std::uint64_t>(it - values.begin());
  }
  // untested coordinates take their first grid value; runs equal to the tail stay implicit
  Coord pending_tail = 0;
  for (Coord j = decided + 1; j <= len; ++j) {
    const double v = grid.first_value(j);
    if (v == grid.tail_value()) {
      ++pending_tail;
      continue;
    }
    prefix.insert(prefix.end(), pending_tail, grid.tail_value());
    pending_tail = 0;
    prefix.push_back(v);
  }
  for (Coord j = len + 1; j <= tested; ++j) {
    if (std::abs(grid.tail_value() - qhat[j - 1]) > bound) {
      throw NoCandidateAccepted("the cover's fixed tail is rejected at coordinate " + std::to_string(j));
    }
  }

  // 1-based mixed-radix rank, coordinate 1 most significant
  std::uint64_t index = 1;
  std::uint64_t weight = 1;  // product of grid sizes strictly after j
  Coord j = len;
  for (; j > decided && weight != kSaturated; --j) weight = sat_mul(weight, grid.size_at(j));
  if (weight == kSaturated) j = decided;
  for (; j >= 1; --j) {
    if (weight == kSaturated) {
      if (std::any_of(position.begin() + 1, position.begin() + static_cast<std::ptrdiff_t>(j) + 1,
                      [](std::uint64_t p) { return p != 0; })) {
        index = kSaturated;
      }
      break;
    }
    index = sat_add(index, sat_mul(position[j], weight));
    weight = sat_mul(weight, grid.size_at(j));
  }

  EstimatorReport report(grid.candidate(prefix));
  report.candidate_index = index;
  report.candidate_index_saturated = index == kSaturated;
  report.candidates_scanned = index;
  return report;
}

}  // namespace

Threshold Threshold::for_samples(std::size_t n) { return {n, hoeffding_threshold(n)}; }

double hoeffding_threshold(std::size_t n) {
  if (n == 0) throw std::invalid_argument("threshold needs n >= 1");
  const double nd = static_cast<double>(n);
  return std::sqrt(3.0 * std::log(nd) / nd);
}

MeanVector empirical_mean(const SampleSet& s) {
  if (s.rows() == 0) throw std::invalid_argument("empirical mean needs n >= 1");
  const auto counts = s.column_counts();
  std::vector<double> means(counts.size());
  const double n = static_cast<double>(s.rows());
  for (std::size_t j = 0; j < counts.size(); ++j) means[j] = counts[j] / n;
  return MeanVector::truncated(std::move(means));
}

EstimatorReport eps_approximate(CoverEnumerator& cov, const SampleSet& s, double epsilon, std::uint64_t max_candidates) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  if (max_candidates == 0) throw std::invalid_argument("max_candidates must be positive");
  require_horizon_covers_n(s, "eps_approximate");
  const std::vector<double> qhat = empirical_mean(s).values(s.horizon());
  const Coord tested = s.rows() - 1;
  const double bound = hoeffding_threshold(s.rows()) + epsilon;

  if (const auto* grid = cov.product_grid()) {
    auto report = grid_approximate(*grid, qhat, tested, bound);
    if (!accepts(report.estimate, qhat, tested, bound)) throw std::logic_error("grid candidate fails its own test");
    return report;
  }

  for (std::uint64_t i = 1; i <= max_candidates; ++i) {
    auto q = cov.next();
    if (!q) {
      throw NoCandidateAccepted("cover exhausted after " + std::to_string(i - 1) + " candidates");
    }
    if (accepts(*q, qhat, tested, bound)) {
      EstimatorReport report(std::move(*q));
      report.candidate_index = i;
      report.candidates_scanned = i;
      return report;
    }
  }
  throw NoCandidateAccepted("no candidate accepted among the first " + std::to_string(max_candidates));
}

EstimatorReport separable_learn(const Family& f, const SampleSet& s, int k_max, std::uint64_t max_candidates) {
  require_horizon_covers_n(s, "separable_learn");
  if (k_max <= 0) k_max = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(s.rows())))));

  std::vector<BallConstraint> balls;
  std::optional<MeanVector> member;
  std::optional<std::uint64_t> last_index;
  std::uint64_t scanned = 0;
  std::vector<std::string> notes;
  int reached = 0;
  for (int k = 1; k <= k_max; ++k) {
    const double eps = std::ldexp(1.0, -k);
    auto cov = cover(f, eps);
    std::optional<EstimatorReport> round;
    try {
      round = eps_approximate(*cov, s, eps, max_candidates);
    } catch (const NoCandidateAccepted& e) {
      if (!member) throw;
      notes.push_back("round " + std::to_string(k) + ": " + e.what());
      break;
    }
    scanned = sat_add(scanned, round->candidates_scanned);
    balls.emplace_back(round->estimate, eps);
    auto found = find_member_in_balls(f, balls, s.horizon());
    if (!found) {
      balls.pop_back();
      if (k == 1) throw EmptyAtFirstRound("first ball around the accepted candidate holds no member of " + f.spec());
      notes.push_back("round " + std::to_string(k) + ": ball intersection is empty");
      break;
    }
    last_index = round->candidate_index;
    member = std::move(found);
    reached = k;
  }

  EstimatorReport report(std::move(*member));
  report.k_reached = reached;
  report.candidate_index = last_index;
  report.candidates_scanned = scanned;
  report.candidate_index_saturated = last_index && *last_index == kSaturated;
  report.constraints = std::move(balls);
  report.notes = std::move(notes);
  return report;
}

EstimatorReport bin_learn(const SampleSet& s) {
  if (s.rows() == 0) throw std::invalid_argument("bin_learn needs n >= 1");
  const auto first = s.row(0);
  std::vector<double> values(first.begin(), first.end());
  EstimatorReport report(MeanVector::truncated(values));
  for (std::size_t r = 1; r < s.rows(); ++r) {
    if (!std::equal(first.begin(), first.end(), s.row(r).begin())) {
      report.notes.push_back("row " + std::to_string(r + 1) + " differs from row 1; the truth is not binary");
      break;
    }
  }
  return report;
}

EstimatorReport round_learn(const SampleSet& s) {
  if (s.rows() == 0) throw std::invalid_argument("round_learn needs n >= 1");
  if (s.horizon() % 2 != 0) throw std::invalid_argument("round_learn needs an even horizon");
  std::vector<double> values(s.horizon());
  for (Coord j = 2; j <= s.horizon(); j += 2) {
    const std::uint8_t x = s.at(0, j);
    for (std::size_t r = 1; r < s.rows(); ++r) {
      if (s.at(r, j) != x) {
        throw InconsistentRows("rows 1 and " + std::to_string(r + 1) + " disagree at coordinate " + std::to_string(j));
      }
    }
    values[j - 2] = x ? 2.0 / 3.0 : 1.0 / 3.0;
    values[j - 1] = x;
  }
  return EstimatorReport(MeanVector::truncated(std::move(values)));
}

BranchScore max_average_branch(const std::vector<std::uint32_t>& node_counts, int depth) {
  if (depth < 1 || depth > 30) throw std::invalid_argument("tree depth must lie in 1..30");
  const Coord nodes = (Coord{1} << (depth + 1)) - 1;
  if (node_counts.size() < nodes + 1) throw std::invalid_argument("node counts do not reach the requested depth");
  const Coord first_leaf = Coord{1} << depth;
  // best[v]: largest count sum on a path from v down to depth D, v included
  std::vector<std::uint64_t> best(nodes + 1);
  for (Coord v = nodes; v >= 1; --v) {
    best[v] = node_counts[v];
    if (v < first_leaf) best[v] += std::max(best[2 * v], best[2 * v + 1]);
  }
  BranchScore out;
  out.bits.reserve(depth);
  Coord v = 1;
  while (v < first_leaf) {
    const std::uint8_t b = best[2 * v + 1] > best[2 * v] ? 1 : 0;
    out.bits.push_back(b);
    v = 2 * v + b;
  }
  out.count_sum = best[1] - node_counts[1];
  return out;
}

EstimatorReport tree_learn(const SampleSet& s, int depth) {
  if (depth < 1 || depth > 30) throw std::invalid_argument("tree depth must lie in 1..30");
  const Coord nodes = (Coord{1} << (depth + 1)) - 1;
  if (s.horizon() < nodes) {
    throw std::invalid_argument("tree_learn at depth " + std::to_string(depth) + " needs J >= " + std::to_string(nodes));
  }
  if (s.rows() < 36) throw std::invalid_argument("tree_learn needs n >= 36");

  std::vector<std::uint32_t> counts(nodes + 1, 0);
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const auto row = s.row(r);
    for (Coord j = 1; j <= nodes; ++j) counts[j] += row[j - 1];
  }
  auto best = max_average_branch(counts, depth);
  const std::uint64_t scale = static_cast<std::uint64_t>(s.rows()) * static_cast<std::uint64_t>(depth);
  const double score = static_cast<double>(best.count_sum) / static_cast<double>(scale);
  if (2 * best.count_sum <= scale) {
    throw NoBranchAccepted("best branch average " + std::to_string(score) + " does not exceed 1/2");
  }
  EstimatorReport report(MeanVector::tree_branch(best.bits));
  report.branch_bits = std::move(best.bits);
  report.branch_score = score;
  return report;
}

}  // namespace ume
