#include "ume/countable_union.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "ume/errors.hpp"

namespace ume {

SurvivalVerdict survival_test(std::size_t i, double eps, std::size_t n, std::span<const MeanVector> candidates,
                              const MeanVector& qhat, Coord horizon) {
  if (i >= candidates.size()) throw std::out_of_range("candidate index outside the candidate list");
  if (candidates.size() > n) throw std::invalid_argument("more candidates than samples");
  const double slack = eps + hoeffding_threshold(n);
  const MeanVector& qi = candidates[i];
  SurvivalVerdict verdict;
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    bool win = true;
    if (t != i) {
      const Violation v = first_violation(candidates[t], qi, 4.0 * eps, horizon);
      if (v.certainty == Certainty::HorizonLimited) {
        verdict.certainty = Certainty::HorizonLimited;
        if (!v.index && v.searched_to < horizon) {
          throw HorizonExceeded("candidates " + std::to_string(t + 1) + " and " + std::to_string(i + 1) +
                                " are only comparable up to coordinate " + std::to_string(v.searched_to));
        }
      }
      if (v.index) {
        const Coord J = *v.index;
        if (auto lim = qhat.limit(); lim && J > *lim) {
          throw HorizonExceeded("first 4eps violation at coordinate " + std::to_string(J) +
                                " lies beyond the validation horizon " + std::to_string(*lim));
        }
        win = std::abs(qhat.coord(J) - qi.coord(J)) < slack;
        if (!win && !verdict.first_failure_opponent) {
          verdict.first_failure_opponent = t;
          verdict.first_failure_coordinate = J;
        }
      }
    }
    if (win) ++verdict.wins;
  }
  verdict.passed = verdict.wins == candidates.size();
  return verdict;
}

bool elimination_holds(double t_value, double i_value, double qhat_value, double eps, std::size_t n) {
  const bool premises = std::abs(t_value - i_value) > 4.0 * eps &&
                        std::abs(qhat_value - i_value) < eps + hoeffding_threshold(n) &&
                        static_cast<double>(n) > 9.0 / std::pow(eps, 4.0);
  return !premises || std::abs(t_value - qhat_value) >= 2.0 * eps;
}

int default_union_k_cap(std::size_t n) {
  const double k = std::floor(0.25 * std::log(static_cast<double>(n) / 9.0));
  return std::max(1, static_cast<int>(k));
}

UnionResult union_learn(const LearnerRegistry& reg, const Family& f_union, const SampleSet& s_full, int k_cap) {
  if (reg.empty()) throw std::invalid_argument("learner registry is empty");
  if (s_full.rows() < 2 || s_full.rows() % 2 != 0) throw std::invalid_argument("union_learn needs 2n rows");
  const std::size_t n = s_full.rows() / 2;
  const Coord J = s_full.horizon();
  if (J < n) throw std::invalid_argument("union_learn needs J >= n");
  if (k_cap <= 0) k_cap = default_union_k_cap(n);

  const SampleSet s1 = s_full.slice_rows(0, n);
  const SampleSet s2 = s_full.slice_rows(n, n);
  const MeanVector qhat = empirical_mean(s2);

  const std::size_t m = std::min(n, reg.size());
  std::vector<std::optional<MeanVector>> trained(reg.size());
  std::vector<std::string> errors(reg.size());
  std::vector<MeanVector> pool;
  std::vector<std::size_t> pool_owner;
  for (std::size_t i = 0; i < m; ++i) {
    try {
      trained[i] = reg[i].learn(s1).estimate;
      pool.push_back(*trained[i]);
      pool_owner.push_back(i);
    } catch (const Error& e) {
      errors[i] = e.what();
    } catch (const std::invalid_argument& e) {
      errors[i] = e.what();
    }
  }
  if (pool.empty()) throw NoSurvivorAtFirstRound("every base learner failed on the training half");

  std::vector<UnionRound> rounds;
  std::vector<BallConstraint> balls;
  std::optional<MeanVector> member;
  int reached = 0;
  for (int k = 1; k <= k_cap; ++k) {
    UnionRound round;
    round.k = k;
    round.epsilon = std::ldexp(1.0, -k);
    for (std::size_t p = 0; p < pool.size(); ++p) {
      round.tested.push_back(pool_owner[p]);
      round.verdicts.push_back(survival_test(p, round.epsilon, n, pool, qhat, J));
      if (!round.survivor && round.verdicts.back().passed) round.survivor = p;
    }
    if (!round.survivor) {
      rounds.push_back(std::move(round));
      if (k == 1) throw NoSurvivorAtFirstRound("no candidate survives at epsilon = 1/2");
      break;
    }
    balls.emplace_back(pool[*round.survivor], 5.0 * round.epsilon);
    round.survivor = pool_owner[*round.survivor];
    auto found = find_member_in_balls(f_union, balls, J);
    if (!found) {
      balls.pop_back();
      round.intersection_empty = true;
      rounds.push_back(std::move(round));
      if (k == 1) throw EmptyAtFirstRound("first survivor's ball holds no member of " + f_union.spec());
      break;
    }
    rounds.push_back(std::move(round));
    member = std::move(found);
    reached = k;
  }

  EstimatorReport report(std::move(*member));
  report.k_reached = reached;
  report.constraints = std::move(balls);
  for (std::size_t i = 0; i < m; ++i) {
    if (!errors[i].empty()) report.notes.push_back("learner " + std::to_string(i + 1) + " failed: " + errors[i]);
  }
  return UnionResult{std::move(report), std::move(trained), std::move(errors), std::move(rounds)};
}

void write_verdict_log(std::ostream& out, const UnionResult& result, const LearnerRegistry& reg) {
  for (const auto& round : result.rounds) {
    for (std::size_t p = 0; p < round.verdicts.size(); ++p) {
      const auto& v = round.verdicts[p];
      const std::size_t owner = round.tested[p];
      nlohmann::json rec{{"k", round.k},
                         {"epsilon", round.epsilon},
                         {"learner", owner + 1},
                         {"name", owner < reg.size() ? reg[owner].name : std::string{}},
                         {"passed", v.passed},
                         {"wins", v.wins},
                         {"certainty", v.certainty == Certainty::Exact ? "exact" : "horizon_limited"}};
      if (v.first_failure_opponent) rec["first_failure_opponent"] = round.tested[*v.first_failure_opponent] + 1;
      if (v.first_failure_coordinate) rec["first_failure_coordinate"] = *v.first_failure_coordinate;
      out << rec.dump() << '\n';
    }
  }
}

}  // namespace ume
