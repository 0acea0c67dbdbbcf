#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ume/countable_union.hpp"
#include "ume/estimators.hpp"
#include "ume/families.hpp"

namespace ume {

/// `name[:key=value,...]`
struct Spec {
  std::string name;
  std::map<std::string, std::string> params;

  std::string text() const;
  double number(const std::string& key, double fallback) const;
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  /// Throws ConfigError naming the first key outside `known`.
  void only(std::initializer_list<const char*> known) const;
};

Spec parse_spec(const std::string& text);

/// qprop:c=1,len=32 | qbin:len=64 | qtert | qtree | qround | list:count=50,len=16,seed=3 |
/// union(spec|spec|...)
FamilyPtr parse_family(const std::string& text);

/// Accepts decimals and fractions such as 1/3.
double parse_value(const std::string& text);

/// `v1 v2 ... | t1 t2 ...`; the part after `|` is the repeating tail (default 0.5).
MeanVector parse_member(const std::string& text);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// `key = value` lines; `#` starts a comment. Keys keep their order and may repeat.
KeyValues read_key_values(std::istream& in, const std::string& source);
KeyValues read_key_values_file(const std::string& path);

/// `family = <spec>`, or `family = list` followed by `member = ...` lines.
FamilyPtr family_from_entries(const KeyValues& entries);

/// empirical | eps[:eps=0,max=N] | separable[:k_max=K,max=N] | bin | round | tree[:depth=D] |
/// union:registry=PATH[,k_cap=K]
Learner make_learner(const Spec& estimator, const FamilyPtr& family);

/// Learner used for a registry entry that names no estimator.
Spec default_estimator_for(const Family& family);

struct RegistryConfig {
  LearnerRegistry learners;
  std::vector<std::string> estimator_specs;
  FamilyPtr union_family;
  std::optional<std::size_t> truth_learner;  // 1-based
  std::uint64_t truth_seed = 0;
};

/// `learner = <name> <family-spec> [estimator-spec]` lines plus optional
/// `truth_learner = <position>` and `truth_seed = <seed>`.
RegistryConfig parse_registry(const KeyValues& entries);
RegistryConfig load_registry(const std::string& path);

}  // namespace ume
