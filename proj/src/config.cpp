#include "ume/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "ume/errors.hpp"
#include "ume/format.hpp"

namespace ume {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

/// Splits on `|` outside parentheses.
std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == '|' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto t = trim(text);
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty()) {
    throw ConfigError(what + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

std::string Spec::text() const {
  std::string out = name;
  char sep = ':';
  for (const auto& [k, v] : params) {
    out += sep + k + "=" + v;
    sep = ',';
  }
  return out;
}

double Spec::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    return parse_value(it->second);
  } catch (const ConfigError&) {
    throw ConfigError(name + ": parameter " + key + " must be numeric, got '" + it->second + "'");
  }
}

std::uint64_t Spec::integer(const std::string& key, std::uint64_t fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  return parse_u64(it->second, name + ": parameter " + key);
}

std::string Spec::string(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void Spec::only(std::initializer_list<const char*> known) const {
  for (const auto& [k, v] : params) {
    if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; })) {
      throw ConfigError(name + ": unknown parameter '" + k + "'");
    }
  }
}

Spec parse_spec(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty family or estimator string");
  Spec spec;
  const auto colon = t.find(':');
  spec.name = trim(t.substr(0, colon));
  if (colon == std::string::npos) return spec;
  for (const auto& part : split(t.substr(colon + 1), ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("'" + part + "' in '" + t + "' is not key=value");
    spec.params[trim(part.substr(0, eq))] = trim(part.substr(eq + 1));
  }
  return spec;
}

double parse_value(const std::string& text) {
  const std::string t = trim(text);
  auto parse_double = [&](const std::string& s) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) {
      throw ConfigError("expected a number, got '" + text + "'");
    }
    return v;
  };
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    const double den = parse_double(trim(t.substr(slash + 1)));
    if (den == 0.0) throw ConfigError("zero denominator in '" + text + "'");
    return parse_double(trim(t.substr(0, slash))) / den;
  }
  return parse_double(t);
}

MeanVector parse_member(const std::string& text) {
  const auto bar = text.find('|');
  std::vector<double> prefix, tail;
  for (const auto& w : words(text.substr(0, bar))) prefix.push_back(parse_value(w));
  if (bar != std::string::npos) {
    for (const auto& w : words(text.substr(bar + 1))) tail.push_back(parse_value(w));
  }
  if (tail.empty()) tail.push_back(0.5);
  try {
    return MeanVector::explicit_tail(std::move(prefix), std::move(tail));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("member '" + text + "': " + e.what());
  }
}

FamilyPtr parse_family(const std::string& text) {
  const std::string t = trim(text);
  if (t.rfind("union(", 0) == 0) {
    if (t.back() != ')') throw ConfigError("unterminated union in '" + t + "'");
    std::vector<FamilyPtr> parts;
    for (const auto& p : split_top_level(t.substr(6, t.size() - 7))) parts.push_back(parse_family(p));
    return make_union(std::move(parts));
  }
  const Spec s = parse_spec(t);
  try {
    if (s.name == "qprop") {
      s.only({"c", "len"});
      return make_qprop(s.number("c", 1.0), s.integer("len", 32));
    }
    if (s.name == "qbin") {
      s.only({"len"});
      return make_qbin(s.integer("len", 64));
    }
    if (s.name == "qtert") {
      s.only({"len"});
      return make_qtert(s.integer("len", 64));
    }
    if (s.name == "qtree") {
      s.only({"len"});
      return make_qtree(s.integer("len", 64));
    }
    if (s.name == "qround") {
      s.only({"len"});
      return make_qround(s.integer("len", 32));
    }
    if (s.name == "list") {
      s.only({"count", "len", "seed"});
      if (!s.params.count("count")) throw ConfigError("list needs count= (or member lines in a config file)");
      return make_generated_list(s.integer("count", 0), s.integer("len", 16), s.integer("seed", 0));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(t + ": " + e.what());
  }
  throw ConfigError("unknown family '" + s.name + "' (expected qprop, qbin, qtert, qtree, qround, list or union(...))");
}

KeyValues read_key_values(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return read_key_values(in, path);
}

FamilyPtr family_from_entries(const KeyValues& entries) {
  std::optional<std::string> family;
  std::vector<MeanVector> members;
  for (const auto& [k, v] : entries) {
    if (k == "family") family = v;
    if (k == "member") members.push_back(parse_member(v));
  }
  if (!family) throw ConfigError("config has no 'family' entry");
  if (trim(*family) == "list" && !members.empty()) return make_countable_list(std::move(members));
  if (!members.empty()) throw ConfigError("'member' lines are only valid with 'family = list'");
  return parse_family(*family);
}

Spec default_estimator_for(const Family& family) {
  const std::string name = parse_spec(family.spec().substr(0, family.spec().find('('))).name;
  if (name == "list") return parse_spec("eps:eps=0");
  if (name == "qbin") return parse_spec("bin");
  if (name == "qround") return parse_spec("round");
  if (name == "qprop") return parse_spec("separable");
  if (name == "qtree") return parse_spec("tree:depth=12");
  throw ConfigError("no default learner for family '" + family.spec() + "'");
}

Learner make_learner(const Spec& est, const FamilyPtr& family) {
  if (est.name == "empirical") {
    est.only({});
    return [](const SampleSet& s) { return EstimatorReport(empirical_mean(s)); };
  }
  if (est.name == "eps") {
    est.only({"eps", "max"});
    const double eps = est.number("eps", 0.0);
    const std::uint64_t max = est.integer("max", kDefaultMaxCandidates);
    if (eps < 0.0) throw ConfigError("eps must be non-negative");
    return [family, eps, max](const SampleSet& s) {
      auto cov = cover(*family, eps);
      return eps_approximate(*cov, s, eps, max);
    };
  }
  if (est.name == "separable") {
    est.only({"k_max", "max"});
    const int k_max = static_cast<int>(est.integer("k_max", 0));
    const std::uint64_t max = est.integer("max", kDefaultMaxCandidates);
    return [family, k_max, max](const SampleSet& s) { return separable_learn(*family, s, k_max, max); };
  }
  if (est.name == "bin") {
    est.only({});
    return [](const SampleSet& s) { return bin_learn(s); };
  }
  if (est.name == "round") {
    est.only({});
    return [](const SampleSet& s) { return round_learn(s); };
  }
  if (est.name == "tree") {
    est.only({"depth"});
    const int depth = static_cast<int>(est.integer("depth", 12));
    if (depth < 1 || depth > 30) throw ConfigError("tree depth must lie in 1..30");
    return [depth](const SampleSet& s) { return tree_learn(s, depth); };
  }
  if (est.name == "union") {
    est.only({"registry", "k_cap"});
    const std::string path = est.string("registry", "");
    if (path.empty()) throw ConfigError("union needs registry=<path>");
    auto reg = std::make_shared<RegistryConfig>(load_registry(path));
    const int k_cap = static_cast<int>(est.integer("k_cap", 0));
    return [reg, k_cap](const SampleSet& s) {
      return union_learn(reg->learners, *reg->union_family, s, k_cap).report;
    };
  }
  throw ConfigError("unknown estimator '" + est.name +
                    "' (expected empirical, eps, separable, bin, round, tree or union)");
}

RegistryConfig parse_registry(const KeyValues& entries) {
  RegistryConfig cfg;
  std::vector<FamilyPtr> parts;
  for (const auto& [k, v] : entries) {
    if (k == "learner") {
      const auto w = words(v);
      if (w.size() < 2 || w.size() > 3) {
        throw ConfigError("learner line '" + v + "' must read: <name> <family-spec> [estimator-spec]");
      }
      auto family = parse_family(w[1]);
      const Spec est = w.size() == 3 ? parse_spec(w[2]) : default_estimator_for(*family);
      cfg.learners.push_back({w[0], family, make_learner(est, family)});
      cfg.estimator_specs.push_back(est.text());
      parts.push_back(family);
    } else if (k == "truth_learner") {
      cfg.truth_learner = parse_u64(v, "truth_learner");
    } else if (k == "truth_seed") {
      cfg.truth_seed = parse_u64(v, "truth_seed");
    } else {
      throw ConfigError("unknown registry key '" + k + "'");
    }
  }
  if (cfg.learners.empty()) throw ConfigError("registry lists no learners");
  if (cfg.truth_learner && (*cfg.truth_learner == 0 || *cfg.truth_learner > cfg.learners.size())) {
    throw ConfigError("truth_learner must name a registry position 1.." + std::to_string(cfg.learners.size()));
  }
  cfg.union_family = make_union(std::move(parts));
  return cfg;
}

RegistryConfig load_registry(const std::string& path) { return parse_registry(read_key_values_file(path)); }

}  // namespace ume
