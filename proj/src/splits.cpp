#include "rulebench/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rulebench/random.hpp"

namespace rulebench {

namespace {

constexpr std::uint64_t kShuffleStream = fnv1a64("rule-shuffle");
constexpr std::uint64_t kTrainSide = fnv1a64("train");
constexpr std::uint64_t kTestSide = fnv1a64("test");

std::vector<TaskSpec> make_tasks(const SplitSpec& spec, const std::vector<RuleId>& rules,
                                 const std::vector<std::size_t>& lengths, std::size_t horizon,
                                 std::size_t count, std::uint64_t side) {
  std::vector<TaskSpec> tasks;
  tasks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t task_seed = derive_seed(spec.split_seed, {side, i});
    tasks.push_back(make_task(rules[i % rules.size()], lengths[i % lengths.size()], horizon,
                              task_seed, spec.boundary, spec.target));
  }
  return tasks;
}

}  // namespace

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::id:
      return "id";
    case Protocol::holdout_rule:
      return "holdout_rule";
    case Protocol::holdout_length:
      return "holdout_length";
  }
  return "unknown";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "id") return Protocol::id;
  if (text == "holdout_rule") return Protocol::holdout_rule;
  if (text == "holdout_length") return Protocol::holdout_length;
  throw ConfigError("unknown protocol '" + std::string(text) + "'");
}

void SplitSpec::validate() const {
  if (candidate_rules.empty()) throw ConfigError("candidate_rules is empty");
  std::set<RuleId> unique(candidate_rules.begin(), candidate_rules.end());
  if (unique.size() != candidate_rules.size()) throw ConfigError("candidate_rules has duplicates");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  if (train_lengths.empty()) throw ConfigError("train_lengths is empty");
  for (auto len : train_lengths) {
    if (len < kMinTapeLength) throw ConfigError("train length below 3");
  }
  if (horizon < 1 || (test_horizon && *test_horizon < 1)) {
    throw ConfigError("horizon must be at least 1");
  }
  if (n_train_tasks < 1 || n_test_tasks < 1) throw ConfigError("task counts must be at least 1");
  if (protocol == Protocol::holdout_rule && candidate_rules.size() < 2) {
    throw ConfigError("holdout_rule needs at least 2 candidate rules for non-empty sides");
  }
  if (protocol == Protocol::holdout_length) {
    if (test_lengths.empty()) throw ConfigError("holdout_length needs test_lengths");
    for (auto len : test_lengths) {
      if (len < kMinTapeLength) throw ConfigError("test length below 3");
      if (std::find(train_lengths.begin(), train_lengths.end(), len) != train_lengths.end()) {
        throw ConfigError("length " + std::to_string(len) + " is in both train and test lengths");
      }
    }
  }
}

Split make_split(const SplitSpec& spec) {
  spec.validate();
  Split split;
  split.protocol = spec.protocol;
  const std::size_t test_horizon = spec.test_horizon.value_or(spec.horizon);
  const auto& test_lengths =
      spec.protocol == Protocol::holdout_length ? spec.test_lengths : spec.train_lengths;

  switch (spec.protocol) {
    case Protocol::holdout_rule: {
      std::vector<RuleId> order = spec.candidate_rules;
      Rng rng(derive_seed(spec.split_seed, {kShuffleStream}));
      rng.shuffle(order);
      const auto n = order.size();
      auto n_train = static_cast<std::size_t>(
          std::llround(spec.train_fraction * static_cast<double>(n)));
      n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
      split.train_rules.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
      split.test_rules.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
      break;
    }
    case Protocol::id:
    case Protocol::holdout_length: {
      std::vector<RuleId> order = spec.candidate_rules;
      Rng rng(derive_seed(spec.split_seed, {kShuffleStream}));
      rng.shuffle(order);
      split.train_rules = order;
      split.test_rules = order;
      break;
    }
  }

  split.train = make_tasks(spec, split.train_rules, spec.train_lengths, spec.horizon,
                           spec.n_train_tasks, kTrainSide);
  split.test = make_tasks(spec, split.test_rules, test_lengths, test_horizon, spec.n_test_tasks,
                          kTestSide);
  return split;
}

namespace {

void check_split(const std::vector<TaskSpec>& train, const std::vector<TaskSpec>& test,
                 const std::vector<RuleId>& declared_train, const std::vector<RuleId>& declared_test,
                 Protocol protocol, SplitReport& report) {
  if (train.empty() && declared_train.empty()) {
    report.violations.push_back({SplitViolation::Kind::empty_side, "train side is empty", {}, {}});
  }
  if (test.empty() && declared_test.empty()) {
    report.violations.push_back({SplitViolation::Kind::empty_side, "test side is empty", {}, {}});
  }

  std::set<RuleId> train_rules(declared_train.begin(), declared_train.end());
  std::set<RuleId> test_rules(declared_test.begin(), declared_test.end());
  std::set<std::size_t> train_lengths;
  std::set<std::size_t> test_lengths;
  for (const auto& t : train) {
    train_rules.insert(t.rule);
    train_lengths.insert(t.length);
  }
  for (const auto& t : test) {
    test_rules.insert(t.rule);
    test_lengths.insert(t.length);
  }

  switch (protocol) {
    case Protocol::holdout_rule:
      for (auto rule : test_rules) {
        if (train_rules.contains(rule)) {
          report.violations.push_back({SplitViolation::Kind::shared_rule,
                                       "rule " + std::to_string(rule.value()) +
                                           " appears on both train and test sides",
                                       rule,
                                       {}});
        }
      }
      break;
    case Protocol::id:
      for (auto rule : test_rules) {
        if (!train_rules.contains(rule)) {
          report.violations.push_back({SplitViolation::Kind::uncovered_rule,
                                       "test rule " + std::to_string(rule.value()) +
                                           " is not in the train rule set",
                                       rule,
                                       {}});
        }
      }
      break;
    case Protocol::holdout_length:
      for (auto len : test_lengths) {
        if (train_lengths.contains(len)) {
          report.violations.push_back({SplitViolation::Kind::shared_length,
                                       "length " + std::to_string(len) +
                                           " appears on both train and test sides",
                                       {},
                                       len});
        }
      }
      break;
  }
}

}  // namespace

SplitReport verify_split(const std::vector<TaskSpec>& train, const std::vector<TaskSpec>& test,
                         Protocol protocol,
                         std::optional<std::pair<std::size_t, std::size_t>> expected_counts) {
  SplitReport report;
  check_split(train, test, {}, {}, protocol, report);
  if (expected_counts) {
    if (train.size() != expected_counts->first || test.size() != expected_counts->second) {
      report.violations.push_back(
          {SplitViolation::Kind::count,
           "task counts " + std::to_string(train.size()) + "/" + std::to_string(test.size()) +
               " differ from expected " + std::to_string(expected_counts->first) + "/" +
               std::to_string(expected_counts->second),
           {},
           {}});
    }
  }
  return report;
}

SplitReport verify_split(const Split& split) {
  SplitReport report;
  check_split(split.train, split.test, split.train_rules, split.test_rules, split.protocol, report);
  return report;
}

SplitReport verify_split(const Split& split, const SplitSpec& spec) {
  SplitReport report;
  if (split.protocol != spec.protocol) {
    report.violations.push_back({SplitViolation::Kind::count, "split protocol differs from spec", {}, {}});
  }
  check_split(split.train, split.test, split.train_rules, split.test_rules, spec.protocol, report);
  if (split.train.size() != spec.n_train_tasks || split.test.size() != spec.n_test_tasks) {
    report.violations.push_back({SplitViolation::Kind::count,
                                 "task counts differ from n_train_tasks/n_test_tasks",
                                 {},
                                 {}});
  }
  return report;
}

}  // namespace rulebench
