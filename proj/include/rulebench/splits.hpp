#pragma once

// Train/test protocol splits.
//
//   id              train and test tasks draw from one rule set; the two sides
//                   differ only in task seeds.
//   holdout_rule    candidate rules are shuffled (Fisher-Yates, Rng seeded by
//                   split_seed) and cut into disjoint train and test rule sets.
//   holdout_length  all candidate rules on both sides; tape lengths differ.
//
// Task i on a side takes rule side_rules[i % |side_rules|] and length
// side_lengths[i % |side_lengths|]; its seed is
// derive_seed(split_seed, {fnv1a64(side), i}).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rulebench/ca.hpp"
#include "rulebench/environment.hpp"

namespace rulebench {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Protocol : std::uint8_t { id, holdout_rule, holdout_length };

std::string_view to_string(Protocol protocol);
Protocol parse_protocol(std::string_view text);

struct SplitSpec {
  Protocol protocol = Protocol::holdout_rule;
  std::vector<RuleId> candidate_rules = RuleId::all();
  double train_fraction = 0.5;
  std::vector<std::size_t> train_lengths{kDefaultLength};
  // Only read by holdout_length; the other protocols use train_lengths on both sides.
  std::vector<std::size_t> test_lengths;
  std::size_t horizon = kDefaultHorizon;
  // Horizon for test tasks; defaults to `horizon`.
  std::optional<std::size_t> test_horizon;
  std::uint64_t split_seed = 0;
  std::size_t n_train_tasks = 16;
  std::size_t n_test_tasks = 5;
  Boundary boundary = Boundary::periodic;
  TargetOptions target;

  void validate() const;
};

struct Split {
  Protocol protocol = Protocol::holdout_rule;
  std::vector<RuleId> train_rules;
  std::vector<RuleId> test_rules;
  std::vector<TaskSpec> train;
  std::vector<TaskSpec> test;
};

Split make_split(const SplitSpec& spec);

struct SplitViolation {
  enum class Kind : std::uint8_t { shared_rule, shared_length, uncovered_rule, empty_side, count };
  Kind kind;
  std::string message;
  std::optional<RuleId> rule;
  std::optional<std::size_t> length;
};

struct SplitReport {
  std::vector<SplitViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the protocol's disjointness and coverage rules on concrete task lists.
// Task counts are checked only when `expected_counts` is set.
SplitReport verify_split(const std::vector<TaskSpec>& train, const std::vector<TaskSpec>& test,
                         Protocol protocol,
                         std::optional<std::pair<std::size_t, std::size_t>> expected_counts = {});
// Uses the split's declared rule sets in addition to the task lists.
SplitReport verify_split(const Split& split);
SplitReport verify_split(const Split& split, const SplitSpec& spec);

}  // namespace rulebench
