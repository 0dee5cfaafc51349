#include <doctest.h>

#include <algorithm>
#include <set>

#include "rulebench/splits.hpp"

using namespace rulebench;

namespace {

std::vector<RuleId> rules(std::initializer_list<int> values) {
  std::vector<RuleId> out;
  for (int v : values) out.emplace_back(v);
  return out;
}

SplitSpec small_spec(Protocol protocol) {
  SplitSpec s;
  s.protocol = protocol;
  s.candidate_rules = rules({0, 90, 110, 204});
  s.train_fraction = 0.5;
  s.train_lengths = {8};
  s.n_train_tasks = 6;
  s.n_test_tasks = 5;
  s.split_seed = 3;
  return s;
}

}  // namespace

TEST_CASE("holdout_rule partitions the candidate set") {
  const auto split = make_split(small_spec(Protocol::holdout_rule));
  CHECK(split.train_rules.size() == 2);
  CHECK(split.test_rules.size() == 2);
  std::set<RuleId> all(split.train_rules.begin(), split.train_rules.end());
  for (auto r : split.test_rules) CHECK(all.insert(r).second);
  CHECK(all.size() == 4);
  CHECK(split.train.size() == 6);
  CHECK(split.test.size() == 5);
  for (const auto& t : split.test) {
    CHECK(std::find(split.test_rules.begin(), split.test_rules.end(), t.rule) != split.test_rules.end());
  }
  CHECK(verify_split(split).ok());
}

TEST_CASE("id protocol draws test rules from the train set with distinct seeds") {
  const auto split = make_split(small_spec(Protocol::id));
  std::set<RuleId> train_rules(split.train_rules.begin(), split.train_rules.end());
  std::set<std::uint64_t> seeds;
  for (const auto& t : split.train) seeds.insert(t.task_seed);
  for (const auto& t : split.test) {
    CHECK(train_rules.contains(t.rule));
    CHECK_FALSE(seeds.contains(t.task_seed));
  }
  CHECK(verify_split(split).ok());
}

TEST_CASE("holdout_length varies length with fixed rules") {
  auto spec = small_spec(Protocol::holdout_length);
  spec.train_lengths = {8, 10};
  spec.test_lengths = {12};
  const auto split = make_split(spec);
  for (const auto& t : split.train) CHECK((t.length == 8 || t.length == 10));
  for (const auto& t : split.test) CHECK(t.length == 12);
  CHECK(split.train_rules == split.test_rules);
  CHECK(verify_split(split, spec).ok());
}

TEST_CASE("make_split is deterministic") {
  const auto spec = small_spec(Protocol::holdout_rule);
  const auto a = make_split(spec);
  const auto b = make_split(spec);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train_rules == b.train_rules);
}

TEST_CASE("holdout_rule disjointness and counts over 100 seeds") {
  SplitSpec spec;
  spec.protocol = Protocol::holdout_rule;
  spec.train_lengths = {8};
  spec.n_train_tasks = 20;
  spec.n_test_tasks = 7;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    spec.split_seed = seed;
    spec.train_fraction = 0.1 + 0.008 * static_cast<double>(seed);
    const auto split = make_split(spec);
    std::set<RuleId> train(split.train_rules.begin(), split.train_rules.end());
    for (auto r : split.test_rules) CHECK_FALSE(train.contains(r));
    for (const auto& t : split.test) CHECK_FALSE(train.contains(t.rule));
    CHECK(split.train.size() == 20);
    CHECK(split.test.size() == 7);
    CHECK(verify_split(split, spec).ok());
  }
}

TEST_CASE("corrupted splits are reported") {
  SUBCASE("one shared rule yields exactly one violation naming it") {
    auto split = make_split(small_spec(Protocol::holdout_rule));
    const RuleId leaked = split.train_rules.front();
    split.test.front().rule = leaked;
    const auto report = verify_split(split);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == SplitViolation::Kind::shared_rule);
    REQUIRE(report.violations[0].rule.has_value());
    CHECK(*report.violations[0].rule == leaked);
    CHECK(report.violations[0].message.find(std::to_string(leaked.value())) != std::string::npos);
  }
  SUBCASE("overlapping lengths name the shared length") {
    auto spec = small_spec(Protocol::holdout_length);
    spec.train_lengths = {8};
    spec.test_lengths = {9};
    auto split = make_split(spec);
    split.test[0] = make_task(split.test[0].rule, 8, 16, 1);
    const auto report = verify_split(split.train, split.test, Protocol::holdout_length);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == SplitViolation::Kind::shared_length);
    CHECK(report.violations[0].length == std::optional<std::size_t>(8));
  }
  SUBCASE("id split with an unseen rule") {
    auto split = make_split(small_spec(Protocol::id));
    split.test.back().rule = RuleId(30);
    const auto report = verify_split(split);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == SplitViolation::Kind::uncovered_rule);
  }
  SUBCASE("task count differs from the SplitSpec") {
    const auto spec = small_spec(Protocol::holdout_rule);
    auto split = make_split(spec);
    split.test.pop_back();
    CHECK_FALSE(verify_split(split, spec).ok());
  }
  SUBCASE("empty side") {
    const auto report = verify_split({}, make_split(small_spec(Protocol::id)).test, Protocol::id);
    CHECK_FALSE(report.ok());
  }
}

TEST_CASE("invalid specs are rejected") {
  auto spec = small_spec(Protocol::holdout_rule);
  spec.candidate_rules = rules({110});
  CHECK_THROWS_AS(make_split(spec), ConfigError);
  spec = small_spec(Protocol::holdout_rule);
  spec.candidate_rules.clear();
  CHECK_THROWS_AS(make_split(spec), ConfigError);
  spec = small_spec(Protocol::holdout_rule);
  spec.train_fraction = 1.0;
  CHECK_THROWS_AS(make_split(spec), ConfigError);
  spec = small_spec(Protocol::holdout_length);
  spec.test_lengths = {8};
  CHECK_THROWS_AS(make_split(spec), ConfigError);
  spec = small_spec(Protocol::holdout_rule);
  spec.candidate_rules = rules({90, 90, 110});
  CHECK_THROWS_AS(make_split(spec), ConfigError);
  CHECK_THROWS_AS(parse_protocol("iid"), ConfigError);
}

TEST_CASE("extreme train fractions keep both sides non-empty") {
  auto spec = small_spec(Protocol::holdout_rule);
  spec.train_fraction = 0.01;
  auto split = make_split(spec);
  CHECK(split.train_rules.size() == 1);
  spec.train_fraction = 0.99;
  split = make_split(spec);
  CHECK(split.test_rules.size() == 1);
}
