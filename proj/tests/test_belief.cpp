#include <doctest.h>

#include <cmath>
#include <map>

#include "rulebench/belief.hpp"

using namespace rulebench;

namespace {

std::vector<RuleId> rules(std::initializer_list<int> values) {
  std::vector<RuleId> out;
  for (int v : values) out.emplace_back(v);
  return out;
}

Belief random_belief(Rng& rng, std::size_t max_size) {
  std::vector<RuleId> pool = RuleId::all();
  rng.shuffle(pool);
  const std::size_t k = 1 + rng.uniform_below(max_size);
  std::vector<RuleId> support(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<double> w(k);
  for (auto& x : w) x = rng.uniform01() < 0.25 ? 0.0 : rng.uniform01();
  w[0] += 0.01;
  return Belief::from_weights(support, w);
}

}  // namespace

TEST_CASE("belief construction validates its invariants") {
  CHECK_THROWS_AS(Belief({}, {}), DomainError);
  CHECK_THROWS_AS(Belief(rules({1, 1}), {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(Belief(rules({1, 2}), {0.7, 0.7}), DomainError);
  CHECK_THROWS_AS(Belief(rules({1, 2}), {1.5, -0.5}), DomainError);
  CHECK_THROWS_AS(Belief::from_weights(rules({1, 2}), {0.0, 0.0}), DomainError);
  const auto b = Belief::from_weights(rules({3, 9}), {1.0, 3.0});
  CHECK(b.probability(RuleId(9)) == doctest::Approx(0.75));
  CHECK(b.probability(RuleId(10)) == 0.0);
}

TEST_CASE("posterior_update examples") {
  SUBCASE("identity observation selects rule 204") {
    const auto b = Belief::uniform(rules({0, 204}));
    const auto s = Tape::from_string("0110");
    const auto post = posterior_update(b, {s, Action::no_op(), s});
    CHECK(post.probability(RuleId(204)) == 1.0);
    CHECK(post.probability(RuleId(0)) == 0.0);
    CHECK(post.support().size() == 2);
    CHECK(post.support()[0] == RuleId(0));
  }
  SUBCASE("delta belief is unchanged by a consistent transition") {
    const auto b = Belief::delta(RuleId(110));
    const auto s = Tape::from_string("01101");
    const auto post = posterior_update(b, {s, Action::flip(1), step(s.with_flipped(1), RuleId(110))});
    CHECK(post.probability(RuleId(110)) == 1.0);
  }
  SUBCASE("only the complement rule maps 0000 to 1111") {
    const auto b = Belief::uniform(rules({0, 51, 204, 90}));
    const auto post = posterior_update(
        b, {Tape::from_string("0000"), Action::no_op(), Tape::from_string("1111")});
    CHECK(post.probability(RuleId(51)) == 1.0);
    CHECK(entropy(post) == 0.0);
  }
  SUBCASE("an unexplainable transition raises InferenceError") {
    const auto b = Belief::uniform(rules({0, 204}));
    CHECK_THROWS_AS(posterior_update(b, {Tape::from_string("0000"), Action::no_op(),
                                         Tape::from_string("1111")}),
                    InferenceError);
  }
}

TEST_CASE("entropy examples") {
  CHECK(entropy(Belief::delta(RuleId(5))) == 0.0);
  CHECK(entropy(Belief::uniform(rules({1, 2}))) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(entropy(Belief::uniform(RuleId::all())) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(entropy_bits(std::vector<double>{0.5, 0.5, 0.0}) == doctest::Approx(1.0));
  CHECK(kl_bits(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}) == doctest::Approx(1.0));
}

TEST_CASE("predictive examples") {
  const auto s = Tape::from_string("0110");
  SUBCASE("delta belief") {
    const auto p = predictive(Belief::delta(RuleId(30)), s, Action::flip(0));
    REQUIRE(p.outcomes.size() == 1);
    CHECK(p.probs[0] == 1.0);
  }
  SUBCASE("rules 0 and 204 split the mass") {
    const auto p = predictive(Belief::uniform(rules({0, 204})), s, Action::no_op());
    REQUIRE(p.outcomes.size() == 2);
    std::map<std::string, double> m;
    for (std::size_t i = 0; i < 2; ++i) m[p.outcomes[i].to_string()] = p.probs[i];
    CHECK(m["0000"] == 0.5);
    CHECK(m["0110"] == 0.5);
    CHECK(p.outcomes[0] < p.outcomes[1]);
  }
  SUBCASE("two rules agreeing on a state give one outcome") {
    // Search for a pair of distinct rules and a tape where their predictions coincide.
    bool found = false;
    for (int a = 0; a < 256 && !found; ++a) {
      for (int b = a + 1; b < 256 && !found; ++b) {
        for (std::uint64_t bits = 0; bits < 16 && !found; ++bits) {
          const auto t = Tape::from_bits(bits, 4);
          if (step(t, RuleId(a)) != step(t, RuleId(b))) continue;
          const auto p = predictive(Belief::uniform(rules({a, b})), t, Action::no_op());
          CHECK(p.outcomes.size() == 1);
          CHECK(p.probs[0] == 1.0);
          CHECK(info_gain_entropy(Belief::uniform(rules({a, b})), t, Action::no_op()) ==
                doctest::Approx(0.0));
          found = true;
        }
      }
    }
    CHECK(found);
  }
}

TEST_CASE("information gain examples") {
  const auto s = Tape::from_string("0110");
  const auto two = Belief::uniform(rules({0, 204}));
  CHECK(info_gain_entropy(two, s, Action::no_op()) == doctest::Approx(1.0));
  CHECK(info_gain_mi(two, s, Action::no_op()) == doctest::Approx(1.0));
  CHECK(info_gain_kl(two, s, Action::no_op()) == doctest::Approx(1.0));
  const auto delta = Belief::delta(RuleId(110));
  CHECK(info_gain_entropy(delta, s, Action::flip(2)) == 0.0);
  CHECK(info_gain_mi(delta, s, Action::flip(2)) == 0.0);
  CHECK(info_gain_kl(delta, s, Action::flip(2)) == 0.0);
}

TEST_CASE("a quadruple split into two indistinguishable pairs carries one bit") {
  // Search rules 0..63 on tape 0110 for four rules whose predictions form two pairs.
  const auto s = Tape::from_string("0110");
  std::map<std::string, std::vector<int>> by_outcome;
  for (int r = 0; r < 64; ++r) by_outcome[step(s, RuleId(r)).to_string()].push_back(r);
  std::vector<int> quad;
  for (const auto& [outcome, rs] : by_outcome) {
    if (rs.size() >= 2 && quad.size() < 4) {
      quad.push_back(rs[0]);
      quad.push_back(rs[1]);
    }
  }
  REQUIRE(quad.size() == 4);
  const auto b = Belief::uniform(rules({quad[0], quad[1], quad[2], quad[3]}));
  CHECK(predictive(b, s, Action::no_op()).outcomes.size() == 2);
  CHECK(info_gain_entropy(b, s, Action::no_op()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(info_gain_mi(b, s, Action::no_op()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(info_gain_kl(b, s, Action::no_op()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("three IG forms agree and respect their bounds on random inputs") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto b = random_belief(rng, 16);
    const std::size_t length = 3 + rng.uniform_below(6);
    const auto s = random_tape(rng, length);
    const auto a = Action::from_index(rng.uniform_below(length + 1), length);
    const double h = info_gain_entropy(b, s, a);
    const double mi = info_gain_mi(b, s, a);
    const double kl = info_gain_kl(b, s, a);
    CHECK(std::abs(h - mi) <= 1e-9);
    CHECK(std::abs(h - kl) <= 1e-9);
    CHECK(std::abs(mi - kl) <= 1e-9);
    CHECK(std::min({h, mi, kl}) >= -1e-12);
    CHECK(std::max({h, mi, kl}) <= entropy(b) + 1e-12);
    const auto p = predictive(b, s, a);
    double total = 0;
    for (double x : p.probs) total += x;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("posterior keeps the true rule and never revives zero-mass rules") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    auto b = random_belief(rng, 16);
    std::vector<RuleId> positive;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b.probs()[i] > 0) positive.push_back(b.support()[i]);
    }
    const RuleId truth = positive[rng.uniform_below(positive.size())];
    const std::size_t length = 3 + rng.uniform_below(6);
    auto state = random_tape(rng, length);
    for (int t = 0; t < 6; ++t) {
      const auto a = Action::from_index(rng.uniform_below(length + 1), length);
      const auto next = step(intervene(state, a), truth);
      const auto post = posterior_update(b, {state, a, next});
      CHECK(post.probability(truth) > 0.0);
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (b.probs()[i] == 0.0) CHECK(post.probs()[i] == 0.0);
      }
      b = post;
      state = next;
    }
  }
}
