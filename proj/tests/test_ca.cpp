#include <doctest.h>

#include <random>

#include "oracles/ca_oracle.hpp"
#include "rulebench/ca.hpp"

using namespace rulebench;

TEST_CASE("decode_rule matches the Wolfram bit expansion") {
  SUBCASE("rule 0 outputs nothing") {
    const auto t = decode_rule(0);
    for (auto o : t.outputs) CHECK(o == 0);
  }
  SUBCASE("rule 110 over neighborhoods 111..000") {
    const auto t = decode_rule(110);
    const int expected[8] = {0, 1, 1, 0, 1, 1, 1, 0};
    int idx = 0;
    for (int k = 7; k >= 0; --k) {
      CHECK(t.output((k >> 2) & 1, (k >> 1) & 1, k & 1) == expected[idx++]);
    }
  }
  SUBCASE("rule 204 copies the center cell") {
    const auto t = decode_rule(204);
    for (int k = 0; k < 8; ++k) CHECK(t.output((k >> 2) & 1, (k >> 1) & 1, k & 1) == ((k >> 1) & 1));
  }
  SUBCASE("out-of-range rules are rejected") {
    CHECK_THROWS_AS(decode_rule(256), DomainError);
    CHECK_THROWS_AS(decode_rule(-1), DomainError);
    CHECK_THROWS_AS(RuleId(300), DomainError);
  }
}

TEST_CASE("decode_rule round-trips for every rule") {
  for (int r = 0; r < 256; ++r) {
    const auto t = decode_rule(r);
    for (int k = 0; k < 8; ++k) CHECK(t.outputs[k] == oracle::rule_output(r, (k >> 2) & 1, (k >> 1) & 1, k & 1));
    CHECK(t.encode().value() == r);
  }
}

TEST_CASE("RuleId orders by value") {
  CHECK(RuleId(3) < RuleId(200));
  CHECK(RuleId(7) == RuleId(7));
  const auto all = RuleId::all();
  REQUIRE(all.size() == 256);
  for (int r = 0; r < 256; ++r) CHECK(all[r].value() == r);
}

TEST_CASE("tape construction and text form") {
  const auto t = Tape::from_string("00100");
  CHECK(t.length() == 5);
  CHECK(t.cell(2));
  CHECK_FALSE(t.cell(0));
  CHECK(t.to_string() == "00100");
  CHECK(t.count_ones() == 1);
  CHECK_THROWS_AS(Tape(2), DomainError);
  CHECK_THROWS_AS(Tape::from_string("01"), DomainError);
  CHECK_THROWS_AS(Tape::from_string("0120"), DomainError);
  CHECK_THROWS_AS(t.with_flipped(5), DomainError);
  CHECK(Tape::from_bits(0b101, 3).to_string() == "101");
  CHECK(Tape::from_bits(0b001, 3).to_string() == "100");
  CHECK(Tape(4).all_zero());
}

TEST_CASE("step examples") {
  CHECK(step(Tape::from_string("00100"), RuleId(90)).to_string() == "01010");
  CHECK(step(Tape::from_string("10110111"), RuleId(0)).all_zero());
  const auto orbit = enumerate_orbit(Tape::from_string("00100"), RuleId(90), 2);
  REQUIRE(orbit.size() == 3);
  CHECK(orbit[0].to_string() == "00100");
  CHECK(orbit[1].to_string() == "01010");
  CHECK(orbit[2].to_string() == "10001");
  CHECK(enumerate_orbit(Tape::from_string("0110"), RuleId(30), 0).size() == 1);
  const auto id = enumerate_orbit(Tape::from_string("0110"), RuleId(204), 5);
  CHECK(id.size() == 6);
  for (const auto& x : id) CHECK(x.to_string() == "0110");
}

TEST_CASE("identity, complement and zero rules on every tape up to length 10") {
  for (std::size_t length = 3; length <= 10; ++length) {
    for (std::uint64_t bits = 0; bits < (1ULL << length); ++bits) {
      const auto t = Tape::from_bits(bits, length);
      CHECK(step(t, RuleId(204)) == t);
      CHECK(step(t, RuleId(51)).bits() == (~bits & kernel::low_mask(length)));
      CHECK(step(t, RuleId(0)).all_zero());
      CHECK(step(t, RuleId(204), Boundary::fixed_zero) == t);
    }
  }
}

TEST_CASE("packed kernel agrees with the brute-force oracle") {
  // Exhaustive short tapes for a spread of rules; full coverage runs in the acceptance suite.
  for (int rule : {30, 45, 54, 90, 110, 150, 184, 232}) {
    for (std::size_t length = 3; length <= 9; ++length) {
      for (std::uint64_t bits = 0; bits < (1ULL << length); ++bits) {
        const auto s = oracle::tape_string(bits, static_cast<int>(length));
        const auto t = Tape::from_string(s);
        REQUIRE(step(t, RuleId(rule)).to_string() == oracle::step_periodic(s, rule));
        REQUIRE(step(t, RuleId(rule), Boundary::fixed_zero).to_string() ==
                oracle::step_fixed_zero(s, rule));
      }
    }
  }
}

TEST_CASE("multi-word tapes agree with the oracle across word boundaries") {
  std::mt19937_64 gen(12345);
  for (std::size_t length : {63, 64, 65, 127, 128, 129, 200}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::string s(length, '0');
      for (auto& c : s) c = (gen() & 1) ? '1' : '0';
      const int rule = static_cast<int>(gen() % 256);
      const auto t = Tape::from_string(s);
      CHECK(step(t, RuleId(rule)).to_string() == oracle::step_periodic(s, rule));
      CHECK(step(t, RuleId(rule), Boundary::fixed_zero).to_string() == oracle::step_fixed_zero(s, rule));
    }
  }
}

TEST_CASE("step is deterministic and length-preserving") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t length = 3 + gen() % 80;
    std::string s(length, '0');
    for (auto& c : s) c = (gen() & 1) ? '1' : '0';
    const auto t = Tape::from_string(s);
    const RuleId rule(static_cast<int>(gen() % 256));
    const auto a = step(t, rule);
    CHECK(a.length() == length);
    CHECK(a == step(t, rule));
  }
}

TEST_CASE("tape ordering and match counting") {
  const auto a = Tape::from_string("0000");
  const auto b = Tape::from_string("1000");
  const auto c = Tape::from_string("0001");
  CHECK(a < b);
  CHECK(b < c);  // the highest-index cell is most significant
  CHECK(Tape::from_string("000") < a);
  CHECK(a.count_matches(Tape::from_string("1111")) == 0);
  CHECK(b.count_matches(Tape::from_string("1001")) == 3);
  CHECK_THROWS_AS((void)a.count_matches(Tape::from_string("000")), DomainError);
}
