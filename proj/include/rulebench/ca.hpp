#pragma once

// Elementary cellular automata over packed binary tapes.
//
// Cell 0 is the leftmost cell. A neighborhood (left, center, right) indexes the
// rule table as k = 4*left + 2*center + right, and the output for k is bit k of
// the Wolfram rule number.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rulebench {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Boundary : std::uint8_t { periodic, fixed_zero };

std::string_view to_string(Boundary boundary);
Boundary parse_boundary(std::string_view text);

inline constexpr std::size_t kMinTapeLength = 3;

class RuleId {
 public:
  constexpr RuleId() = default;
  explicit RuleId(int value);

  static std::vector<RuleId> all();

  constexpr int value() const { return value_; }
  constexpr bool bit(int k) const { return ((value_ >> k) & 1) != 0; }

  friend constexpr auto operator<=>(RuleId, RuleId) = default;

 private:
  std::uint8_t value_ = 0;
};

struct RuleTable {
  std::array<std::uint8_t, 8> outputs{};

  std::uint8_t output(int left, int center, int right) const {
    return outputs[static_cast<std::size_t>(4 * left + 2 * center + right)];
  }
  RuleId encode() const;
};

RuleTable decode_rule(RuleId rule);
// Checked variant for untrusted integers.
RuleTable decode_rule(int rule);

class Tape {
 public:
  Tape() = default;
  // All-zero tape.
  explicit Tape(std::size_t length);

  static Tape from_string(std::string_view cells);
  // Bit i of `bits` becomes cell i. Requires length <= 64.
  static Tape from_bits(std::uint64_t bits, std::size_t length);
  static Tape from_words(std::span<const std::uint64_t> words, std::size_t length);

  std::size_t length() const { return length_; }
  bool cell(std::size_t index) const;
  void set(std::size_t index, bool value);
  Tape with_flipped(std::size_t index) const;

  std::span<const std::uint64_t> words() const { return words_; }
  // Packed cells as an integer, cell i at bit i. Requires length <= 64.
  std::uint64_t bits() const;

  std::size_t count_ones() const;
  std::size_t count_matches(const Tape& other) const;
  bool all_zero() const;

  std::string to_string() const;

  friend bool operator==(const Tape&, const Tape&) = default;
  friend std::strong_ordering operator<=>(const Tape& a, const Tape& b);

 private:
  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

Tape step(const Tape& tape, RuleId rule, Boundary boundary = Boundary::periodic);

std::vector<Tape> enumerate_orbit(const Tape& tape, RuleId rule, std::size_t steps,
                                  Boundary boundary = Boundary::periodic);

namespace kernel {

inline std::uint64_t low_mask(std::size_t length) {
  return length >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << length) - 1;
}

// Bit-sliced rule application: one AND-term per set rule bit.
inline std::uint64_t apply_rule(std::uint64_t left, std::uint64_t center, std::uint64_t right,
                                int rule) {
  std::uint64_t out = 0;
  for (int k = 0; k < 8; ++k) {
    if (((rule >> k) & 1) == 0) continue;
    const std::uint64_t l = (k & 4) ? left : ~left;
    const std::uint64_t c = (k & 2) ? center : ~center;
    const std::uint64_t r = (k & 1) ? right : ~right;
    out |= l & c & r;
  }
  return out;
}

// Single-word step for tapes of length 3..64.
inline std::uint64_t step_word(std::uint64_t cells, std::size_t length, int rule,
                               Boundary boundary) {
  const std::uint64_t mask = low_mask(length);
  const std::uint64_t last = (cells >> (length - 1)) & 1;
  const std::uint64_t first = cells & 1;
  std::uint64_t left = cells << 1;
  std::uint64_t right = cells >> 1;
  if (boundary == Boundary::periodic) {
    left |= last;
    right |= first << (length - 1);
  }
  return apply_rule(left, cells, right, rule) & mask;
}

// Multi-word step; `out` must have the same size as `in`.
void step_words(std::span<const std::uint64_t> in, std::span<std::uint64_t> out,
                std::size_t length, int rule, Boundary boundary);

}  // namespace kernel

}  // namespace rulebench
