#include "rulebench/ca.hpp"

#include <algorithm>
#include <bit>

namespace rulebench {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t length) { return (length + kWordBits - 1) / kWordBits; }

void require_length(std::size_t length) {
  if (length < kMinTapeLength) {
    throw DomainError("tape length " + std::to_string(length) + " is below the minimum of 3");
  }
}

}  // namespace

std::string_view to_string(Boundary boundary) {
  return boundary == Boundary::periodic ? "periodic" : "fixed_zero";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "periodic") return Boundary::periodic;
  if (text == "fixed_zero") return Boundary::fixed_zero;
  throw DomainError("unknown boundary '" + std::string(text) + "'");
}

RuleId::RuleId(int value) {
  if (value < 0 || value > 255) {
    throw DomainError("rule " + std::to_string(value) + " outside [0, 255]");
  }
  value_ = static_cast<std::uint8_t>(value);
}

std::vector<RuleId> RuleId::all() {
  std::vector<RuleId> rules;
  rules.reserve(256);
  for (int r = 0; r < 256; ++r) rules.emplace_back(r);
  return rules;
}

RuleId RuleTable::encode() const {
  int value = 0;
  for (int k = 0; k < 8; ++k) value |= (outputs[static_cast<std::size_t>(k)] & 1) << k;
  return RuleId(value);
}

RuleTable decode_rule(RuleId rule) {
  RuleTable table;
  for (int k = 0; k < 8; ++k) table.outputs[static_cast<std::size_t>(k)] = rule.bit(k) ? 1 : 0;
  return table;
}

RuleTable decode_rule(int rule) { return decode_rule(RuleId(rule)); }

Tape::Tape(std::size_t length) : length_(length), words_(word_count(length), 0) {
  require_length(length);
}

Tape Tape::from_string(std::string_view cells) {
  Tape tape(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] == '1') {
      tape.set(i, true);
    } else if (cells[i] != '0') {
      throw DomainError("tape text may only contain '0' and '1'");
    }
  }
  return tape;
}

Tape Tape::from_bits(std::uint64_t bits, std::size_t length) {
  if (length > kWordBits) throw DomainError("from_bits supports at most 64 cells");
  Tape tape(length);
  tape.words_[0] = bits & kernel::low_mask(length);
  return tape;
}

Tape Tape::from_words(std::span<const std::uint64_t> words, std::size_t length) {
  Tape tape(length);
  if (words.size() != tape.words_.size()) throw DomainError("word count does not match length");
  std::copy(words.begin(), words.end(), tape.words_.begin());
  tape.words_.back() &= kernel::low_mask(length - (tape.words_.size() - 1) * kWordBits);
  return tape;
}

bool Tape::cell(std::size_t index) const {
  if (index >= length_) throw DomainError("cell index out of range");
  return ((words_[index / kWordBits] >> (index % kWordBits)) & 1) != 0;
}

void Tape::set(std::size_t index, bool value) {
  if (index >= length_) throw DomainError("cell index out of range");
  const std::uint64_t bit = std::uint64_t{1} << (index % kWordBits);
  if (value) {
    words_[index / kWordBits] |= bit;
  } else {
    words_[index / kWordBits] &= ~bit;
  }
}

Tape Tape::with_flipped(std::size_t index) const {
  if (index >= length_) {
    throw DomainError("flip index " + std::to_string(index) + " out of bounds for length " +
                      std::to_string(length_));
  }
  Tape out = *this;
  out.words_[index / kWordBits] ^= std::uint64_t{1} << (index % kWordBits);
  return out;
}

std::uint64_t Tape::bits() const {
  if (length_ > kWordBits) throw DomainError("bits() supports at most 64 cells");
  return words_.empty() ? 0 : words_[0];
}

std::size_t Tape::count_ones() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t Tape::count_matches(const Tape& other) const {
  if (other.length_ != length_) throw DomainError("tape lengths differ");
  std::size_t mismatches = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    mismatches += static_cast<std::size_t>(std::popcount(words_[w] ^ other.words_[w]));
  }
  return length_ - mismatches;
}

bool Tape::all_zero() const {
  return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
}

std::string Tape::to_string() const {
  std::string s(length_, '0');
  for (std::size_t i = 0; i < length_; ++i) {
    if (cell(i)) s[i] = '1';
  }
  return s;
}

std::strong_ordering operator<=>(const Tape& a, const Tape& b) {
  if (auto c = a.length_ <=> b.length_; c != 0) return c;
  // Most significant word first so single-word tapes order by integer value.
  for (std::size_t w = a.words_.size(); w-- > 0;) {
    if (auto c = a.words_[w] <=> b.words_[w]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

namespace kernel {

void step_words(std::span<const std::uint64_t> in, std::span<std::uint64_t> out,
                std::size_t length, int rule, Boundary boundary) {
  const std::size_t n = in.size();
  const std::size_t last_index = length - 1;
  const std::uint64_t last = (in[last_index / kWordBits] >> (last_index % kWordBits)) & 1;
  const std::uint64_t first = in[0] & 1;
  const bool periodic = boundary == Boundary::periodic;

  for (std::size_t w = 0; w < n; ++w) {
    std::uint64_t left = in[w] << 1;
    if (w > 0) {
      left |= in[w - 1] >> 63;
    } else if (periodic) {
      left |= last;
    }
    std::uint64_t right = in[w] >> 1;
    if (w + 1 < n) right |= in[w + 1] << 63;
    if (periodic && w == last_index / kWordBits) {
      right |= first << (last_index % kWordBits);
    }
    out[w] = apply_rule(left, in[w], right, rule);
  }
  out[n - 1] &= low_mask(length - (n - 1) * kWordBits);
}

}  // namespace kernel

Tape step(const Tape& tape, RuleId rule, Boundary boundary) {
  if (tape.length() <= kWordBits) {
    return Tape::from_bits(kernel::step_word(tape.bits(), tape.length(), rule.value(), boundary),
                           tape.length());
  }
  std::vector<std::uint64_t> out(tape.words().size());
  kernel::step_words(tape.words(), out, tape.length(), rule.value(), boundary);
  return Tape::from_words(out, tape.length());
}

std::vector<Tape> enumerate_orbit(const Tape& tape, RuleId rule, std::size_t steps,
                                  Boundary boundary) {
  std::vector<Tape> orbit;
  orbit.reserve(steps + 1);
  orbit.push_back(tape);
  for (std::size_t i = 0; i < steps; ++i) orbit.push_back(step(orbit.back(), rule, boundary));
  return orbit;
}

}  // namespace rulebench
