#include <string>

#include "doctest.h"
#include "nandsan/codec.hpp"
#include "nandsan/rng.hpp"

using namespace nandsan;

namespace {

// Known-answer vectors for the "661004" walkthrough.
const std::string kBinary =
    "001101100011011000110001001100000011000000110100";
const std::string kRandom =
    "110110001101100011000100110000001100000011010000";
const std::string kStateRow = "P5,P5,P2,P7,P6,P1,P3,P6,P5,P3,P2,P6,P3,P1,P4,P3";
const std::string kSelectedRow =
    "P6,P7,P3,P7,P7,P4,P5,P7,P6,P4,P5,P7,P5,P2,P5,P4";
const std::string kPoBits =
    "100101000101101010110101100010110101110001110010";

std::vector<CellState> parse_state_row(const std::string& csv) {
  std::vector<CellState> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const auto comma = csv.find(',', pos);
    const auto end = comma == std::string::npos ? csv.size() : comma;
    out.push_back(parse_state(csv.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

std::string random_printable(Rng& rng, std::size_t len) {
  std::string s;
  for (std::size_t i = 0; i < len; ++i)
    s.push_back(static_cast<char>(0x20 + rng.below(0x7f - 0x20)));
  return s;
}

const ScramblerKey kShift2{ScramblerMode::shift2, 0};

}  // namespace

TEST_CASE("text_to_bits emits 8 bits per character, MSB first") {
  CHECK(bits_to_string(text_to_bits("661004")) == kBinary);
  CHECK(text_to_bits("").empty());
  CHECK(bits_to_string(text_to_bits("A")) == "01000001");
  CHECK_THROWS_AS(text_to_bits("\xc4payload"), NonAscii);
}

TEST_CASE("bits_to_text inverts text_to_bits") {
  CHECK(bits_to_text(text_to_bits("flash")) == "flash");
  CHECK(bits_to_text(bits_from_string("00110001")) == "1");
  CHECK_THROWS_AS(bits_to_text(bits_from_string("0110100")), BadLength);
  // non-printable bytes render as escapes
  CHECK(bits_to_text(bits_from_string("00000111")) == "\\x07");
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::string s = random_printable(rng, rng.below(24));
    CHECK(bits_to_text(text_to_bits(s)) == s);
  }
}

TEST_CASE("shift2 scrambling reproduces the known random row") {
  CHECK(bits_to_string(scramble(bits_from_string(kBinary), kShift2)) ==
        kRandom);
  CHECK(scramble({}, kShift2).empty());
}

TEST_CASE("shift2 descramble recovers payloads whose top 2 bits are 0") {
  CHECK(bits_to_string(descramble(bits_from_string(kRandom), kShift2)) ==
        kBinary);
  CHECK(descramble({}, kShift2).empty());
}

TEST_CASE("xor keystream scrambling") {
  const ScramblerKey key{ScramblerMode::xor_keystream, 0xabcd1234};

  SUBCASE("output is input XOR keystream; zero keystream bits pass through") {
    const BitString input = text_to_bits("key stream check");
    const BitString ks = keystream_bits(key.seed, input.size());
    const BitString output = scramble(input, key);
    for (std::size_t i = 0; i < input.size(); ++i) {
      CHECK(output[i] == (input[i] ^ ks[i]));
      if (ks[i] == 0) CHECK(output[i] == input[i]);
    }
  }

  SUBCASE("descramble is the exact inverse") {
    Rng rng(17);
    for (int i = 0; i < 10000; ++i) {
      const ScramblerKey k{ScramblerMode::xor_keystream, rng.next_u64()};
      BitString x(rng.below(64));
      for (auto& b : x) b = rng.next_bit() ? 1 : 0;
      CHECK(descramble(scramble(x, k), k) == x);
    }
  }
}

TEST_CASE("scramble preserves length") {
  Rng rng(23);
  for (int i = 0; i < 10000; ++i) {
    BitString x(rng.below(96));
    for (auto& b : x) b = rng.next_bit() ? 1 : 0;
    const ScramblerKey key =
        rng.next_bit() ? ScramblerKey{ScramblerMode::xor_keystream,
                                      rng.next_u64()}
                       : kShift2;
    CHECK(scramble(x, key).size() == x.size());
  }
}

TEST_CASE("bits_to_states maps consecutive triples") {
  CHECK(bits_to_states(bits_from_string(kRandom)) ==
        parse_state_row(kStateRow));
  CHECK(bits_to_states(bits_from_string("111")) ==
        std::vector<CellState>{CellState::E});
  CHECK_THROWS_AS(bits_to_states(bits_from_string("0110")), BadLength);
}

TEST_CASE("states_to_bits concatenates per-state codes") {
  CHECK(bits_to_string(states_to_bits(parse_state_row(kSelectedRow))) ==
        kPoBits);
  CHECK(states_to_bits(std::vector<CellState>{}).empty());
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    std::vector<CellState> states(rng.below(32));
    for (auto& s : states)
      s = state_from_ordinal(static_cast<int>(rng.below(8)));
    CHECK(bits_to_states(states_to_bits(states)) == states);
  }
}

TEST_CASE("encode_payload reproduces the walkthrough state row") {
  CHECK(encode_payload("661004", kShift2) == parse_state_row(kStateRow));
}

TEST_CASE("decode inverts encode under xor keys") {
  Rng rng(29);
  for (int i = 0; i < 10000; ++i) {
    const ScramblerKey key{ScramblerMode::xor_keystream, rng.next_u64()};
    // multiples of 3 characters keep the bit count divisible by both 8 and 3
    const std::string payload = random_printable(rng, 3 * (1 + rng.below(8)));
    CHECK(decode_payload(encode_payload(payload, key), key) == payload);
  }
}

TEST_CASE("an overwritten state chain no longer decodes to the payload") {
  CHECK(decode_payload(parse_state_row(kSelectedRow), kShift2) != "661004");
}

TEST_CASE("scrambling a constant payload balances ones and zeros") {
  const BitString payload = text_to_bits("661004");
  Rng rng(31);
  std::uint64_t ones = 0, total = 0;
  for (int i = 0; i < 10000; ++i) {
    const ScramblerKey key{ScramblerMode::xor_keystream, rng.next_u64()};
    for (const auto b : scramble(payload, key)) ones += b;
    total += payload.size();
  }
  const double fraction = static_cast<double>(ones) / total;
  CHECK(fraction > 0.48);
  CHECK(fraction < 0.52);
}

TEST_CASE("page keys differ across pages and replay deterministically") {
  const ScramblerConfig cfg{ScramblerMode::xor_keystream, 7};
  CHECK(page_key(cfg, 0, 0).seed != page_key(cfg, 0, 1).seed);
  CHECK(page_key(cfg, 1, 0).seed != page_key(cfg, 0, 1).seed);
  CHECK(page_key(cfg, 2, 3).seed == page_key(cfg, 2, 3).seed);
  const ScramblerConfig shift{ScramblerMode::shift2, 7};
  CHECK(page_key(shift, 4, 4).mode == ScramblerMode::shift2);
}
