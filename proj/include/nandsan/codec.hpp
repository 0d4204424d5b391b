#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nandsan/cell_model.hpp"
#include "nandsan/errors.hpp"

namespace nandsan {

// One element per bit, each 0 or 1.
using BitString = std::vector<std::uint8_t>;

BitString bits_from_string(std::string_view s);  // "0101..." -> bits
std::string bits_to_string(const BitString& bits);

// 7-bit ASCII text to bits, 8 bits per character, MSB first.
// Throws NonAscii for characters above 0x7f.
BitString text_to_bits(std::string_view text);

// Inverse of text_to_bits. Printable bytes come back literally; anything else
// is rendered as a \xHH escape. Throws BadLength unless |bits| % 8 == 0.
std::string bits_to_text(const BitString& bits);

enum class ScramblerMode { shift2, xor_keystream };

const char* to_string(ScramblerMode mode);
ScramblerMode parse_scrambler_mode(std::string_view name);

// Per-page scrambler key. shift2 ignores the seed.
struct ScramblerKey {
  ScramblerMode mode = ScramblerMode::xor_keystream;
  std::uint64_t seed = 0;
};

// Device-wide scrambler configuration; per-page keys derive from it.
struct ScramblerConfig {
  ScramblerMode mode = ScramblerMode::xor_keystream;
  std::uint64_t seed = 0;
};

ScramblerKey page_key(const ScramblerConfig& cfg, std::uint32_t block,
                      std::uint32_t page);

// First n keystream bits for a seed (what xor_keystream XORs against).
BitString keystream_bits(std::uint64_t seed, std::size_t n);

// Length-preserving randomization.
// shift2: left shift by 2 with zero fill (fixture mode).
// xor_keystream: XOR with the seeded keystream (involution with descramble).
BitString scramble(const BitString& bits, const ScramblerKey& key);

// Inverse path. xor_keystream inverts exactly; shift2 right-shifts with zero
// fill and is lossy unless the payload's leading 2 bits were 0.
BitString descramble(const BitString& bits, const ScramblerKey& key);

// Consecutive bit triples to states. Throws BadLength unless |bits| % 3 == 0.
std::vector<CellState> bits_to_states(const BitString& bits);

BitString states_to_bits(std::span<const CellState> states);

// text -> scramble -> states, and the inverse chain.
std::vector<CellState> encode_payload(std::string_view text,
                                      const ScramblerKey& key);
std::string decode_payload(std::span<const CellState> states,
                           const ScramblerKey& key);

}  // namespace nandsan
