#include "nandsan/codec.hpp"

#include <cstdio>

#include "nandsan/rng.hpp"

namespace nandsan {

namespace {

// 64-bit words consumed MSB-first.
class Keystream {
 public:
  explicit Keystream(std::uint64_t seed) : rng_(seed) {}

  std::uint8_t next() {
    if (left_ == 0) {
      word_ = rng_.next_u64();
      left_ = 64;
    }
    const std::uint8_t bit = static_cast<std::uint8_t>(word_ >> 63);
    word_ <<= 1;
    --left_;
    return bit;
  }

 private:
  Rng rng_;
  std::uint64_t word_ = 0;
  int left_ = 0;
};

constexpr std::uint64_t kPageKeyTag = 0x70616765;  // stream tag for page keys

}  // namespace

BitString bits_from_string(std::string_view s) {
  BitString out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1')
      throw ParseError("bit string may contain only 0 and 1");
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

std::string bits_to_string(const BitString& bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out.push_back(b ? '1' : '0');
  return out;
}

BitString text_to_bits(std::string_view text) {
  BitString out;
  out.reserve(text.size() * 8);
  for (unsigned char c : text) {
    if (c > 0x7f)
      throw NonAscii("payload text must be 7-bit ASCII");
    for (int i = 7; i >= 0; --i)
      out.push_back(static_cast<std::uint8_t>((c >> i) & 1));
  }
  return out;
}

std::string bits_to_text(const BitString& bits) {
  if (bits.size() % 8 != 0)
    throw BadLength("bit count must be a multiple of 8, got " +
                    std::to_string(bits.size()));
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 8) {
    unsigned value = 0;
    for (std::size_t j = 0; j < 8; ++j) value = (value << 1) | bits[i + j];
    if (value >= 0x20 && value <= 0x7e) {
      out.push_back(static_cast<char>(value));
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", value);
      out += buf;
    }
  }
  return out;
}

const char* to_string(ScramblerMode mode) {
  return mode == ScramblerMode::shift2 ? "shift2" : "xor_keystream";
}

ScramblerMode parse_scrambler_mode(std::string_view name) {
  if (name == "shift2") return ScramblerMode::shift2;
  if (name == "xor_keystream" || name == "xor")
    return ScramblerMode::xor_keystream;
  throw ParseError("unknown scrambler mode: " + std::string(name));
}

ScramblerKey page_key(const ScramblerConfig& cfg, std::uint32_t block,
                      std::uint32_t page) {
  if (cfg.mode == ScramblerMode::shift2) return {ScramblerMode::shift2, 0};
  return {ScramblerMode::xor_keystream,
          mix_seed({cfg.seed, kPageKeyTag, block, page})};
}

BitString keystream_bits(std::uint64_t seed, std::size_t n) {
  Keystream ks(seed);
  BitString out(n);
  for (auto& b : out) b = ks.next();
  return out;
}

BitString scramble(const BitString& bits, const ScramblerKey& key) {
  BitString out(bits.size());
  if (key.mode == ScramblerMode::shift2) {
    for (std::size_t i = 0; i < bits.size(); ++i)
      out[i] = (i + 2 < bits.size()) ? bits[i + 2] : 0;
  } else {
    Keystream ks(key.seed);
    for (std::size_t i = 0; i < bits.size(); ++i)
      out[i] = bits[i] ^ ks.next();
  }
  return out;
}

BitString descramble(const BitString& bits, const ScramblerKey& key) {
  if (key.mode == ScramblerMode::xor_keystream) return scramble(bits, key);
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    out[i] = (i >= 2) ? bits[i - 2] : 0;
  return out;
}

std::vector<CellState> bits_to_states(const BitString& bits) {
  if (bits.size() % kBitsPerCell != 0)
    throw BadLength("bit count must be a multiple of 3, got " +
                    std::to_string(bits.size()));
  std::vector<CellState> out;
  out.reserve(bits.size() / kBitsPerCell);
  for (std::size_t i = 0; i < bits.size(); i += kBitsPerCell)
    out.push_back(bits_to_state({bits[i], bits[i + 1], bits[i + 2]}));
  return out;
}

BitString states_to_bits(std::span<const CellState> states) {
  BitString out;
  out.reserve(states.size() * kBitsPerCell);
  for (CellState s : states) {
    const CellBits b = state_to_bits(s);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<CellState> encode_payload(std::string_view text,
                                      const ScramblerKey& key) {
  return bits_to_states(scramble(text_to_bits(text), key));
}

std::string decode_payload(std::span<const CellState> states,
                           const ScramblerKey& key) {
  return bits_to_text(descramble(states_to_bits(states), key));
}

}  // namespace nandsan
