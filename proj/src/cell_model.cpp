#include "nandsan/cell_model.hpp"

#include <algorithm>

namespace nandsan {

namespace {

// Gray-coded ladder: consecutive states differ in exactly one bit.
constexpr std::array<std::uint8_t, kNumStates> kStateCode = {
    0b111,  // E
    0b011,  // P1
    0b001,  // P2
    0b000,  // P3
    0b010,  // P4
    0b110,  // P5
    0b100,  // P6
    0b101,  // P7
};

constexpr std::array<std::uint8_t, kNumStates> make_inverse() {
  std::array<std::uint8_t, kNumStates> inv{};
  for (std::uint8_t ord = 0; ord < kNumStates; ++ord) inv[kStateCode[ord]] = ord;
  return inv;
}
constexpr auto kCodeToOrdinal = make_inverse();

constexpr const char* kStateName[kNumStates] = {"E",  "P1", "P2", "P3",
                                                "P4", "P5", "P6", "P7"};

}  // namespace

CellState state_from_ordinal(int ord) {
  if (ord < 0 || ord >= kNumStates)
    throw OutOfBounds("cell ordinal out of range: " + std::to_string(ord));
  return static_cast<CellState>(ord);
}

const char* to_string(CellState s) { return kStateName[ordinal(s)]; }

CellState parse_state(std::string_view name) {
  for (int i = 0; i < kNumStates; ++i)
    if (name == kStateName[i]) return static_cast<CellState>(i);
  throw ParseError("unknown cell state: " + std::string(name));
}

CellBits state_to_bits(CellState s) {
  const std::uint8_t c = kStateCode[ordinal(s)];
  return {static_cast<std::uint8_t>((c >> 2) & 1),
          static_cast<std::uint8_t>((c >> 1) & 1),
          static_cast<std::uint8_t>(c & 1)};
}

CellState bits_to_state(const CellBits& bits) {
  const std::uint8_t packed = static_cast<std::uint8_t>(
      ((bits[0] & 1) << 2) | ((bits[1] & 1) << 1) | (bits[2] & 1));
  return static_cast<CellState>(kCodeToOrdinal[packed]);
}

std::uint8_t state_code_packed(CellState s) { return kStateCode[ordinal(s)]; }

std::vector<CellState> overwritable_states(CellState s) {
  std::vector<CellState> out;
  for (int ord = ordinal(s) + 1; ord < kNumStates; ++ord)
    out.push_back(static_cast<CellState>(ord));
  return out;
}

void PulseParams::validate() const {
  if (pgm_start <= 0 || po_start <= 0 || step <= 0 || v_pass <= 0 ||
      verify_per_pulse_normal <= 0 || verify_per_target_po <= 0)
    throw ConfigError("pulse parameters must be positive");
  if (po_start <= pgm_start)
    throw ConfigError("po_start must exceed pgm_start");
  if (v_pass >= po_start)
    throw ConfigError("v_pass must stay below po_start");
}

void DdpParams::validate() const {
  if (!(p_adv > 0.0 && p_adv <= 1.0))
    throw ConfigError("ddp p_adv must be in (0, 1]");
  if (k < 1) throw ConfigError("ddp pulse count must be >= 1");
}

ProgramResult program_cell(CellState cell, CellState target, ProgramMode mode,
                           const PulseParams& params) {
  if (ordinal(target) < ordinal(cell))
    throw DownwardProgram(std::string("cannot program ") + to_string(cell) +
                          " down to " + to_string(target));
  PulseStats stats;
  stats.program_pulses =
      static_cast<std::uint64_t>(ordinal(target) - ordinal(cell));
  if (stats.program_pulses > 0) {
    const std::uint64_t normal_verifies =
        stats.program_pulses *
        static_cast<std::uint64_t>(params.verify_per_pulse_normal);
    stats.verify_pulses =
        mode == ProgramMode::normal
            ? normal_verifies
            : std::min<std::uint64_t>(
                  static_cast<std::uint64_t>(params.verify_per_target_po),
                  normal_verifies);
  }
  return {target, stats};
}

CellState ddp_cell(CellState cell, const DdpParams& ddp, Rng& rng) {
  ddp.validate();
  // Draw all k trials so the displacement is exactly Binomial(k, p_adv)
  // truncated at the top state.
  int advances = 0;
  for (int i = 0; i < ddp.k; ++i)
    if (rng.bernoulli(ddp.p_adv)) ++advances;
  return static_cast<CellState>(
      std::min(ordinal(cell) + advances, ordinal(kTopState)));
}

}  // namespace nandsan
