#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nandsan/errors.hpp"
#include "nandsan/rng.hpp"

namespace nandsan {

// Threshold-voltage state of one triple-level cell, ordered E < P1 < ... < P7.
enum class CellState : std::uint8_t { E = 0, P1, P2, P3, P4, P5, P6, P7 };

constexpr int kNumStates = 8;
constexpr int kBitsPerCell = 3;
constexpr CellState kTopState = CellState::P7;

constexpr int ordinal(CellState s) { return static_cast<int>(s); }

CellState state_from_ordinal(int ord);
const char* to_string(CellState s);
CellState parse_state(std::string_view name);

// 3-bit cell code as (MSB, CSB, LSB).
using CellBits = std::array<std::uint8_t, 3>;

CellBits state_to_bits(CellState s);
CellState bits_to_state(const CellBits& bits);

// Same code packed as MSB<<2 | CSB<<1 | LSB.
std::uint8_t state_code_packed(CellState s);

// All states strictly above `s`, ascending. Empty for P7.
std::vector<CellState> overwritable_states(CellState s);

// Program pulse configuration in dimensionless level units. Levels only feed
// validation ordering; the step model below counts pulses per ordinal step.
struct PulseParams {
  double pgm_start = 1.0;
  double po_start = 3.0;  // overwrite start level, above pgm_start
  double step = 1.0;
  int verify_per_pulse_normal = 1;
  int verify_per_target_po = 1;
  double v_pass = 2.0;

  void validate() const;
  friend bool operator==(const PulseParams&, const PulseParams&) = default;
};

// Deletion duty pulse train: k unverified pulses, each advancing a cell one
// state with probability p_adv.
struct DdpParams {
  double p_adv = 0.5;
  int k = 1;

  void validate() const;
};

struct PulseStats {
  std::uint64_t program_pulses = 0;
  std::uint64_t verify_pulses = 0;

  PulseStats& operator+=(const PulseStats& o) {
    program_pulses += o.program_pulses;
    verify_pulses += o.verify_pulses;
    return *this;
  }
  friend bool operator==(const PulseStats&, const PulseStats&) = default;
};

enum class ProgramMode { normal, partial_overwrite };

struct ProgramResult {
  CellState state;
  PulseStats stats;
};

// Incremental-step programming with unit steps: one pulse per ordinal step.
// Normal mode verifies after every pulse; partial-overwrite mode verifies at
// the target only, never more often than normal mode would.
// Throws DownwardProgram if target < cell.
ProgramResult program_cell(CellState cell, CellState target, ProgramMode mode,
                           const PulseParams& params);

// Applies k independent duty pulses; each advances one state with probability
// p_adv, saturating at P7. No verify accounting.
CellState ddp_cell(CellState cell, const DdpParams& ddp, Rng& rng);

}  // namespace nandsan
