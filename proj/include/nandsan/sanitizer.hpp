#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "nandsan/cost_model.hpp"
#include "nandsan/ftl.hpp"
#include "nandsan/nand_device.hpp"
#include "nandsan/rng.hpp"

namespace nandsan {

// A destruction method plus its parameters.
struct SanitizeScheme {
  enum class Kind { po_random, po_fold, slc_fold, ddp };

  Kind kind = Kind::po_random;
  CellState ref = CellState::P5;  // po_fold / slc_fold reference state
  DdpParams ddp{};

  static SanitizeScheme make_po_random();
  static SanitizeScheme make_po_fold(CellState ref);
  static SanitizeScheme make_slc_fold(CellState ref);
  static SanitizeScheme make_ddp(DdpParams params);

  void validate() const;
  nlohmann::json to_json() const;
};

const char* to_string(SanitizeScheme::Kind kind);

enum class PoMode { random, fold };

// Pure target builders, exposed so tests can drive them with fixed draws.
// po_random: each cell below P7 moves to a uniformly drawn higher state.
// po_fold: each cell below `ref` moves to `ref`; higher cells keep state.
std::vector<CellState> po_random_targets(std::span<const CellState> states,
                                         Rng& rng);
std::vector<CellState> po_fold_targets(std::span<const CellState> states,
                                       CellState ref);
// slc_fold: bit 0 means program, raising the cell to max(current, ref).
std::vector<CellState> slc_fold_targets(std::span<const CellState> states,
                                        const BitString& slc_bits,
                                        CellState ref);

// Page-level scheme applications. Pages already at their targets are left
// untouched and cost neither pulses nor a program count.
PulseStats partial_overwrite_page(Device& dev, PhysicalAddress addr,
                                  PoMode mode, CellState ref, Rng& rng);
PulseStats slc_fold_page(Device& dev, PhysicalAddress addr, CellState ref,
                         Rng& rng);
void ddp_page(Device& dev, PhysicalAddress addr, const DdpParams& ddp,
              Rng& rng);

// Smallest duty-pulse count k for which the Monte Carlo estimate of
// P(page stays within ECC reach) drops to target_fail_prob, over `trials`
// uniformly programmed pages. Throws Unreachable when no k can work.
int calibrate_ddp(std::uint32_t cells_per_page, int t, double p_adv,
                  double target_fail_prob, std::uint32_t trials = 40000,
                  std::uint64_t seed = 0x6464705f63616cULL);

struct PageResult {
  PhysicalAddress addr;
  PulseStats pulses;
  bool programmed = false;  // scheme issued at least one pulse here
  bool verified = false;    // content no longer matches the pre-destroy page
};

struct DestructionReport {
  SanitizeScheme scheme;
  std::vector<PageResult> pages;
  PulseStats total_pulses;
  std::uint64_t pgm_ops = 0;
  std::uint64_t erase_ops = 0;
  double model_time = 0.0;

  bool all_verified() const;
  nlohmann::json to_json() const;
};

// Destroy attempt left recoverable content behind; the report names the pages.
struct VerificationFailed : Error {
  explicit VerificationFailed(DestructionReport r);
  DestructionReport report;
};

// Host destroy request handler: resolves targets (every privacy-flagged
// registry page when `targets` is empty), applies the scheme page by page,
// verifies each page, and clears registry privacy flags for verified pages.
// Throws VerificationFailed when any page still matches its old content.
DestructionReport destroy(
    Ftl& ftl, Device& dev, const SanitizeScheme& scheme,
    const std::optional<std::vector<PhysicalAddress>>& targets, Rng& rng,
    const CostParams& costs = {});

struct ScanHit {
  PhysicalAddress addr;
  bool mapped = false;
  bool raw_hit = false;      // payload visible in the stored cell codes
  bool decoded_hit = false;  // payload visible after per-page descrambling
};

struct VerifyResult {
  bool found = false;
  std::vector<ScanHit> locations;

  std::size_t mapped_hits() const;
  std::size_t unmapped_hits() const;
  nlohmann::json to_json() const;
};

// Forensic search over every page, mapped and unmapped: looks for the payload
// bits at cell-aligned offsets in the raw codes and in the descrambled page.
VerifyResult verify_destruction(const Ftl& ftl, const Device& dev,
                                const BitString& payload_bits,
                                const ScramblerConfig& scrambler);

}  // namespace nandsan
