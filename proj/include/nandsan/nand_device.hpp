#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "nandsan/cell_model.hpp"
#include "nandsan/errors.hpp"

namespace nandsan {

struct Geometry {
  std::uint32_t num_blocks = 8;
  std::uint32_t pages_per_block = 16;
  std::uint32_t cells_per_page = 48;

  void validate() const;
  std::uint64_t total_pages() const {
    return std::uint64_t{num_blocks} * pages_per_block;
  }
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct PhysicalAddress {
  std::uint32_t block = 0;
  std::uint32_t page = 0;

  friend auto operator<=>(const PhysicalAddress&,
                          const PhysicalAddress&) = default;
};

// Abstracted error corrector: t correctable bit flips per page codeword.
struct EccParams {
  int t = 4;
  void validate() const;
};

enum class ScanFilter { all, mapped, unmapped };

struct ScannedPage {
  PhysicalAddress addr;
  std::vector<CellState> states;
  bool valid = false;
};

struct WearRow {
  std::uint64_t pgm_count = 0;
  std::uint64_t erase_count = 0;
  double degradation = 0.0;
};

// Page-programmed, block-erased cell array with wear counters. Reads are
// noise-free; a page's validity flag is owned by the mapping layer.
class Device {
 public:
  Device(Geometry geometry, std::uint64_t seed, PulseParams pulse = {});

  const Geometry& geometry() const { return geometry_; }
  std::uint64_t seed() const { return seed_; }
  const PulseParams& pulse_params() const { return pulse_; }

  // Programs a whole page. Every target must be >= the stored state; on a
  // downward target nothing changes and DownwardProgram is thrown. Bumps the
  // block's pgm_count once per call, pulse count aside.
  PulseStats program_page(PhysicalAddress addr,
                          std::span<const CellState> states, ProgramMode mode);

  std::vector<CellState> read_page(PhysicalAddress addr) const;
  std::span<const CellState> page_cells(PhysicalAddress addr) const;

  void erase_block(std::uint32_t block);

  // Deterministic block-then-page order.
  std::vector<ScannedPage> scan_pages(ScanFilter filter) const;

  bool page_valid(PhysicalAddress addr) const;
  void set_page_valid(PhysicalAddress addr, bool valid);

  // Unverified monotone state shift (duty-pulse path): no program or verify
  // accounting. Throws DownwardProgram if any cell would move down.
  void disturb_page(PhysicalAddress addr, std::span<const CellState> states);

  std::uint64_t pgm_count(std::uint32_t block) const;
  std::uint64_t erase_count(std::uint32_t block) const;
  std::uint64_t total_pgm_count() const;
  std::uint64_t total_erase_count() const;

  // degradation = a * erase_count + b * pgm_count per block
  std::vector<WearRow> wear_report(double a = 1000.0, double b = 1.0) const;

  nlohmann::json to_json() const;
  static Device from_json(const nlohmann::json& j, PulseParams pulse = {});

  friend bool operator==(const Device&, const Device&) = default;

 private:
  std::size_t page_index(PhysicalAddress addr) const;
  std::size_t cell_index(PhysicalAddress addr) const;
  void check_block(std::uint32_t block) const;
  void check_addr(PhysicalAddress addr) const;

  Geometry geometry_;
  std::uint64_t seed_ = 0;
  PulseParams pulse_;
  std::vector<CellState> cells_;
  std::vector<std::uint8_t> valid_;
  std::vector<std::uint64_t> pgm_count_;
  std::vector<std::uint64_t> erase_count_;
};

// True iff the bit-level Hamming distance between the two pages is within the
// corrector's capability. Throws BadLength on size mismatch.
bool ecc_correctable(std::span<const CellState> reference,
                     std::span<const CellState> observed, EccParams ecc);

}  // namespace nandsan
