#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"
#include "nandsan/codec.hpp"
#include "nandsan/nand_device.hpp"

namespace nandsan {

struct MappingEntry {
  PhysicalAddress addr;
  bool privacy = false;
};

struct RegistryEntry {
  PhysicalAddress addr;
  bool privacy = false;
};

struct GcReport {
  std::vector<std::uint32_t> victims;
  std::uint64_t moved = 0;     // valid pages copied out
  std::uint64_t residual = 0;  // invalid pages left intact
};

// Logical-to-physical page mapping with out-of-place updates and an
// invalid-page registry carrying privacy flags. Garbage collection copies
// valid pages to a free block and unmaps the victims without erasing them,
// which is exactly what leaves stale payload copies behind.
class Ftl {
 public:
  Ftl(ScramblerConfig scrambler, Geometry geometry);

  const ScramblerConfig& scrambler() const { return scrambler_; }

  // Encodes the payload with the target page's key and programs it to the
  // lowest free page. Payload may be shorter than the page; it is zero-padded
  // to page capacity. Throws DeviceFull, BadLength, Error (lpn mapped).
  PhysicalAddress write_logical(Device& dev, std::uint32_t lpn,
                                const BitString& payload, bool privacy);

  // Out-of-place update: fresh page gets the new data, the old page keeps its
  // bits, is unmapped, and enters the registry with the inherited privacy
  // flag. Throws Unmapped, DeviceFull.
  PhysicalAddress update_logical(Device& dev, std::uint32_t lpn,
                                 const BitString& payload);

  BitString read_logical(const Device& dev, std::uint32_t lpn) const;

  // Copies every mapped victim page into free blocks, remaps, and unmaps the
  // victims entirely. Performs no erase. Throws InsufficientFree.
  GcReport garbage_collect(Device& dev, std::vector<std::uint32_t> victims);

  // Registry entries flagged privacy, in registry order.
  std::vector<PhysicalAddress> invalid_privacy_pages() const;

  // Erases fully-invalidated blocks, but only once the free pool has shrunk
  // below the threshold; models a deferral policy under which stale data can
  // persist indefinitely. Returns the erased blocks.
  std::vector<std::uint32_t> background_erase(Device& dev,
                                              std::size_t policy_threshold = 1);

  // Blocks ranked by invalid-page count, most first; workload convenience.
  std::vector<std::uint32_t> greedy_victims(std::size_t count) const;

  const std::map<std::uint32_t, MappingEntry>& mapping() const { return map_; }
  const std::vector<RegistryEntry>& registry() const { return registry_; }
  std::vector<std::uint32_t> free_blocks() const;
  std::uint32_t written_pages(std::uint32_t block) const;

  // Drops the privacy flag of a registry entry once its page is sanitized.
  // Returns false if the address is not in the registry.
  bool mark_sanitized(PhysicalAddress addr);

  nlohmann::json to_json() const;
  static Ftl from_json(const nlohmann::json& j, ScramblerConfig scrambler,
                       Geometry geometry);

 private:
  PhysicalAddress alloc_page();
  BitString pad_to_page(const BitString& payload) const;
  void program_encoded(Device& dev, PhysicalAddress addr,
                       const BitString& page_bits);

  ScramblerConfig scrambler_;
  Geometry geometry_;
  std::map<std::uint32_t, MappingEntry> map_;
  std::vector<RegistryEntry> registry_;
  std::vector<std::uint32_t> block_fill_;  // written pages form a prefix
};

// Combined persistence document: device plus mapping state plus the op
// counter the CLI uses to derive per-command randomness.
nlohmann::json dump_state(const Device& dev, const Ftl& ftl,
                          std::uint64_t op_counter);

}  // namespace nandsan
