#include "nandsan/ftl.hpp"

#include <algorithm>
#include <set>

namespace nandsan {

Ftl::Ftl(ScramblerConfig scrambler, Geometry geometry)
    : scrambler_(scrambler), geometry_(geometry) {
  geometry_.validate();
  block_fill_.assign(geometry_.num_blocks, 0);
}

BitString Ftl::pad_to_page(const BitString& payload) const {
  const std::size_t capacity =
      std::size_t{geometry_.cells_per_page} * kBitsPerCell;
  if (payload.size() > capacity)
    throw BadLength("payload of " + std::to_string(payload.size()) +
                    " bits exceeds page capacity of " +
                    std::to_string(capacity));
  BitString padded = payload;
  padded.resize(capacity, 0);
  return padded;
}

PhysicalAddress Ftl::alloc_page() {
  for (std::uint32_t b = 0; b < geometry_.num_blocks; ++b)
    if (block_fill_[b] < geometry_.pages_per_block) return {b, block_fill_[b]};
  throw DeviceFull("no free page available");
}

void Ftl::program_encoded(Device& dev, PhysicalAddress addr,
                          const BitString& page_bits) {
  const ScramblerKey key = page_key(scrambler_, addr.block, addr.page);
  dev.program_page(addr, bits_to_states(scramble(page_bits, key)),
                   ProgramMode::normal);
  dev.set_page_valid(addr, true);
  block_fill_[addr.block] += 1;
}

PhysicalAddress Ftl::write_logical(Device& dev, std::uint32_t lpn,
                                   const BitString& payload, bool privacy) {
  if (map_.contains(lpn))
    throw Error("lpn " + std::to_string(lpn) +
                " is already mapped; use update");
  const BitString page_bits = pad_to_page(payload);
  const PhysicalAddress addr = alloc_page();
  program_encoded(dev, addr, page_bits);
  map_[lpn] = {addr, privacy};
  return addr;
}

PhysicalAddress Ftl::update_logical(Device& dev, std::uint32_t lpn,
                                    const BitString& payload) {
  const auto it = map_.find(lpn);
  if (it == map_.end())
    throw Unmapped("lpn " + std::to_string(lpn) + " is not mapped");
  const BitString page_bits = pad_to_page(payload);
  const PhysicalAddress fresh = alloc_page();
  program_encoded(dev, fresh, page_bits);
  const PhysicalAddress old = it->second.addr;
  dev.set_page_valid(old, false);
  registry_.push_back({old, it->second.privacy});
  it->second.addr = fresh;
  return fresh;
}

BitString Ftl::read_logical(const Device& dev, std::uint32_t lpn) const {
  const auto it = map_.find(lpn);
  if (it == map_.end())
    throw Unmapped("lpn " + std::to_string(lpn) + " is not mapped");
  const PhysicalAddress addr = it->second.addr;
  const ScramblerKey key = page_key(scrambler_, addr.block, addr.page);
  return descramble(states_to_bits(dev.page_cells(addr)), key);
}

GcReport Ftl::garbage_collect(Device& dev,
                              std::vector<std::uint32_t> victims) {
  std::sort(victims.begin(), victims.end());
  victims.erase(std::unique(victims.begin(), victims.end()), victims.end());
  for (auto b : victims)
    if (b >= geometry_.num_blocks)
      throw OutOfBounds("victim block " + std::to_string(b) + " out of range");

  const auto is_victim = [&](std::uint32_t b) {
    return std::binary_search(victims.begin(), victims.end(), b);
  };

  // Valid pages to move, in physical address order.
  std::vector<std::pair<std::uint32_t, PhysicalAddress>> moves;
  for (const auto& [lpn, entry] : map_)
    if (is_victim(entry.addr.block)) moves.emplace_back(lpn, entry.addr);
  std::sort(moves.begin(), moves.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });

  std::uint64_t residual = 0;
  for (const auto& entry : registry_)
    if (is_victim(entry.addr.block)) ++residual;

  // Copies go to blocks that are free right now, filled lowest-first.
  std::vector<std::uint32_t> target_pool;
  for (std::uint32_t b = 0; b < geometry_.num_blocks; ++b)
    if (!is_victim(b) && block_fill_[b] == 0) target_pool.push_back(b);
  if (moves.size() >
      target_pool.size() * std::uint64_t{geometry_.pages_per_block})
    throw InsufficientFree(
        "need " + std::to_string(moves.size()) +
        " free pages for valid victim data, have " +
        std::to_string(target_pool.size() *
                       std::uint64_t{geometry_.pages_per_block}));

  std::size_t pool_index = 0;
  for (const auto& [lpn, old] : moves) {
    const ScramblerKey old_key = page_key(scrambler_, old.block, old.page);
    const BitString payload =
        descramble(states_to_bits(dev.page_cells(old)), old_key);
    const std::uint32_t tb = target_pool[pool_index];
    const PhysicalAddress target{tb, block_fill_[tb]};
    program_encoded(dev, target, payload);
    if (block_fill_[tb] == geometry_.pages_per_block) ++pool_index;
    dev.set_page_valid(old, false);
    registry_.push_back({old, map_.at(lpn).privacy});
    map_.at(lpn).addr = target;
  }

  return {victims, moves.size(), residual};
}

std::vector<PhysicalAddress> Ftl::invalid_privacy_pages() const {
  std::vector<PhysicalAddress> out;
  for (const auto& entry : registry_)
    if (entry.privacy) out.push_back(entry.addr);
  return out;
}

std::vector<std::uint32_t> Ftl::background_erase(Device& dev,
                                                 std::size_t policy_threshold) {
  if (free_blocks().size() >= policy_threshold) return {};
  std::vector<std::uint32_t> erased;
  std::vector<bool> has_valid(geometry_.num_blocks, false);
  for (const auto& [lpn, entry] : map_) has_valid[entry.addr.block] = true;
  for (std::uint32_t b = 0; b < geometry_.num_blocks; ++b) {
    if (block_fill_[b] == 0 || has_valid[b]) continue;
    dev.erase_block(b);
    block_fill_[b] = 0;
    std::erase_if(registry_,
                  [&](const RegistryEntry& e) { return e.addr.block == b; });
    erased.push_back(b);
  }
  return erased;
}

std::vector<std::uint32_t> Ftl::greedy_victims(std::size_t count) const {
  std::vector<std::uint64_t> invalid(geometry_.num_blocks, 0);
  for (const auto& entry : registry_) invalid[entry.addr.block] += 1;
  std::vector<std::uint32_t> blocks;
  for (std::uint32_t b = 0; b < geometry_.num_blocks; ++b)
    if (invalid[b] > 0) blocks.push_back(b);
  std::stable_sort(blocks.begin(), blocks.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return invalid[a] > invalid[b];
                   });
  if (blocks.size() > count) blocks.resize(count);
  return blocks;
}

std::vector<std::uint32_t> Ftl::free_blocks() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t b = 0; b < geometry_.num_blocks; ++b)
    if (block_fill_[b] == 0) out.push_back(b);
  return out;
}

std::uint32_t Ftl::written_pages(std::uint32_t block) const {
  if (block >= geometry_.num_blocks) throw OutOfBounds("block out of range");
  return block_fill_[block];
}

bool Ftl::mark_sanitized(PhysicalAddress addr) {
  for (auto& entry : registry_) {
    if (entry.addr == addr) {
      entry.privacy = false;
      return true;
    }
  }
  return false;
}

nlohmann::json Ftl::to_json() const {
  nlohmann::json map = nlohmann::json::object();
  for (const auto& [lpn, entry] : map_)
    map[std::to_string(lpn)] = {{"block", entry.addr.block},
                                {"page", entry.addr.page},
                                {"privacy", entry.privacy}};
  nlohmann::json registry = nlohmann::json::array();
  for (const auto& entry : registry_)
    registry.push_back({{"block", entry.addr.block},
                        {"page", entry.addr.page},
                        {"privacy", entry.privacy}});
  return {{"map", std::move(map)},
          {"registry", std::move(registry)},
          {"free_pool", free_blocks()}};
}

Ftl Ftl::from_json(const nlohmann::json& j, ScramblerConfig scrambler,
                   Geometry geometry) {
  Ftl ftl(scrambler, geometry);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  const auto checked_addr = [&](const nlohmann::json& entry) {
    const PhysicalAddress addr{entry.at("block").get<std::uint32_t>(),
                               entry.at("page").get<std::uint32_t>()};
    if (addr.block >= geometry.num_blocks ||
        addr.page >= geometry.pages_per_block)
      throw ParseError("ftl dump references page " +
                       std::to_string(addr.block) + ":" +
                       std::to_string(addr.page) + " outside the geometry");
    if (!seen.insert({addr.block, addr.page}).second)
      throw ParseError("ftl dump lists page " + std::to_string(addr.block) +
                       ":" + std::to_string(addr.page) + " twice");
    return addr;
  };
  for (const auto& [lpn_str, entry] : j.at("map").items()) {
    const auto lpn = static_cast<std::uint32_t>(std::stoul(lpn_str));
    ftl.map_[lpn] = {checked_addr(entry), entry.at("privacy").get<bool>()};
  }
  for (const auto& entry : j.at("registry"))
    ftl.registry_.push_back(
        {checked_addr(entry), entry.at("privacy").get<bool>()});
  // Written pages always form a prefix of each block, so fill levels are
  // recoverable by counting.
  for (const auto& [lpn, entry] : ftl.map_)
    ftl.block_fill_[entry.addr.block] += 1;
  for (const auto& entry : ftl.registry_)
    ftl.block_fill_[entry.addr.block] += 1;
  const auto stated_pool = j.at("free_pool").get<std::vector<std::uint32_t>>();
  if (stated_pool != ftl.free_blocks())
    throw ParseError("free_pool in dump does not match mapping state");
  return ftl;
}

nlohmann::json dump_state(const Device& dev, const Ftl& ftl,
                          std::uint64_t op_counter) {
  nlohmann::json doc = dev.to_json();
  doc["version"] = 1;
  doc["op_counter"] = op_counter;
  doc["ftl"] = ftl.to_json();
  return doc;
}

}  // namespace nandsan
