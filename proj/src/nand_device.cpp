#include "nandsan/nand_device.hpp"

#include <algorithm>
#include <bit>

namespace nandsan {

void Geometry::validate() const {
  if (num_blocks < 1 || pages_per_block < 1 || cells_per_page < 1)
    throw ConfigError("geometry dimensions must all be >= 1");
}

void EccParams::validate() const {
  if (t < 0) throw ConfigError("ecc capability t must be >= 0");
}

Device::Device(Geometry geometry, std::uint64_t seed, PulseParams pulse)
    : geometry_(geometry), seed_(seed), pulse_(pulse) {
  geometry_.validate();
  pulse_.validate();
  cells_.assign(geometry_.total_pages() * geometry_.cells_per_page,
                CellState::E);
  valid_.assign(geometry_.total_pages(), 0);
  pgm_count_.assign(geometry_.num_blocks, 0);
  erase_count_.assign(geometry_.num_blocks, 0);
}

std::size_t Device::page_index(PhysicalAddress addr) const {
  return std::size_t{addr.block} * geometry_.pages_per_block + addr.page;
}

std::size_t Device::cell_index(PhysicalAddress addr) const {
  return page_index(addr) * geometry_.cells_per_page;
}

void Device::check_block(std::uint32_t block) const {
  if (block >= geometry_.num_blocks)
    throw OutOfBounds("block " + std::to_string(block) + " out of range");
}

void Device::check_addr(PhysicalAddress addr) const {
  check_block(addr.block);
  if (addr.page >= geometry_.pages_per_block)
    throw OutOfBounds("page " + std::to_string(addr.page) + " out of range");
}

PulseStats Device::program_page(PhysicalAddress addr,
                                std::span<const CellState> states,
                                ProgramMode mode) {
  check_addr(addr);
  if (states.size() != geometry_.cells_per_page)
    throw BadLength("page program needs " +
                    std::to_string(geometry_.cells_per_page) + " states, got " +
                    std::to_string(states.size()));
  const std::size_t base = cell_index(addr);
  // Validate the whole page first so a rejected program changes no cell.
  for (std::size_t i = 0; i < states.size(); ++i)
    if (ordinal(states[i]) < ordinal(cells_[base + i]))
      throw DownwardProgram("cell " + std::to_string(i) + " cannot move " +
                            std::string(to_string(cells_[base + i])) + " -> " +
                            to_string(states[i]));
  PulseStats total;
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto [state, stats] = program_cell(cells_[base + i], states[i], mode, pulse_);
    cells_[base + i] = state;
    total += stats;
  }
  pgm_count_[addr.block] += 1;
  return total;
}

std::vector<CellState> Device::read_page(PhysicalAddress addr) const {
  const auto view = page_cells(addr);
  return {view.begin(), view.end()};
}

std::span<const CellState> Device::page_cells(PhysicalAddress addr) const {
  check_addr(addr);
  return {cells_.data() + cell_index(addr), geometry_.cells_per_page};
}

void Device::erase_block(std::uint32_t block) {
  check_block(block);
  const std::size_t first =
      cell_index({block, 0});
  const std::size_t count =
      std::size_t{geometry_.pages_per_block} * geometry_.cells_per_page;
  std::fill_n(cells_.begin() + static_cast<std::ptrdiff_t>(first), count,
              CellState::E);
  const std::size_t page0 = page_index({block, 0});
  std::fill_n(valid_.begin() + static_cast<std::ptrdiff_t>(page0),
              geometry_.pages_per_block, std::uint8_t{0});
  erase_count_[block] += 1;
}

std::vector<ScannedPage> Device::scan_pages(ScanFilter filter) const {
  std::vector<ScannedPage> out;
  for (std::uint32_t b = 0; b < geometry_.num_blocks; ++b) {
    for (std::uint32_t p = 0; p < geometry_.pages_per_block; ++p) {
      const PhysicalAddress addr{b, p};
      const bool valid = valid_[page_index(addr)] != 0;
      if ((filter == ScanFilter::mapped && !valid) ||
          (filter == ScanFilter::unmapped && valid))
        continue;
      out.push_back({addr, read_page(addr), valid});
    }
  }
  return out;
}

bool Device::page_valid(PhysicalAddress addr) const {
  check_addr(addr);
  return valid_[page_index(addr)] != 0;
}

void Device::set_page_valid(PhysicalAddress addr, bool valid) {
  check_addr(addr);
  valid_[page_index(addr)] = valid ? 1 : 0;
}

void Device::disturb_page(PhysicalAddress addr,
                          std::span<const CellState> states) {
  check_addr(addr);
  if (states.size() != geometry_.cells_per_page)
    throw BadLength("disturb needs a full page of states");
  const std::size_t base = cell_index(addr);
  for (std::size_t i = 0; i < states.size(); ++i)
    if (ordinal(states[i]) < ordinal(cells_[base + i]))
      throw DownwardProgram("disturb would lower cell " + std::to_string(i));
  std::copy(states.begin(), states.end(),
            cells_.begin() + static_cast<std::ptrdiff_t>(base));
}

std::uint64_t Device::pgm_count(std::uint32_t block) const {
  check_block(block);
  return pgm_count_[block];
}

std::uint64_t Device::erase_count(std::uint32_t block) const {
  check_block(block);
  return erase_count_[block];
}

std::uint64_t Device::total_pgm_count() const {
  std::uint64_t sum = 0;
  for (auto c : pgm_count_) sum += c;
  return sum;
}

std::uint64_t Device::total_erase_count() const {
  std::uint64_t sum = 0;
  for (auto c : erase_count_) sum += c;
  return sum;
}

std::vector<WearRow> Device::wear_report(double a, double b) const {
  std::vector<WearRow> rows(geometry_.num_blocks);
  for (std::uint32_t blk = 0; blk < geometry_.num_blocks; ++blk) {
    rows[blk].pgm_count = pgm_count_[blk];
    rows[blk].erase_count = erase_count_[blk];
    rows[blk].degradation = a * static_cast<double>(erase_count_[blk]) +
                            b * static_cast<double>(pgm_count_[blk]);
  }
  return rows;
}

nlohmann::json Device::to_json() const {
  nlohmann::json blocks = nlohmann::json::array();
  for (std::uint32_t b = 0; b < geometry_.num_blocks; ++b) {
    nlohmann::json pages = nlohmann::json::array();
    for (std::uint32_t p = 0; p < geometry_.pages_per_block; ++p) {
      const PhysicalAddress addr{b, p};
      nlohmann::json states = nlohmann::json::array();
      for (CellState s : page_cells(addr)) states.push_back(to_string(s));
      pages.push_back({{"states", std::move(states)},
                       {"valid", valid_[page_index(addr)] != 0}});
    }
    blocks.push_back({{"erase_count", erase_count_[b]},
                      {"pgm_count", pgm_count_[b]},
                      {"pages", std::move(pages)}});
  }
  return {{"geometry",
           {{"num_blocks", geometry_.num_blocks},
            {"pages_per_block", geometry_.pages_per_block},
            {"cells_per_page", geometry_.cells_per_page}}},
          {"seed", seed_},
          {"blocks", std::move(blocks)}};
}

Device Device::from_json(const nlohmann::json& j, PulseParams pulse) {
  Geometry g{j.at("geometry").at("num_blocks").get<std::uint32_t>(),
             j.at("geometry").at("pages_per_block").get<std::uint32_t>(),
             j.at("geometry").at("cells_per_page").get<std::uint32_t>()};
  Device dev(g, j.at("seed").get<std::uint64_t>(), pulse);
  const auto& blocks = j.at("blocks");
  if (blocks.size() != g.num_blocks)
    throw ParseError("device dump block count does not match geometry");
  for (std::uint32_t b = 0; b < g.num_blocks; ++b) {
    const auto& blk = blocks.at(b);
    dev.erase_count_[b] = blk.at("erase_count").get<std::uint64_t>();
    dev.pgm_count_[b] = blk.at("pgm_count").get<std::uint64_t>();
    const auto& pages = blk.at("pages");
    if (pages.size() != g.pages_per_block)
      throw ParseError("device dump page count does not match geometry");
    for (std::uint32_t p = 0; p < g.pages_per_block; ++p) {
      const auto& pg = pages.at(p);
      const auto& states = pg.at("states");
      if (states.size() != g.cells_per_page)
        throw ParseError("device dump cell count does not match geometry");
      const PhysicalAddress addr{b, p};
      const std::size_t base = dev.cell_index(addr);
      for (std::uint32_t c = 0; c < g.cells_per_page; ++c)
        dev.cells_[base + c] =
            parse_state(states.at(c).get_ref<const std::string&>());
      dev.valid_[dev.page_index(addr)] = pg.at("valid").get<bool>() ? 1 : 0;
    }
  }
  return dev;
}

bool ecc_correctable(std::span<const CellState> reference,
                     std::span<const CellState> observed, EccParams ecc) {
  ecc.validate();
  if (reference.size() != observed.size())
    throw BadLength("ecc comparison needs equal page lengths");
  int flips = 0;
  for (std::size_t i = 0; i < reference.size(); ++i)
    flips += std::popcount(static_cast<unsigned>(
        state_code_packed(reference[i]) ^ state_code_packed(observed[i])));
  return flips <= ecc.t;
}

}  // namespace nandsan
