#include "nandsan/sanitizer.hpp"

#include <algorithm>
#include <bit>
#include <set>

namespace nandsan {

SanitizeScheme SanitizeScheme::make_po_random() {
  return {Kind::po_random, CellState::P5, {}};
}

SanitizeScheme SanitizeScheme::make_po_fold(CellState ref) {
  return {Kind::po_fold, ref, {}};
}

SanitizeScheme SanitizeScheme::make_slc_fold(CellState ref) {
  return {Kind::slc_fold, ref, {}};
}

SanitizeScheme SanitizeScheme::make_ddp(DdpParams params) {
  return {Kind::ddp, CellState::P5, params};
}

void SanitizeScheme::validate() const {
  switch (kind) {
    case Kind::po_random:
      return;
    case Kind::po_fold:
    case Kind::slc_fold:
      if (ref == CellState::E)
        throw ConfigError("fold reference must be a programmed state");
      return;
    case Kind::ddp:
      ddp.validate();
      return;
  }
  throw UnknownScheme("unknown sanitize scheme");
}

const char* to_string(SanitizeScheme::Kind kind) {
  switch (kind) {
    case SanitizeScheme::Kind::po_random: return "po_random";
    case SanitizeScheme::Kind::po_fold: return "po_fold";
    case SanitizeScheme::Kind::slc_fold: return "slc_fold";
    case SanitizeScheme::Kind::ddp: return "ddp";
  }
  return "?";
}

nlohmann::json SanitizeScheme::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)}};
  if (kind == Kind::po_fold || kind == Kind::slc_fold)
    j["ref"] = to_string(ref);
  if (kind == Kind::ddp) j["ddp"] = {{"p_adv", ddp.p_adv}, {"k", ddp.k}};
  return j;
}

std::vector<CellState> po_random_targets(std::span<const CellState> states,
                                         Rng& rng) {
  std::vector<CellState> targets(states.begin(), states.end());
  for (auto& s : targets) {
    if (s == kTopState) continue;  // topmost state: no action taken
    const int span = ordinal(kTopState) - ordinal(s);
    s = state_from_ordinal(ordinal(s) + 1 +
                           static_cast<int>(rng.below(span)));
  }
  return targets;
}

std::vector<CellState> po_fold_targets(std::span<const CellState> states,
                                       CellState ref) {
  std::vector<CellState> targets(states.begin(), states.end());
  for (auto& s : targets)
    if (ordinal(s) < ordinal(ref)) s = ref;
  return targets;
}

std::vector<CellState> slc_fold_targets(std::span<const CellState> states,
                                        const BitString& slc_bits,
                                        CellState ref) {
  if (slc_bits.size() != states.size())
    throw BadLength("slc fold needs one bit per cell");
  std::vector<CellState> targets(states.begin(), states.end());
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (slc_bits[i] == 0 && ordinal(targets[i]) < ordinal(ref))
      targets[i] = ref;
  return targets;
}

namespace {

// Program only when some cell actually moves; untouched pages must not be
// charged a program operation.
PulseStats program_if_changed(Device& dev, PhysicalAddress addr,
                              std::span<const CellState> current,
                              std::span<const CellState> targets) {
  if (std::equal(current.begin(), current.end(), targets.begin(),
                 targets.end()))
    return {};
  return dev.program_page(addr, targets, ProgramMode::partial_overwrite);
}

}  // namespace

PulseStats partial_overwrite_page(Device& dev, PhysicalAddress addr,
                                  PoMode mode, CellState ref, Rng& rng) {
  const auto current = dev.read_page(addr);
  const auto targets = mode == PoMode::random
                           ? po_random_targets(current, rng)
                           : po_fold_targets(current, ref);
  return program_if_changed(dev, addr, current, targets);
}

PulseStats slc_fold_page(Device& dev, PhysicalAddress addr, CellState ref,
                         Rng& rng) {
  const auto current = dev.read_page(addr);
  const bool can_program =
      std::any_of(current.begin(), current.end(), [&](CellState s) {
        return ordinal(s) < ordinal(ref);
      });
  if (!can_program) return {};  // every cell already sits at or above ref
  BitString slc_bits(current.size());
  std::vector<CellState> targets;
  // Redraw degenerate draws that would program nothing (all ones, or zeros
  // landing only on cells already at or above the reference).
  do {
    for (auto& b : slc_bits) b = rng.next_bit() ? 1 : 0;
    targets = slc_fold_targets(current, slc_bits, ref);
  } while (std::equal(current.begin(), current.end(), targets.begin()));
  return dev.program_page(addr, targets, ProgramMode::partial_overwrite);
}

void ddp_page(Device& dev, PhysicalAddress addr, const DdpParams& ddp,
              Rng& rng) {
  auto states = dev.read_page(addr);
  for (auto& s : states) s = ddp_cell(s, ddp, rng);
  dev.disturb_page(addr, states);
}

int calibrate_ddp(std::uint32_t cells_per_page, int t, double p_adv,
                  double target_fail_prob, std::uint32_t trials,
                  std::uint64_t seed) {
  if (cells_per_page < 1) throw ConfigError("cells_per_page must be >= 1");
  if (t < 0) throw ConfigError("ecc capability t must be >= 0");
  DdpParams{p_adv, 1}.validate();
  if (!(target_fail_prob > 0.0 && target_fail_prob < 1.0))
    throw ConfigError("target_fail_prob must be in (0, 1)");
  if (trials < 10000) throw ConfigError("calibration needs >= 10^4 trials");

  // A page only has 3 bits per cell to flip.
  if (t >= 3 * static_cast<int>(cells_per_page))
    throw Unreachable("ecc capability covers every possible flip count");

  // Saturation limit: with enough pulses every cell ends at the top state.
  // The flip count of a uniform random page against the all-top page is then
  // fixed, so if even that distribution stays within t too often, no pulse
  // count can ever work. Exact tail via convolution.
  {
    double per_cell[4] = {0, 0, 0, 0};
    for (int ord = 0; ord < kNumStates; ++ord)
      per_cell[std::popcount(static_cast<unsigned>(
          state_code_packed(static_cast<CellState>(ord)) ^
          state_code_packed(kTopState)))] += 1.0 / kNumStates;
    std::vector<double> dist{1.0};
    for (std::uint32_t c = 0; c < cells_per_page; ++c) {
      std::vector<double> next(dist.size() + 3, 0.0);
      for (std::size_t i = 0; i < dist.size(); ++i)
        for (int f = 0; f < 4; ++f) next[i + f] += dist[i] * per_cell[f];
      dist = std::move(next);
    }
    double saturated_fail = 0.0;
    for (int i = 0; i <= t && i < static_cast<int>(dist.size()); ++i)
      saturated_fail += dist[i];
    if (saturated_fail > target_fail_prob)
      throw Unreachable("even saturated pulses stay ECC-correctable too often");
  }

  // Past ~7/p_adv pulses virtually every cell has saturated, so searching
  // further cannot change the estimate.
  const int k_cap = std::max(
      64, static_cast<int>(static_cast<double>(8 * ordinal(kTopState)) / p_adv));
  for (int k = 1; k <= k_cap; ++k) {
    Rng rng(mix_seed({seed, static_cast<std::uint64_t>(k)}));
    const DdpParams ddp{p_adv, k};
    std::uint64_t correctable = 0;
    for (std::uint32_t trial = 0; trial < trials; ++trial) {
      int flips = 0;
      for (std::uint32_t c = 0; c < cells_per_page; ++c) {
        const auto before =
            static_cast<CellState>(rng.below(kNumStates));
        const CellState after = ddp_cell(before, ddp, rng);
        flips += std::popcount(static_cast<unsigned>(
            state_code_packed(before) ^ state_code_packed(after)));
      }
      if (flips <= t) ++correctable;
    }
    if (static_cast<double>(correctable) / trials <= target_fail_prob)
      return k;
  }
  throw Unreachable("no pulse count reached the target failure probability");
}

bool DestructionReport::all_verified() const {
  return std::all_of(pages.begin(), pages.end(),
                     [](const PageResult& p) { return p.verified; });
}

nlohmann::json DestructionReport::to_json() const {
  nlohmann::json pages_json = nlohmann::json::array();
  for (const auto& p : pages)
    pages_json.push_back({{"block", p.addr.block},
                          {"page", p.addr.page},
                          {"pulses", p.pulses.program_pulses},
                          {"verify_pulses", p.pulses.verify_pulses},
                          {"programmed", p.programmed},
                          {"verified", p.verified}});
  return {{"scheme", scheme.to_json()},
          {"pages", std::move(pages_json)},
          {"total_program_pulses", total_pulses.program_pulses},
          {"total_verify_pulses", total_pulses.verify_pulses},
          {"pgm_ops", pgm_ops},
          {"erase_ops", erase_ops},
          {"model_time", model_time}};
}

VerificationFailed::VerificationFailed(DestructionReport r)
    : Error("destruction verification failed on " +
            std::to_string(std::count_if(
                r.pages.begin(), r.pages.end(),
                [](const PageResult& p) { return !p.verified; })) +
            " page(s)"),
      report(std::move(r)) {}

namespace {

double destroy_model_time(SanitizeScheme::Kind kind, std::size_t n,
                          const CostParams& costs) {
  if (n == 0) return 0.0;
  const auto pages = static_cast<double>(n);
  switch (kind) {
    case SanitizeScheme::Kind::po_random:
    case SanitizeScheme::Kind::po_fold:
      return pages * costs.t_rdg + costs.t_pow;
    case SanitizeScheme::Kind::slc_fold:
      return pages * costs.t_sdg + costs.t_slcp;
    case SanitizeScheme::Kind::ddp:
      return pages * costs.t_ddp;
  }
  throw UnknownScheme("unknown sanitize scheme");
}

}  // namespace

DestructionReport destroy(
    Ftl& ftl, Device& dev, const SanitizeScheme& scheme,
    const std::optional<std::vector<PhysicalAddress>>& targets, Rng& rng,
    const CostParams& costs) {
  scheme.validate();
  std::vector<PhysicalAddress> pages =
      targets ? *targets : ftl.invalid_privacy_pages();

  DestructionReport report;
  report.scheme = scheme;
  const std::uint64_t pgm_before = dev.total_pgm_count();
  const std::uint64_t erase_before = dev.total_erase_count();

  for (const PhysicalAddress addr : pages) {
    const auto original = dev.read_page(addr);
    PulseStats pulses;
    switch (scheme.kind) {
      case SanitizeScheme::Kind::po_random:
        pulses = partial_overwrite_page(dev, addr, PoMode::random, scheme.ref,
                                        rng);
        break;
      case SanitizeScheme::Kind::po_fold:
        pulses =
            partial_overwrite_page(dev, addr, PoMode::fold, scheme.ref, rng);
        break;
      case SanitizeScheme::Kind::slc_fold:
        pulses = slc_fold_page(dev, addr, scheme.ref, rng);
        break;
      case SanitizeScheme::Kind::ddp:
        ddp_page(dev, addr, scheme.ddp, rng);
        break;
    }
    const auto treated = dev.read_page(addr);
    const ScramblerKey key =
        page_key(ftl.scrambler(), addr.block, addr.page);
    // The page counts as destroyed only if both the stored codes and their
    // demodulated form moved away from the pre-destroy content.
    const bool verified =
        treated != original &&
        descramble(states_to_bits(treated), key) !=
            descramble(states_to_bits(original), key);
    if (verified) ftl.mark_sanitized(addr);
    report.pages.push_back(
        {addr, pulses, pulses.program_pulses > 0, verified});
    report.total_pulses += pulses;
  }

  report.pgm_ops = dev.total_pgm_count() - pgm_before;
  report.erase_ops = dev.total_erase_count() - erase_before;
  report.model_time =
      destroy_model_time(scheme.kind, report.pages.size(), costs);
  if (!report.all_verified()) throw VerificationFailed(std::move(report));
  return report;
}

std::size_t VerifyResult::mapped_hits() const {
  return static_cast<std::size_t>(
      std::count_if(locations.begin(), locations.end(),
                    [](const ScanHit& h) { return h.mapped; }));
}

std::size_t VerifyResult::unmapped_hits() const {
  return locations.size() - mapped_hits();
}

nlohmann::json VerifyResult::to_json() const {
  nlohmann::json locs = nlohmann::json::array();
  for (const auto& h : locations)
    locs.push_back({{"block", h.addr.block},
                    {"page", h.addr.page},
                    {"mapped", h.mapped},
                    {"raw_hit", h.raw_hit},
                    {"decoded_hit", h.decoded_hit}});
  return {{"found", found}, {"locations", std::move(locs)}};
}

namespace {

// Substring search restricted to cell-aligned bit offsets.
bool contains_aligned(const BitString& haystack, const BitString& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t off = 0; off + needle.size() <= haystack.size();
       off += kBitsPerCell)
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + off))
      return true;
  return false;
}

}  // namespace

VerifyResult verify_destruction(const Ftl& ftl, const Device& dev,
                                const BitString& payload_bits,
                                const ScramblerConfig& scrambler) {
  VerifyResult result;
  if (payload_bits.empty()) return result;
  std::set<PhysicalAddress> mapped;
  for (const auto& [lpn, entry] : ftl.mapping()) mapped.insert(entry.addr);
  for (const auto& page : dev.scan_pages(ScanFilter::all)) {
    const BitString raw = states_to_bits(page.states);
    const bool raw_hit = contains_aligned(raw, payload_bits);
    const ScramblerKey key =
        page_key(scrambler, page.addr.block, page.addr.page);
    const bool decoded_hit =
        contains_aligned(descramble(raw, key), payload_bits);
    if (raw_hit || decoded_hit)
      result.locations.push_back(
          {page.addr, mapped.contains(page.addr), raw_hit, decoded_hit});
  }
  result.found = !result.locations.empty();
  return result;
}

}  // namespace nandsan
