#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nandsan/errors.hpp"

namespace nandsan {

struct DestructionReport;  // sanitizer.hpp

// Wear and timing constants. a/b are degradation units per erase/program;
// the T_* values are model time units. Defaults are illustrative, not device
// data; only the a = 1000*b relation is load-bearing.
struct CostParams {
  double a = 1000.0;
  double b = 1.0;
  double t_pgm = 200.0;     // page program time
  double t_rdg = 10.0;      // read plus random overwrite-data generation, per page
  double t_sdg = 10.0;      // single-bit data generation, per page
  double t_pow = 400.0;     // partial-overwrite program time
  double t_slcp = 220.0;    // single-level program time
  double t_ddp = 50.0;      // duty-pulse application, per page
  double t_oneshot = 300.0; // one-shot program time (comparison scheme)

  void validate() const;
  // Non-fatal configuration advice (e.g. a below 1000*b).
  std::vector<std::string> warnings() const;
};

enum class CostScheme { block_erase, one_shot, partial_overwrite, slc, ddp };

const char* to_string(CostScheme scheme);
CostScheme parse_cost_scheme(std::string_view name);

// A count or degradation figure that may be an upper bound ("< value").
struct Bound {
  double value = 0.0;
  bool upper = false;
  friend bool operator==(const Bound&, const Bound&) = default;
};

struct CostReport {
  CostScheme scheme = CostScheme::block_erase;
  bool applicable = true;
  Bound pgm_count;
  double erase_count = 0.0;
  Bound degradation;
  // Destruction time; empty when it depends on the erase policy. A lower
  // bound may accompany a policy-dependent entry.
  std::optional<double> time;
  std::optional<double> time_lower_bound;
  std::string time_note;
};

// Analytic cost rows for the garbage-collection scenario: M valid pages moved,
// N invalid pages to destroy. Throws UnknownScheme.
CostReport gc_case(CostScheme scheme, std::uint64_t m, std::uint64_t n,
                   const CostParams& params);

// Analytic cost rows for the single-page-update scenario.
CostReport update_case(CostScheme scheme, std::uint64_t m,
                       const CostParams& params);

enum class CostScenario { gc, update };

// One row per scheme; rows with policy-dependent time sort last.
std::vector<CostReport> compare(CostScenario scenario,
                                const std::vector<CostScheme>& schemes,
                                std::uint64_t m, std::uint64_t n,
                                const CostParams& params);

std::string render_cost_table(const std::vector<CostReport>& rows);
nlohmann::json cost_rows_to_json(const std::vector<CostReport>& rows);

// Cross-checks a simulated destruction run against the analytic model:
// program count within the scheme's bound, zero erases, and the model time
// recomputable from the treated-page count. Throws Mismatch with a diff.
void measured_vs_model(const DestructionReport& report,
                       const CostParams& params);

}  // namespace nandsan
