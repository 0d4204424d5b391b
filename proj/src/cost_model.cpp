#include "nandsan/cost_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "nandsan/sanitizer.hpp"

namespace nandsan {

void CostParams::validate() const {
  for (double v : {a, b, t_pgm, t_rdg, t_sdg, t_pow, t_slcp, t_ddp, t_oneshot})
    if (!(v > 0.0)) throw ConfigError("cost parameters must be positive");
}

std::vector<std::string> CostParams::warnings() const {
  std::vector<std::string> out;
  if (a < 1000.0 * b)
    out.push_back("per-erase degradation a is below 1000*b; block erase "
                  "normally wears around a thousand times harder than a "
                  "program");
  return out;
}

const char* to_string(CostScheme scheme) {
  switch (scheme) {
    case CostScheme::block_erase: return "block_erase";
    case CostScheme::one_shot: return "one_shot";
    case CostScheme::partial_overwrite: return "partial_overwrite";
    case CostScheme::slc: return "slc";
    case CostScheme::ddp: return "ddp";
  }
  return "?";
}

CostScheme parse_cost_scheme(std::string_view name) {
  if (name == "block_erase" || name == "erase") return CostScheme::block_erase;
  if (name == "one_shot" || name == "oneshot") return CostScheme::one_shot;
  if (name == "partial_overwrite" || name == "po")
    return CostScheme::partial_overwrite;
  if (name == "slc") return CostScheme::slc;
  if (name == "ddp") return CostScheme::ddp;
  throw UnknownScheme("unknown cost scheme: " + std::string(name));
}

CostReport gc_case(CostScheme scheme, std::uint64_t m, std::uint64_t n,
                   const CostParams& params) {
  params.validate();
  const auto md = static_cast<double>(m);
  const auto nd = static_cast<double>(n);
  CostReport r;
  r.scheme = scheme;
  switch (scheme) {
    case CostScheme::block_erase:
      r.pgm_count = {0.0, false};
      r.erase_count = 1.0;
      r.degradation = {params.a, false};
      r.time = std::nullopt;
      r.time_lower_bound = md * params.t_pgm;
      r.time_note = "policy-dependent";
      return r;
    case CostScheme::one_shot:
      // One-shot programming addresses updates only; it leaves garbage
      // collection residues untouched.
      r.applicable = false;
      r.time_note = "not applicable";
      return r;
    case CostScheme::partial_overwrite:
      r.pgm_count = {nd, true};
      r.erase_count = 0.0;
      r.degradation = {params.b * nd, true};
      r.time = md * params.t_pgm + nd * params.t_rdg + params.t_pow;
      return r;
    case CostScheme::slc:
      r.pgm_count = {nd, true};
      r.erase_count = 0.0;
      r.degradation = {params.b * nd, true};
      r.time = md * params.t_pgm + nd * params.t_sdg + params.t_slcp;
      return r;
    case CostScheme::ddp:
      r.pgm_count = {nd, true};
      r.erase_count = 0.0;
      r.degradation = {params.b * nd, true};
      r.time = md * params.t_pgm + nd * params.t_ddp;
      return r;
  }
  throw UnknownScheme("unknown cost scheme");
}

CostReport update_case(CostScheme scheme, std::uint64_t m,
                       const CostParams& params) {
  params.validate();
  const auto md = static_cast<double>(m);
  CostReport r;
  r.scheme = scheme;
  switch (scheme) {
    case CostScheme::block_erase:
      r.pgm_count = {0.0, false};
      r.erase_count = 1.0;
      r.degradation = {params.a, false};
      r.time = std::nullopt;
      r.time_note = "policy-dependent";
      return r;
    case CostScheme::one_shot:
      r.pgm_count = {1.0, false};
      r.erase_count = 0.0;
      r.degradation = {params.b, false};
      r.time = md * params.t_pgm + params.t_oneshot;
      return r;
    case CostScheme::partial_overwrite:
      r.pgm_count = {1.0, false};
      r.erase_count = 0.0;
      r.degradation = {params.b, false};
      r.time = md * params.t_pgm + params.t_rdg + params.t_pow;
      return r;
    case CostScheme::slc:
      r.pgm_count = {1.0, false};
      r.erase_count = 0.0;
      r.degradation = {params.b, false};
      r.time = md * params.t_pgm + params.t_sdg + params.t_slcp;
      return r;
    case CostScheme::ddp:
      r.pgm_count = {1.0, false};
      r.erase_count = 0.0;
      r.degradation = {params.b, false};
      r.time = md * params.t_pgm + params.t_ddp;
      return r;
  }
  throw UnknownScheme("unknown cost scheme");
}

std::vector<CostReport> compare(CostScenario scenario,
                                const std::vector<CostScheme>& schemes,
                                std::uint64_t m, std::uint64_t n,
                                const CostParams& params) {
  std::vector<CostReport> rows;
  rows.reserve(schemes.size());
  for (CostScheme s : schemes)
    rows.push_back(scenario == CostScenario::gc ? gc_case(s, m, n, params)
                                                : update_case(s, m, params));
  std::stable_partition(rows.begin(), rows.end(), [](const CostReport& r) {
    return !r.applicable || r.time.has_value();
  });
  return rows;
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  if (v == std::floor(v) && std::abs(v) < 1e15)
    os << static_cast<long long>(v);
  else
    os << v;
  return os.str();
}

std::string format_bound(const Bound& b) {
  return (b.upper ? "< " : "") + format_number(b.value);
}

std::string format_time(const CostReport& r) {
  if (!r.applicable) return "x";
  if (r.time) return format_number(*r.time);
  std::string s = r.time_note.empty() ? "policy-dependent" : r.time_note;
  if (r.time_lower_bound) s += " (> " + format_number(*r.time_lower_bound) + ")";
  return s;
}

}  // namespace

std::string render_cost_table(const std::vector<CostReport>& rows) {
  static constexpr const char* kHeaders[] = {
      "Scheme", "PGM count", "Erase count", "Total", "Destruction time"};
  std::vector<std::array<std::string, 5>> cells;
  for (const auto& r : rows) {
    if (!r.applicable) {
      cells.push_back({to_string(r.scheme), "x", "x", "x", "x"});
      continue;
    }
    cells.push_back({to_string(r.scheme), format_bound(r.pgm_count),
                     format_number(r.erase_count), format_bound(r.degradation),
                     format_time(r)});
  }
  std::array<std::size_t, 5> width{};
  for (int c = 0; c < 5; ++c) width[c] = std::string(kHeaders[c]).size();
  for (const auto& row : cells)
    for (int c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  const auto emit = [&](const std::array<std::string, 5>& row) {
    for (int c = 0; c < 5; ++c) {
      os << row[c] << std::string(width[c] - row[c].size(), ' ');
      os << (c + 1 < 5 ? "  " : "");
    }
    os << '\n';
  };
  emit({kHeaders[0], kHeaders[1], kHeaders[2], kHeaders[3], kHeaders[4]});
  for (const auto& row : cells) emit(row);
  return os.str();
}

nlohmann::json cost_rows_to_json(const std::vector<CostReport>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"scheme", to_string(r.scheme)},
                     {"applicable", r.applicable}};
    if (r.applicable) {
      j["pgm_count"] = {{"value", r.pgm_count.value},
                        {"upper_bound", r.pgm_count.upper}};
      j["erase_count"] = r.erase_count;
      j["degradation"] = {{"value", r.degradation.value},
                          {"upper_bound", r.degradation.upper}};
      if (r.time)
        j["time"] = *r.time;
      else
        j["time"] = nullptr;
      if (r.time_lower_bound) j["time_lower_bound"] = *r.time_lower_bound;
      if (!r.time_note.empty()) j["time_note"] = r.time_note;
    }
    out.push_back(std::move(j));
  }
  return out;
}

void measured_vs_model(const DestructionReport& report,
                       const CostParams& params) {
  std::ostringstream diff;
  const auto n = static_cast<double>(report.pages.size());

  if (report.erase_ops != 0)
    diff << "erase delta " << report.erase_ops << ", model expects 0; ";

  const bool is_ddp = report.scheme.kind == SanitizeScheme::Kind::ddp;
  if (is_ddp) {
    if (report.pgm_ops != 0)
      diff << "pgm delta " << report.pgm_ops
           << ", duty pulses are not program operations; ";
  } else if (report.pgm_ops > report.pages.size()) {
    diff << "pgm delta " << report.pgm_ops << " exceeds treated pages "
         << report.pages.size() << "; ";
  }

  double expected_time = 0.0;
  if (!report.pages.empty()) {
    switch (report.scheme.kind) {
      case SanitizeScheme::Kind::po_random:
      case SanitizeScheme::Kind::po_fold:
        expected_time = n * params.t_rdg + params.t_pow;
        break;
      case SanitizeScheme::Kind::slc_fold:
        expected_time = n * params.t_sdg + params.t_slcp;
        break;
      case SanitizeScheme::Kind::ddp:
        expected_time = n * params.t_ddp;
        break;
    }
  }
  if (report.model_time != expected_time)
    diff << "model time " << report.model_time << ", recomputed "
         << expected_time << "; ";

  const std::string msg = diff.str();
  if (!msg.empty()) throw Mismatch("measured run diverges from model: " + msg);
}

}  // namespace nandsan
