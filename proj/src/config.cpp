#include "nandsan/config.hpp"

#include <set>

namespace nandsan {

namespace {

void reject_unknown_keys(const nlohmann::json& j,
                         const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.contains(key))
      throw ConfigError("unknown key \"" + key + "\" in " + where);
}

}  // namespace

std::vector<std::string> RunConfig::validate() const {
  geometry.validate();
  ecc.validate();
  if (!(ddp.p_adv > 0.0 && ddp.p_adv <= 1.0))
    throw ConfigError("ddp p_adv must be in (0, 1]");
  if (ddp.k < 0) throw ConfigError("ddp k must be >= 0 (0 = auto-calibrate)");
  if (!(ddp_target_fail_prob > 0.0 && ddp_target_fail_prob < 1.0))
    throw ConfigError("ddp target failure probability must be in (0, 1)");
  pulse.validate();
  cost.validate();
  return cost.warnings();
}

nlohmann::json RunConfig::to_json() const {
  return {{"geometry",
           {{"num_blocks", geometry.num_blocks},
            {"pages_per_block", geometry.pages_per_block},
            {"cells_per_page", geometry.cells_per_page}}},
          {"seed", seed},
          {"scrambler", to_string(scrambler)},
          {"ecc", {{"t", ecc.t}}},
          {"ddp",
           {{"p_adv", ddp.p_adv},
            {"k", ddp.k},
            {"target_fail_prob", ddp_target_fail_prob}}},
          {"pulse",
           {{"pgm_start", pulse.pgm_start},
            {"po_start", pulse.po_start},
            {"step", pulse.step},
            {"verify_per_pulse_normal", pulse.verify_per_pulse_normal},
            {"verify_per_target_po", pulse.verify_per_target_po},
            {"v_pass", pulse.v_pass}}},
          {"cost",
           {{"a", cost.a},
            {"b", cost.b},
            {"t_pgm", cost.t_pgm},
            {"t_rdg", cost.t_rdg},
            {"t_sdg", cost.t_sdg},
            {"t_pow", cost.t_pow},
            {"t_slcp", cost.t_slcp},
            {"t_ddp", cost.t_ddp},
            {"t_oneshot", cost.t_oneshot}}}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  reject_unknown_keys(
      j, {"geometry", "seed", "scrambler", "ecc", "ddp", "pulse", "cost"},
      "config");
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    reject_unknown_keys(g, {"num_blocks", "pages_per_block", "cells_per_page"},
                        "config.geometry");
    if (g.contains("num_blocks"))
      cfg.geometry.num_blocks = g.at("num_blocks").get<std::uint32_t>();
    if (g.contains("pages_per_block"))
      cfg.geometry.pages_per_block =
          g.at("pages_per_block").get<std::uint32_t>();
    if (g.contains("cells_per_page"))
      cfg.geometry.cells_per_page =
          g.at("cells_per_page").get<std::uint32_t>();
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("scrambler"))
    cfg.scrambler =
        parse_scrambler_mode(j.at("scrambler").get_ref<const std::string&>());
  if (j.contains("ecc")) {
    const auto& e = j.at("ecc");
    reject_unknown_keys(e, {"t"}, "config.ecc");
    if (e.contains("t")) cfg.ecc.t = e.at("t").get<int>();
  }
  if (j.contains("ddp")) {
    const auto& d = j.at("ddp");
    reject_unknown_keys(d, {"p_adv", "k", "target_fail_prob"}, "config.ddp");
    if (d.contains("p_adv")) cfg.ddp.p_adv = d.at("p_adv").get<double>();
    if (d.contains("k")) cfg.ddp.k = d.at("k").get<int>();
    if (d.contains("target_fail_prob"))
      cfg.ddp_target_fail_prob = d.at("target_fail_prob").get<double>();
  }
  if (j.contains("pulse")) {
    const auto& p = j.at("pulse");
    reject_unknown_keys(p,
                        {"pgm_start", "po_start", "step",
                         "verify_per_pulse_normal", "verify_per_target_po",
                         "v_pass"},
                        "config.pulse");
    if (p.contains("pgm_start"))
      cfg.pulse.pgm_start = p.at("pgm_start").get<double>();
    if (p.contains("po_start"))
      cfg.pulse.po_start = p.at("po_start").get<double>();
    if (p.contains("step")) cfg.pulse.step = p.at("step").get<double>();
    if (p.contains("verify_per_pulse_normal"))
      cfg.pulse.verify_per_pulse_normal =
          p.at("verify_per_pulse_normal").get<int>();
    if (p.contains("verify_per_target_po"))
      cfg.pulse.verify_per_target_po =
          p.at("verify_per_target_po").get<int>();
    if (p.contains("v_pass")) cfg.pulse.v_pass = p.at("v_pass").get<double>();
  }
  if (j.contains("cost")) {
    const auto& c = j.at("cost");
    reject_unknown_keys(c,
                        {"a", "b", "t_pgm", "t_rdg", "t_sdg", "t_pow",
                         "t_slcp", "t_ddp", "t_oneshot"},
                        "config.cost");
    if (c.contains("a")) cfg.cost.a = c.at("a").get<double>();
    if (c.contains("b")) cfg.cost.b = c.at("b").get<double>();
    if (c.contains("t_pgm")) cfg.cost.t_pgm = c.at("t_pgm").get<double>();
    if (c.contains("t_rdg")) cfg.cost.t_rdg = c.at("t_rdg").get<double>();
    if (c.contains("t_sdg")) cfg.cost.t_sdg = c.at("t_sdg").get<double>();
    if (c.contains("t_pow")) cfg.cost.t_pow = c.at("t_pow").get<double>();
    if (c.contains("t_slcp")) cfg.cost.t_slcp = c.at("t_slcp").get<double>();
    if (c.contains("t_ddp")) cfg.cost.t_ddp = c.at("t_ddp").get<double>();
    if (c.contains("t_oneshot"))
      cfg.cost.t_oneshot = c.at("t_oneshot").get<double>();
  }
  cfg.validate();
  return cfg;
}

}  // namespace nandsan
