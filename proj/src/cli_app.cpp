#include "nandsan/cli_app.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "nandsan/config.hpp"
#include "nandsan/cost_model.hpp"
#include "nandsan/ftl.hpp"
#include "nandsan/sanitizer.hpp"

namespace nandsan {

namespace {

constexpr int kDumpVersion = 1;
constexpr std::uint64_t kSanitizeRngTag = 0x73616e6974697aULL;

std::set<std::string>& held_locks() {
  static std::set<std::string> locks;
  return locks;
}

// One writer per state file. Reentrant within the process so replay can run
// subcommands under the lock it already holds.
class LockFile {
 public:
  explicit LockFile(const std::string& device_path)
      : lock_path_(device_path + ".lock") {
    if (held_locks().contains(lock_path_)) return;
    const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY,
                          0644);
    if (fd < 0)
      throw DeviceLocked("state file is locked (" + lock_path_ +
                         " exists); remove it if no other run is active");
    ::close(fd);
    held_locks().insert(lock_path_);
    owned_ = true;
  }

  ~LockFile() {
    if (owned_) {
      ::unlink(lock_path_.c_str());
      held_locks().erase(lock_path_);
    }
  }

  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::string lock_path_;
  bool owned_ = false;
};

struct Session {
  RunConfig cfg;
  Device dev;
  Ftl ftl;
  std::uint64_t op_counter = 0;
};

nlohmann::json config_section(const RunConfig& cfg) {
  nlohmann::json j = cfg.to_json();
  j.erase("geometry");  // geometry and seed live at the document top level
  j.erase("seed");
  return j;
}

nlohmann::json session_to_json(const Session& s) {
  nlohmann::json doc = dump_state(s.dev, s.ftl, s.op_counter);
  doc["config"] = config_section(s.cfg);
  return doc;
}

void save_session(const std::string& path, const Session& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write state file " + path);
  out << session_to_json(s).dump(2) << '\n';
}

Session load_session(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open state file " + path + "; run init first");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("state file " + path + " is not valid JSON: " + e.what());
  }
  try {
    if (doc.at("version").get<int>() != kDumpVersion)
      throw ParseError("unsupported state file version");
    nlohmann::json cfg_j = doc.at("config");
    cfg_j["geometry"] = doc.at("geometry");
    cfg_j["seed"] = doc.at("seed");
    RunConfig cfg = RunConfig::from_json(cfg_j);
    Device dev = Device::from_json(doc, cfg.pulse);
    Ftl ftl = Ftl::from_json(doc.at("ftl"), cfg.scrambler_config(),
                             cfg.geometry);
    return Session{std::move(cfg), std::move(dev), std::move(ftl),
                   doc.at("op_counter").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("state file " + path + " is malformed: " + e.what());
  }
}

std::uint32_t parse_u32(const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(s, &used);
    if (used != s.size() || v > 0xffffffffUL) throw std::invalid_argument(s);
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw ParseError("not a valid number: \"" + s + "\"");
  }
}

std::vector<std::uint32_t> parse_id_list(const std::string& csv) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_u32(item));
  return out;
}

std::vector<PhysicalAddress> parse_address_list(const std::string& csv) {
  std::vector<PhysicalAddress> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ParseError("address must look like block:page, got " + item);
    out.push_back({parse_u32(item.substr(0, colon)),
                   parse_u32(item.substr(colon + 1))});
  }
  return out;
}

// Whitespace split honoring double quotes.
std::vector<std::string> tokenize_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quotes = false;
  bool have_token = false;
  for (char c : line) {
    if (c == '"') {
      in_quotes = !in_quotes;
      have_token = true;
      continue;
    }
    if (!in_quotes && (c == ' ' || c == '\t')) {
      if (have_token) out.push_back(cur);
      cur.clear();
      have_token = false;
      continue;
    }
    cur.push_back(c);
    have_token = true;
  }
  if (in_quotes) throw ParseError("unterminated quote");
  if (have_token) out.push_back(cur);
  return out;
}

BitString payload_bits_from_flags(const std::string& text,
                                  const std::string& bits) {
  if (!text.empty() && !bits.empty())
    throw ParseError("give either text or bits, not both");
  if (!text.empty()) return text_to_bits(text);
  if (!bits.empty()) return bits_from_string(bits);
  throw ParseError("a payload (text or bits) is required");
}

std::string join_states(std::span<const CellState> states) {
  std::string out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out.push_back(' ');
    out += to_string(states[i]);
  }
  return out;
}

void print_destruction_report(const DestructionReport& report, bool as_json,
                              std::ostream& out) {
  if (as_json) {
    out << report.to_json().dump(2) << '\n';
    return;
  }
  out << "scheme " << to_string(report.scheme.kind) << ": treated "
      << report.pages.size() << " page(s), "
      << report.total_pulses.program_pulses << " program pulse(s), "
      << report.total_pulses.verify_pulses << " verify pulse(s), model time "
      << report.model_time << '\n';
  for (const auto& p : report.pages)
    out << "  block " << p.addr.block << " page " << p.addr.page << ": "
        << p.pulses.program_pulses << " pulse(s), "
        << (p.verified ? "verified" : "NOT verified") << '\n';
}

void print_scan_result(const VerifyResult& result, bool as_json,
                       std::ostream& out) {
  if (as_json) {
    out << result.to_json().dump(2) << '\n';
    return;
  }
  for (const auto& h : result.locations) {
    out << "  block " << h.addr.block << " page " << h.addr.page << ' '
        << (h.mapped ? "(mapped)" : "(unmapped)") << ':';
    if (h.raw_hit) out << " stored codes";
    if (h.decoded_hit) out << (h.raw_hit ? " and" : "") << " demodulated form";
    out << '\n';
  }
  if (result.found)
    out << "found " << result.locations.size() << " location(s): "
        << result.mapped_hits() << " mapped, " << result.unmapped_hits()
        << " unmapped\n";
  else
    out << "payload not found\n";
}

int execute(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

int run_replay(const std::string& log_path, const std::string& device_path,
               bool as_json, std::ostream& out, std::ostream& err) {
  std::ifstream in(log_path);
  if (!in) throw Error("cannot open op log " + log_path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t executed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> tokens;
    try {
      tokens = tokenize_line(line);
    } catch (const Error& e) {
      throw ParseError("op log line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.front() == "replay")
      throw ParseError("op log line " + std::to_string(line_no) +
                       ": nested replay is not allowed");
    for (const auto& t : tokens)
      if (t == "--device")
        throw ParseError("op log line " + std::to_string(line_no) +
                         ": --device is fixed by the replay invocation");
    std::vector<std::string> argv{"--device", device_path};
    argv.insert(argv.end(), tokens.begin(), tokens.end());
    try {
      const int rc = execute(argv, out, err);
      if (rc != 0)
        throw Error("command exited with status " + std::to_string(rc));
    } catch (const CLI::ParseError& e) {
      throw ParseError("op log line " + std::to_string(line_no) + ": " +
                       e.what());
    } catch (const Error& e) {
      throw Error("op log line " + std::to_string(line_no) + ": " + e.what());
    }
    ++executed;
  }
  if (as_json)
    out << nlohmann::json{{"ops", executed}, {"log", log_path}}.dump(2)
        << '\n';
  else
    out << "replayed " << executed << " op(s) from " << log_path << '\n';
  return 0;
}

int execute(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"deterministic TLC NAND simulator with privacy-data "
               "destruction schemes"};
  app.name("nandsan");
  std::string device_path = "device.json";
  bool as_json = false;
  app.add_option("--device", device_path, "simulation state file")
      ->capture_default_str();
  app.add_flag("--json", as_json, "machine-readable output");
  app.require_subcommand(1);

  // init
  auto* init = app.add_subcommand("init", "create a fresh device");
  std::string config_path;
  std::uint32_t blocks = 8, pages = 16, cells = 48;
  std::uint64_t seed = 1;
  std::string scrambler = "xor_keystream";
  int ecc_t = 4;
  double p_adv = 0.5;
  int ddp_k = 0;
  init->add_option("--config", config_path, "config file (JSON)");
  init->add_option("--blocks", blocks, "blocks per device");
  init->add_option("--pages", pages, "pages per block");
  init->add_option("--cells", cells, "cells per page");
  init->add_option("--seed", seed, "global seed");
  init->add_option("--scrambler", scrambler, "xor_keystream | shift2");
  init->add_option("--ecc-t", ecc_t, "correctable bit flips per page");
  init->add_option("--p-adv", p_adv, "duty-pulse advance probability");
  init->add_option("--ddp-k", ddp_k, "duty pulses per page (0 = calibrate)");

  // write / update
  auto* write = app.add_subcommand("write", "write a logical page");
  auto* update = app.add_subcommand("update", "update a logical page");
  std::uint32_t lpn = 0;
  std::string text, bits;
  bool privacy = false;
  for (auto* cmd : {write, update}) {
    cmd->add_option("--lpn", lpn, "logical page number")->required();
    cmd->add_option("--text", text, "ASCII payload");
    cmd->add_option("--bits", bits, "raw payload bits");
  }
  write->add_flag("--privacy", privacy, "flag the page as privacy data");

  // gc
  auto* gc = app.add_subcommand("gc", "collect victim blocks (no erase)");
  std::string victims_csv;
  std::uint32_t greedy = 0;
  gc->add_option("--victims", victims_csv, "victim blocks, e.g. 0,1");
  gc->add_option("--greedy", greedy,
                 "pick this many victims by invalid-page count");

  // sanitize
  auto* sanitize = app.add_subcommand("sanitize", "destroy invalid privacy pages");
  std::string scheme_name, ref_name = "P5", targets_csv = "all";
  int k_flag = -1;
  double p_adv_flag = -1.0;
  bool calibrate = false, explain = false;
  sanitize->add_option("--scheme", scheme_name, "po | fold | slc | ddp")
      ->required();
  sanitize->add_option("--ref", ref_name, "fold reference state");
  sanitize->add_option("--k", k_flag, "duty pulses per page");
  sanitize->add_option("--p-adv", p_adv_flag, "duty-pulse advance probability");
  sanitize->add_flag("--calibrate", calibrate,
                     "calibrate duty pulses against the ECC capability");
  sanitize->add_option("--targets", targets_csv,
                       "all | block:page[,block:page...]");
  sanitize->add_flag("--explain", explain, "print per-page modulation rows");

  // scan / verify
  auto* scan = app.add_subcommand("scan", "search all pages for a payload");
  auto* verify = app.add_subcommand(
      "verify", "like scan, but fails when unmapped copies remain");
  std::string payload_text, payload_bits;
  for (auto* cmd : {scan, verify}) {
    cmd->add_option("--payload", payload_text, "ASCII payload to look for");
    cmd->add_option("--bits", payload_bits, "payload bits to look for");
  }

  // costs
  auto* costs = app.add_subcommand("costs", "analytic scheme comparison");
  std::string scenario, schemes_csv = "erase,oneshot,po,slc,ddp";
  std::uint64_t m_count = 0, n_count = 0;
  CostParams cost_params;
  costs->add_option("--scenario", scenario, "gc | update")->required();
  costs->add_option("--M", m_count, "valid pages moved");
  costs->add_option("--N", n_count, "invalid pages to destroy");
  costs->add_option("--schemes", schemes_csv, "comma list of schemes");
  costs->add_option("--a", cost_params.a, "degradation per erase");
  costs->add_option("--b", cost_params.b, "degradation per program");
  costs->add_option("--t-pgm", cost_params.t_pgm, "page program time");
  costs->add_option("--t-rdg", cost_params.t_rdg, "read+generate time");
  costs->add_option("--t-sdg", cost_params.t_sdg, "single-bit data time");
  costs->add_option("--t-pow", cost_params.t_pow, "partial overwrite time");
  costs->add_option("--t-slcp", cost_params.t_slcp, "single-level program time");
  costs->add_option("--t-ddp", cost_params.t_ddp, "duty-pulse time");
  costs->add_option("--t-oneshot", cost_params.t_oneshot, "one-shot time");

  // dump / replay
  auto* dump = app.add_subcommand("dump", "print the state document");
  std::string dump_out;
  dump->add_option("--out", dump_out, "write to this file instead of stdout");
  auto* replay = app.add_subcommand("replay", "re-execute an op log");
  std::string log_path;
  replay->add_option("log", log_path, "op log, one command per line")
      ->required();

  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::Success& e) {
      return app.exit(e, out, err);  // --help family
    }
  }

  if (app.got_subcommand(init)) {
    LockFile lock(device_path);
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error("cannot open config file " + config_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("config file is not valid JSON: " +
                         std::string(e.what()));
      }
      cfg = RunConfig::from_json(j);
    }
    if (init->count("--blocks")) cfg.geometry.num_blocks = blocks;
    if (init->count("--pages")) cfg.geometry.pages_per_block = pages;
    if (init->count("--cells")) cfg.geometry.cells_per_page = cells;
    if (init->count("--seed")) cfg.seed = seed;
    if (init->count("--scrambler"))
      cfg.scrambler = parse_scrambler_mode(scrambler);
    if (init->count("--ecc-t")) cfg.ecc.t = ecc_t;
    if (init->count("--p-adv")) cfg.ddp.p_adv = p_adv;
    if (init->count("--ddp-k")) cfg.ddp.k = ddp_k;
    for (const auto& w : cfg.validate()) err << "warning: " << w << '\n';
    Session s{cfg, Device(cfg.geometry, cfg.seed, cfg.pulse),
              Ftl(cfg.scrambler_config(), cfg.geometry), 0};
    save_session(device_path, s);
    if (as_json)
      out << cfg.to_json().dump(2) << '\n';
    else
      out << "initialized " << cfg.geometry.num_blocks << " blocks x "
          << cfg.geometry.pages_per_block << " pages x "
          << cfg.geometry.cells_per_page << " cells, seed " << cfg.seed
          << ", scrambler " << to_string(cfg.scrambler) << '\n';
    return 0;
  }

  if (app.got_subcommand(write) || app.got_subcommand(update)) {
    LockFile lock(device_path);
    Session s = load_session(device_path);
    const BitString payload = payload_bits_from_flags(text, bits);
    PhysicalAddress addr{};
    if (app.got_subcommand(write)) {
      addr = s.ftl.write_logical(s.dev, lpn, payload, privacy);
    } else {
      addr = s.ftl.update_logical(s.dev, lpn, payload);
      privacy = s.ftl.mapping().at(lpn).privacy;  // inherited
    }
    s.op_counter += 1;
    save_session(device_path, s);
    if (as_json)
      out << nlohmann::json{{"lpn", lpn},
                            {"block", addr.block},
                            {"page", addr.page},
                            {"privacy", privacy}}
                 .dump(2)
          << '\n';
    else
      out << (app.got_subcommand(write) ? "write" : "update") << " lpn " << lpn
          << " -> block " << addr.block << " page " << addr.page
          << (privacy ? " (privacy)" : "") << '\n';
    return 0;
  }

  if (app.got_subcommand(gc)) {
    LockFile lock(device_path);
    Session s = load_session(device_path);
    std::vector<std::uint32_t> victims;
    if (gc->count("--victims") && gc->count("--greedy"))
      throw ParseError("give either --victims or --greedy");
    if (gc->count("--victims"))
      victims = parse_id_list(victims_csv);
    else if (gc->count("--greedy"))
      victims = s.ftl.greedy_victims(greedy);
    else
      throw ParseError("gc needs --victims or --greedy");
    const GcReport report = s.ftl.garbage_collect(s.dev, victims);
    s.op_counter += 1;
    save_session(device_path, s);
    if (as_json) {
      out << nlohmann::json{{"victims", report.victims},
                            {"moved", report.moved},
                            {"residual", report.residual}}
                 .dump(2)
          << '\n';
    } else {
      out << "gc victims [";
      for (std::size_t i = 0; i < report.victims.size(); ++i)
        out << (i ? "," : "") << report.victims[i];
      out << "]: moved " << report.moved << " valid page(s), "
          << report.residual << " invalid page(s) left intact\n";
    }
    return 0;
  }

  if (app.got_subcommand(sanitize)) {
    LockFile lock(device_path);
    Session s = load_session(device_path);
    SanitizeScheme scheme;
    if (scheme_name == "po") {
      scheme = SanitizeScheme::make_po_random();
    } else if (scheme_name == "fold") {
      scheme = SanitizeScheme::make_po_fold(parse_state(ref_name));
    } else if (scheme_name == "slc") {
      scheme = SanitizeScheme::make_slc_fold(parse_state(ref_name));
    } else if (scheme_name == "ddp") {
      DdpParams ddp = s.cfg.ddp;
      if (sanitize->count("--p-adv")) ddp.p_adv = p_adv_flag;
      if (sanitize->count("--k")) ddp.k = k_flag;
      if (ddp.k <= 0 || calibrate) {
        const int k_min = calibrate_ddp(s.cfg.geometry.cells_per_page,
                                        s.cfg.ecc.t, ddp.p_adv,
                                        s.cfg.ddp_target_fail_prob);
        ddp.k = std::max(ddp.k, k_min);
        if (!as_json)
          out << "calibrated duty-pulse count: " << k_min << '\n';
      }
      scheme = SanitizeScheme::make_ddp(ddp);
    } else {
      throw UnknownScheme("unknown sanitize scheme: " + scheme_name);
    }

    std::optional<std::vector<PhysicalAddress>> targets;
    if (targets_csv != "all") {
      targets = parse_address_list(targets_csv);
      for (const auto& a : *targets)
        if (a.block >= s.cfg.geometry.num_blocks ||
            a.page >= s.cfg.geometry.pages_per_block)
          throw OutOfBounds("target " + std::to_string(a.block) + ":" +
                            std::to_string(a.page) + " is outside the device");
    }

    const std::vector<PhysicalAddress> resolved =
        targets ? *targets : s.ftl.invalid_privacy_pages();
    std::vector<std::vector<CellState>> before;
    if (explain)
      for (const auto& a : resolved) before.push_back(s.dev.read_page(a));

    Rng rng(mix_seed({s.cfg.seed, kSanitizeRngTag, s.op_counter}));
    DestructionReport report;
    bool verification_failed = false;
    try {
      report = destroy(s.ftl, s.dev, scheme, targets, rng, s.cfg.cost);
    } catch (VerificationFailed& vf) {
      report = std::move(vf.report);
      verification_failed = true;
    }
    s.op_counter += 1;
    save_session(device_path, s);

    if (explain && !as_json) {
      for (std::size_t i = 0; i < resolved.size(); ++i) {
        const ScramblerKey key = page_key(s.cfg.scrambler_config(),
                                          resolved[i].block,
                                          resolved[i].page);
        const BitString before_bits = states_to_bits(before[i]);
        const auto after = s.dev.read_page(resolved[i]);
        out << "page " << resolved[i].block << ':' << resolved[i].page << '\n'
            << "  binary bits    "
            << bits_to_string(descramble(before_bits, key)) << '\n'
            << "  random bits    " << bits_to_string(before_bits) << '\n'
            << "  state mapping  " << join_states(before[i]) << '\n'
            << "  selected state " << join_states(after) << '\n'
            << "  po bits        " << bits_to_string(states_to_bits(after))
            << '\n';
      }
    }
    print_destruction_report(report, as_json, out);
    if (verification_failed) {
      err << "error: destruction verification failed\n";
      return 1;
    }
    return 0;
  }

  if (app.got_subcommand(scan) || app.got_subcommand(verify)) {
    LockFile lock(device_path);
    Session s = load_session(device_path);
    const BitString needle =
        payload_bits_from_flags(payload_text, payload_bits);
    VerifyResult result =
        verify_destruction(s.ftl, s.dev, needle, s.cfg.scrambler_config());
    if (app.got_subcommand(scan)) {
      print_scan_result(result, as_json, out);
      return 0;
    }
    const bool clean = result.unmapped_hits() == 0;
    if (as_json) {
      nlohmann::json j = result.to_json();
      j["verified"] = clean;
      out << j.dump(2) << '\n';
    } else {
      print_scan_result(result, false, out);
      out << (clean ? "destruction verified: no unmapped copies\n"
                    : "destruction NOT verified: unmapped copies remain\n");
    }
    return clean ? 0 : 1;
  }

  if (app.got_subcommand(costs)) {
    cost_params.validate();
    for (const auto& w : cost_params.warnings()) err << "warning: " << w << '\n';
    std::vector<CostScheme> schemes;
    std::stringstream ss(schemes_csv);
    std::string item;
    while (std::getline(ss, item, ','))
      schemes.push_back(parse_cost_scheme(item));
    const CostScenario sc = [&] {
      if (scenario == "gc") return CostScenario::gc;
      if (scenario == "update") return CostScenario::update;
      throw ParseError("scenario must be gc or update, got " + scenario);
    }();
    const auto rows = compare(sc, schemes, m_count, n_count, cost_params);
    if (as_json)
      out << cost_rows_to_json(rows).dump(2) << '\n';
    else
      out << render_cost_table(rows);
    return 0;
  }

  if (app.got_subcommand(dump)) {
    LockFile lock(device_path);
    Session s = load_session(device_path);
    const std::string text_doc = session_to_json(s).dump(2) + "\n";
    if (!dump_out.empty()) {
      std::ofstream f(dump_out, std::ios::binary | std::ios::trunc);
      if (!f) throw Error("cannot write " + dump_out);
      f << text_doc;
    } else {
      out << text_doc;
    }
    return 0;
  }

  if (app.got_subcommand(replay)) {
    LockFile lock(device_path);
    return run_replay(log_path, device_path, as_json, out, err);
  }

  throw Error("no subcommand selected");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  try {
    return execute(args, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nandsan
