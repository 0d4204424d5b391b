#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nandsan/cell_model.hpp"
#include "nandsan/codec.hpp"
#include "nandsan/cost_model.hpp"
#include "nandsan/nand_device.hpp"

namespace nandsan {

// Everything a run needs to be reproducible from the dump file alone.
struct RunConfig {
  Geometry geometry{};
  std::uint64_t seed = 1;
  ScramblerMode scrambler = ScramblerMode::xor_keystream;
  EccParams ecc{};
  DdpParams ddp{0.5, 0};  // k = 0 means calibrate on demand
  double ddp_target_fail_prob = 1e-4;
  PulseParams pulse{};
  CostParams cost{};

  ScramblerConfig scrambler_config() const { return {scrambler, seed}; }

  // Throws ConfigError on invariant violations; returns advisory notes.
  std::vector<std::string> validate() const;

  nlohmann::json to_json() const;
  // Rejects unknown keys. Missing keys keep their defaults.
  static RunConfig from_json(const nlohmann::json& j);
};

}  // namespace nandsan
