#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "ivs/actuator.hpp"
#include "ivs/control.hpp"
#include "ivs/datapipe.hpp"
#include "ivs/policy.hpp"
#include "ivs/render.hpp"
#include "ivs/supervisor.hpp"

namespace ivs {

struct InstrumentParams {
  std::array<double, 2> deadband{0.0, 0.0};
  std::array<double, 2> scale{1.0, 1.0};
  std::array<double, 2> offset{0.0, 0.0};
  double noise_sd = 0.0;
};

// Every tunable of the pipeline. JSON files may override any subset; keys
// not present keep their defaults.
struct Config {
  Camera camera;
  std::map<std::string, InstrumentParams> instruments;  // presets A, B, C by default
  Hyperparameters hyper;
  DemoProfile demo;
  TimingModel timing;
  TrainingConfig training;
  PerceptionNoise perception;
  int max_steps = 50;
  int observer_rollouts = 40;
  int demos_per_peg = kDemosPerPeg;

  Config();
  InstrumentModel instrument(const std::string& name) const;
  void validate() const;
};

Config config_from_json(const std::string& text);
Config load_config(const std::filesystem::path& path);
// Canonical form: sorted keys, shortest round-trip number formatting.
std::string canonical_json(const Config& cfg);
// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const Config& cfg);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ivs
