#include "ivs/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ivs/errors.hpp"
#include "json_io.hpp"

namespace ivs {

using detail::json;

namespace {

InstrumentParams params_of(const InstrumentModel& m) {
  return {m.deadband, m.scale, m.offset, m.noise_sd};
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Pose2 pose_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json to_json(const Config& c) {
  json inst = json::object();
  for (const auto& [name, p] : c.instruments)
    inst[name] = {{"deadband", p.deadband}, {"scale", p.scale}, {"offset", p.offset}, {"noise_sd", p.noise_sd}};
  json rates = json::object();
  for (const auto& [k, r] : c.timing.servo_rate_hz) rates[std::to_string(k)] = r;
  const auto& d = c.demo;
  return {
      {"camera",
       {{"mm_per_px", c.camera.mm_per_px},
        {"frame_w", c.camera.frame_w},
        {"frame_h", c.camera.frame_h},
        {"origin", {c.camera.origin.x, c.camera.origin.y}}}},
      {"instruments", inst},
      {"hyper", detail::to_json(c.hyper)},
      {"demo",
       {{"start_radius", d.start_radius},
        {"speed", d.speed},
        {"lateral_noise_sd", d.lateral_noise_sd},
        {"dwell_frames", d.dwell_frames},
        {"capture_rate", d.capture_rate},
        {"react_frames", d.react_frames},
        {"ramp_frames", d.ramp_frames},
        {"arrive_tolerance", d.arrive_tolerance},
        {"max_frames", d.max_frames},
        {"grip_jitter", d.grip_jitter}}},
      {"timing",
       {{"pick_approach", c.timing.pick_approach},
        {"grasp", c.timing.grasp},
        {"place_approach", c.timing.place_approach},
        {"release", c.timing.release},
        {"servo_rate_hz", rates}}},
      {"training",
       {{"learning_rate", c.training.learning_rate},
        {"momentum", c.training.momentum},
        {"batch_size", c.training.batch_size},
        {"epochs", c.training.epochs},
        {"train_fraction", c.training.train_fraction},
        {"augment", c.training.augment}}},
      {"perception",
       {{"block_sd", c.perception.block_sd}, {"peg_sd", c.perception.peg_sd}, {"rate_hz", c.perception.rate_hz}}},
      {"max_steps", c.max_steps},
      {"observer_rollouts", c.observer_rollouts},
      {"demos_per_peg", c.demos_per_peg},
  };
}

void apply_overrides(Config& c, const json& j) {
  static const std::set<std::string> known{"camera", "instruments", "hyper", "demo", "timing", "training",
                                           "perception", "max_steps", "observer_rollouts", "demos_per_peg"};
  if (!j.is_object()) throw Error("config: top level must be an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw Error("config: unknown key '" + key + "'");
  if (j.contains("camera")) {
    const auto& k = j["camera"];
    read_if(k, "mm_per_px", c.camera.mm_per_px);
    read_if(k, "frame_w", c.camera.frame_w);
    read_if(k, "frame_h", c.camera.frame_h);
    if (k.contains("origin")) c.camera.origin = pose_of(k["origin"]);
  }
  if (j.contains("instruments")) {
    for (const auto& [name, v] : j["instruments"].items()) {
      InstrumentParams p = c.instruments.count(name) ? c.instruments[name] : InstrumentParams{};
      read_if(v, "deadband", p.deadband);
      read_if(v, "scale", p.scale);
      read_if(v, "offset", p.offset);
      read_if(v, "noise_sd", p.noise_sd);
      c.instruments[name] = p;
    }
  }
  if (j.contains("hyper")) detail::update_from(c.hyper, j["hyper"]);
  if (j.contains("demo")) {
    const auto& k = j["demo"];
    auto& d = c.demo;
    read_if(k, "start_radius", d.start_radius);
    read_if(k, "speed", d.speed);
    read_if(k, "lateral_noise_sd", d.lateral_noise_sd);
    read_if(k, "dwell_frames", d.dwell_frames);
    read_if(k, "capture_rate", d.capture_rate);
    read_if(k, "react_frames", d.react_frames);
    read_if(k, "ramp_frames", d.ramp_frames);
    read_if(k, "arrive_tolerance", d.arrive_tolerance);
    read_if(k, "max_frames", d.max_frames);
    read_if(k, "grip_jitter", d.grip_jitter);
  }
  if (j.contains("timing")) {
    const auto& k = j["timing"];
    read_if(k, "pick_approach", c.timing.pick_approach);
    read_if(k, "grasp", c.timing.grasp);
    read_if(k, "place_approach", c.timing.place_approach);
    read_if(k, "release", c.timing.release);
    if (k.contains("servo_rate_hz")) {
      c.timing.servo_rate_hz.clear();
      for (const auto& [kk, r] : k["servo_rate_hz"].items()) c.timing.servo_rate_hz[std::stoi(kk)] = r.get<double>();
    }
  }
  if (j.contains("training")) {
    const auto& k = j["training"];
    read_if(k, "learning_rate", c.training.learning_rate);
    read_if(k, "momentum", c.training.momentum);
    read_if(k, "batch_size", c.training.batch_size);
    read_if(k, "epochs", c.training.epochs);
    read_if(k, "train_fraction", c.training.train_fraction);
    read_if(k, "augment", c.training.augment);
  }
  if (j.contains("perception")) {
    const auto& k = j["perception"];
    read_if(k, "block_sd", c.perception.block_sd);
    read_if(k, "peg_sd", c.perception.peg_sd);
    read_if(k, "rate_hz", c.perception.rate_hz);
  }
  read_if(j, "max_steps", c.max_steps);
  read_if(j, "observer_rollouts", c.observer_rollouts);
  read_if(j, "demos_per_peg", c.demos_per_peg);
}

}  // namespace

Config::Config() {
  for (const char* n : {"A", "B", "C"}) instruments[n] = params_of(make_instrument(n));
}

InstrumentModel Config::instrument(const std::string& name) const {
  auto it = instruments.find(name);
  if (it == instruments.end()) throw Error("unknown instrument '" + name + "'");
  const auto& p = it->second;
  return make_custom_instrument(name, p.deadband, p.scale, p.offset, p.noise_sd);
}

void Config::validate() const {
  if (!camera.valid()) throw Error("config: invalid camera");
  for (const auto& [name, _] : instruments) instrument(name);
  hyper.validate();
  demo.validate();
  timing.validate();
  training.validate();
  if (!(perception.block_sd >= 0.0 && perception.peg_sd >= 0.0 && perception.rate_hz > 0.0))
    throw Error("config: invalid perception noise");
  if (max_steps < 1) throw Error("config: max_steps must be >= 1");
  if (observer_rollouts < 2) throw Error("config: observer_rollouts must be >= 2");
  if (demos_per_peg < 2) throw Error("config: demos_per_peg must be >= 2");
}

Config config_from_json(const std::string& text) {
  Config c;
  try {
    apply_overrides(c, json::parse(text));
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return config_from_json(ss.str());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string canonical_json(const Config& cfg) { return to_json(cfg).dump(); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const Config& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json(cfg))));
  return buf;
}

}  // namespace ivs
