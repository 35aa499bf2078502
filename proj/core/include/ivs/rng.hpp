#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ivs {

using Rng = std::mt19937_64;

// Independent stream for (seed, tags...). Every stochastic component takes
// its own stream so that adding draws in one place never shifts another.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * tags.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto t : tags) push(t);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double sd) {
  if (sd <= 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sd)(rng);
}

// Stream tags, kept in one place so collisions are visible.
namespace stream {
inline constexpr std::uint64_t board = 0x626f617264;
inline constexpr std::uint64_t perception = 0x70657263;
inline constexpr std::uint64_t actuator = 0x61637475;
inline constexpr std::uint64_t demo = 0x64656d6f;
inline constexpr std::uint64_t demo_start = 0x73746172;
inline constexpr std::uint64_t neighbors = 0x6e656967;
inline constexpr std::uint64_t init = 0x696e6974;
inline constexpr std::uint64_t split = 0x73706c74;
inline constexpr std::uint64_t shuffle = 0x73687566;
inline constexpr std::uint64_t dropout = 0x64726f70;
inline constexpr std::uint64_t trial = 0x7472696c;
inline constexpr std::uint64_t observer = 0x6f627376;
inline constexpr std::uint64_t augment = 0x61756774;
}  // namespace stream

}  // namespace ivs
