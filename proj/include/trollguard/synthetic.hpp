#pragma once

#include <cstdint>
#include <vector>

#include "trollguard/corpus.hpp"

namespace trollguard::synthetic {

struct BenchmarkConfig {
  std::size_t size = 2000;
  double troll_rate = 0.03;
  std::uint64_t seed = 2020;
};

/// Template-generated labelled tweets. Troll tweets draw on the shipped trolling
/// hashtag categories and tropes; non-troll tweets are health news, advice and
/// chatter, some of which share vocabulary with the trolls (China, Trump,
/// medicine, negative sentiment). Exactly round(size * troll_rate) trolls,
/// shuffled into the corpus.
std::vector<TweetRecord> generate_benchmark(const BenchmarkConfig& config = {});

}  // namespace trollguard::synthetic
