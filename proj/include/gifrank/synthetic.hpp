#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gifrank/corpus.hpp"

namespace gifrank {

struct SyntheticSpec {
  std::size_t num_samples = 4096;
  std::size_t num_labels = 20;
  // Probability that a word slot carries a signature token of a gold label.
  double strength = 0.6;
  std::size_t vocab_size = 500;  // noise words
  std::size_t signature_tokens = 6;
  double emoji_rate = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticVocab {
  std::vector<std::string> labels;                   // "label_00", ...
  std::vector<std::vector<std::string>> signatures;  // per label, disjoint
  std::vector<std::string> noise;
};

SyntheticVocab synthetic_vocab(const SyntheticSpec& spec);

/// Labeled samples with idx 0..N-1. Gold sets hold 1-6 labels drawn
/// uniformly without replacement.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Expected MAP@6 of a uniformly random ranking of all K labels for the
/// given gold sets, estimated by `reps` seeded shuffles per sample.
double chance_map_at_6(const Dataset& gold, std::size_t num_labels, std::uint64_t seed, std::size_t reps = 200);

}  // namespace gifrank
