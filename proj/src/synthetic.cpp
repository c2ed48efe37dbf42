#include "gifrank/synthetic.hpp"

#include <array>
#include <cctype>
#include <numeric>
#include <set>

#include "gifrank/common.hpp"
#include "gifrank/metrics.hpp"

namespace gifrank {

namespace {

constexpr std::array<double, 6> kLabelCountWeights = {0.40, 0.25, 0.15, 0.10, 0.06, 0.04};
constexpr std::array<const char*, 8> kEmoji = {"😂", "❤️", "😭", "🔥", "👍", "😍", "🙄", "🎉"};

std::string pseudo_word(Rng& rng, std::size_t syllables) {
  static constexpr std::string_view kOnset = "bdfghklmnprstvz";
  static constexpr std::string_view kVowel = "aeiou";
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w += kOnset[rng.uniform_index(kOnset.size())];
    w += kVowel[rng.uniform_index(kVowel.size())];
  }
  return w;
}

std::size_t draw_label_count(Rng& rng, std::size_t cap) {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t n = kLabelCountWeights.size();
  for (std::size_t i = 0; i < kLabelCountWeights.size(); ++i) {
    acc += kLabelCountWeights[i];
    if (u < acc) {
      n = i + 1;
      break;
    }
  }
  return std::min(n, cap);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_labels < 7) throw ValidationError("synthetic: need at least 7 labels so top-6 is a strict cutoff");
  if (num_labels > 1000) throw ValidationError("synthetic: at most 1000 labels");
  if (num_samples == 0) throw ValidationError("synthetic: num_samples must be positive");
  if (!(strength >= 0.0 && strength <= 1.0)) throw ValidationError("synthetic: strength must be in [0, 1]");
  if (!(emoji_rate >= 0.0 && emoji_rate <= 1.0)) throw ValidationError("synthetic: emoji_rate must be in [0, 1]");
  if (vocab_size == 0 || signature_tokens == 0) {
    throw ValidationError("synthetic: vocab_size and signature_tokens must be positive");
  }
}

SyntheticVocab synthetic_vocab(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "synthetic.vocab"));
  SyntheticVocab v;
  const std::size_t width = std::max<std::size_t>(2, std::to_string(spec.num_labels - 1).size());
  for (std::size_t k = 0; k < spec.num_labels; ++k) {
    std::string id = std::to_string(k);
    v.labels.push_back("label_" + std::string(width - id.size(), '0') + id);
  }
  std::set<std::string> used;
  auto fresh = [&](std::size_t syllables) {
    for (;;) {
      std::string w = pseudo_word(rng, syllables);
      if (used.insert(w).second) return w;
    }
  };
  v.signatures.resize(spec.num_labels);
  for (auto& sig : v.signatures) {
    for (std::size_t i = 0; i < spec.signature_tokens; ++i) sig.push_back(fresh(3));
  }
  for (std::size_t i = 0; i < spec.vocab_size; ++i) v.noise.push_back(fresh(2 + rng.uniform_index(2)));
  return v;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  const SyntheticVocab vocab = synthetic_vocab(spec);
  Rng rng(derive_seed(spec.seed, "synthetic.samples"));
  std::vector<int> all(spec.num_labels);
  std::iota(all.begin(), all.end(), 0);

  std::vector<Sample> samples;
  samples.reserve(spec.num_samples);
  for (std::size_t i = 0; i < spec.num_samples; ++i) {
    const std::size_t n_gold = draw_label_count(rng, spec.num_labels);
    rng.shuffle(all);
    std::vector<int> gold(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_gold));

    std::size_t cursor = 0;
    auto fill = [&](std::size_t slots) {
      std::vector<std::string> words;
      for (std::size_t s = 0; s < slots; ++s) {
        if (rng.uniform01() < spec.strength) {
          const auto& sig = vocab.signatures[gold[cursor++ % gold.size()]];
          words.push_back(sig[rng.uniform_index(sig.size())]);
        } else {
          words.push_back(vocab.noise[rng.uniform_index(vocab.noise.size())]);
        }
      }
      return words;
    };
    std::vector<std::string> text = fill(8 + rng.uniform_index(7));
    std::vector<std::string> reply = fill(3 + rng.uniform_index(5));

    // surface noise that the normalizer is expected to absorb
    if (rng.uniform01() < 0.5) text[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0][0])));
    if (rng.uniform01() < 0.15) text.insert(text.begin(), "@user" + std::to_string(rng.uniform_index(1000)));
    if (rng.uniform01() < 0.1) text.push_back("https://t.co/" + pseudo_word(rng, 3));
    if (rng.uniform01() < 0.15) reply.push_back(std::to_string(rng.uniform_index(10000)));
    if (rng.uniform01() < spec.emoji_rate) reply.push_back(kEmoji[rng.uniform_index(kEmoji.size())]);
    if (rng.uniform01() < 0.3) reply.back() += rng.uniform01() < 0.5 ? "!" : "?";

    Sample s;
    s.idx = static_cast<std::int64_t>(i);
    for (const auto& w : text) s.text += (s.text.empty() ? "" : " ") + w;
    for (const auto& w : reply) s.reply += (s.reply.empty() ? "" : " ") + w;
    std::vector<std::string> cats;
    for (int g : gold) cats.push_back(vocab.labels[g]);
    s.categories = std::move(cats);
    samples.push_back(std::move(s));
  }
  return make_dataset(std::move(samples));
}

double chance_map_at_6(const Dataset& gold, std::size_t num_labels, std::uint64_t seed, std::size_t reps) {
  if (gold.empty() || reps == 0) throw ValidationError("chance_map_at_6: need samples and at least one repetition");
  Rng rng(derive_seed(seed, "synthetic.chance"));
  std::vector<std::string> order;
  double total = 0.0;
  for (const auto& s : gold.samples) {
    if (!s.categories) throw LabelError("chance_map_at_6: sample " + std::to_string(s.idx) + " has no labels");
    // labels are exchangeable under a random ranking, so only |gold| matters
    std::vector<int> relevant(s.categories->size());
    std::iota(relevant.begin(), relevant.end(), 0);
    std::vector<int> ranking(num_labels);
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      std::iota(ranking.begin(), ranking.end(), 0);
      rng.shuffle(ranking);
      ranking.resize(std::min<std::size_t>(kCutoff, num_labels));
      sum += ap_at_k(ranking, relevant, kCutoff);
      ranking.resize(num_labels);
    }
    total += sum / static_cast<double>(reps);
  }
  return total / static_cast<double>(gold.size());
}

}  // namespace gifrank
