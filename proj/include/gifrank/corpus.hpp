#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gifrank/common.hpp"

namespace gifrank {

inline constexpr std::size_t kMaxCategories = 6;

/// One two-turn thread. `mp4` is carried for schema fidelity and never read.
struct Sample {
  std::int64_t idx = 0;
  std::string text;
  std::string reply;
  std::optional<std::string> mp4;
  std::optional<std::vector<std::string>> categories;

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::vector<Sample> samples;
  bool labeled = false;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  bool operator==(const Dataset&) const = default;
};

/// Fixed category list; ids follow byte order of the names.
class LabelVocab {
 public:
  LabelVocab() = default;
  explicit LabelVocab(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t id) const { return names_.at(id); }

  // Throws ValidationError naming the label when it is not in the vocabulary.
  int id(std::string_view name) const;
  bool contains(std::string_view name) const;

  bool operator==(const LabelVocab& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

// Parsing. Errors carry the 1-based line number.
Sample parse_sample(std::string_view json_line, std::size_t line_no = 0);
Dataset parse_samples(std::string_view text, bool require_labels);
Dataset load_samples(const std::string& path, bool require_labels);

std::string sample_to_json(const Sample& sample);
std::string dataset_to_jsonl(const Dataset& dataset);
void save_samples(const Dataset& dataset, const std::string& path);

LabelVocab build_label_vocab(const Dataset& dataset);

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, const SplitSpec& spec);

// Multi-hot relevance over the vocabulary.
Eigen::VectorXi encode_targets(const Sample& sample, const LabelVocab& vocab);

// Gold category ids of a labeled sample, ascending.
std::vector<int> gold_ids(const Sample& sample, const LabelVocab& vocab);

Dataset make_dataset(std::vector<Sample> samples);

}  // namespace gifrank
