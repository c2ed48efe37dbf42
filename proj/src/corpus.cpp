#include "gifrank/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace gifrank {

using nlohmann::json;

namespace {

std::string where(std::size_t line_no) {
  return line_no == 0 ? std::string("record") : "line " + std::to_string(line_no);
}

void check_categories(const std::vector<std::string>& cats, std::size_t line_no) {
  if (cats.empty() || cats.size() > kMaxCategories) {
    throw ValidationError(where(line_no) + ": categories must hold 1 to 6 names, got " +
                          std::to_string(cats.size()));
  }
  std::set<std::string_view> seen;
  for (const auto& c : cats) {
    if (!seen.insert(c).second) {
      throw ValidationError(where(line_no) + ": duplicate category '" + c + "'");
    }
  }
}

}  // namespace

LabelVocab::LabelVocab(std::vector<std::string> names) : names_(std::move(names)) {
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    ids_.emplace(names_[i], static_cast<int>(i));
  }
}

int LabelVocab::id(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) {
    throw ValidationError("unknown category '" + std::string(name) + "'");
  }
  return it->second;
}

bool LabelVocab::contains(std::string_view name) const {
  return ids_.count(std::string(name)) != 0;
}

Sample parse_sample(std::string_view json_line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw ParseError(where(line_no) + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw SchemaError(where(line_no) + ": expected a JSON object");
  }
  Sample s;
  auto require = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) {
      throw SchemaError(where(line_no) + ": missing field '" + key + "'");
    }
    return *it;
  };
  const json& idx = require("idx");
  if (!idx.is_number_integer() || idx.get<std::int64_t>() < 0) {
    throw SchemaError(where(line_no) + ": field 'idx' must be a non-negative integer");
  }
  s.idx = idx.get<std::int64_t>();
  for (const char* key : {"text", "reply"}) {
    const json& v = require(key);
    if (!v.is_string()) {
      throw SchemaError(where(line_no) + ": field '" + key + "' must be a string");
    }
    (key[0] == 't' ? s.text : s.reply) = v.get<std::string>();
  }
  if (auto it = j.find("mp4"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw SchemaError(where(line_no) + ": field 'mp4' must be a string");
    }
    s.mp4 = it->get<std::string>();
  }
  if (auto it = j.find("categories"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) {
      throw SchemaError(where(line_no) + ": field 'categories' must be an array");
    }
    std::vector<std::string> cats;
    for (const auto& c : *it) {
      if (!c.is_string()) {
        throw SchemaError(where(line_no) + ": category names must be strings");
      }
      cats.push_back(c.get<std::string>());
    }
    check_categories(cats, line_no);
    s.categories = std::move(cats);
  }
  return s;
}

Dataset make_dataset(std::vector<Sample> samples) {
  Dataset d;
  d.samples = std::move(samples);
  d.labeled = std::all_of(d.samples.begin(), d.samples.end(),
                          [](const Sample& s) { return s.categories.has_value(); });
  return d;
}

Dataset parse_samples(std::string_view text, bool require_labels) {
  std::vector<Sample> samples;
  std::unordered_set<std::int64_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    Sample s = parse_sample(line, line_no);
    if (!seen.insert(s.idx).second) {
      throw ValidationError(where(line_no) + ": duplicate idx " + std::to_string(s.idx));
    }
    if (require_labels && !s.categories) {
      throw LabelError(where(line_no) + ": sample idx " + std::to_string(s.idx) +
                       " has no categories but labels are required");
    }
    samples.push_back(std::move(s));
  }
  return make_dataset(std::move(samples));
}

Dataset load_samples(const std::string& path, bool require_labels) {
  try {
    return parse_samples(read_file(path), require_labels);
  } catch (const LabelError& e) {
    throw LabelError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string sample_to_json(const Sample& sample) {
  json j = json::object();
  j["idx"] = sample.idx;
  j["text"] = sample.text;
  j["reply"] = sample.reply;
  if (sample.mp4) j["mp4"] = *sample.mp4;
  if (sample.categories) j["categories"] = *sample.categories;
  return j.dump();
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.samples) {
    out += sample_to_json(s);
    out += '\n';
  }
  return out;
}

void save_samples(const Dataset& dataset, const std::string& path) {
  write_file(path, dataset_to_jsonl(dataset));
}

LabelVocab build_label_vocab(const Dataset& dataset) {
  if (!dataset.labeled || dataset.empty()) {
    throw ValidationError("build_label_vocab: dataset is not labeled");
  }
  std::vector<std::string> names;
  for (const auto& s : dataset.samples) {
    names.insert(names.end(), s.categories->begin(), s.categories->end());
  }
  return LabelVocab(std::move(names));
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ValidationError("split_dataset: train_fraction must lie in (0,1)");
  }
  const std::size_t n = dataset.size();
  if (n < 2) {
    throw ValidationError("split_dataset: need at least 2 samples");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  std::vector<Sample> train, val;
  train.reserve(n_train);
  val.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : val).push_back(dataset.samples[order[i]]);
  }
  return {make_dataset(std::move(train)), make_dataset(std::move(val))};
}

Eigen::VectorXi encode_targets(const Sample& sample, const LabelVocab& vocab) {
  if (!sample.categories) {
    throw ValidationError("encode_targets: sample idx " + std::to_string(sample.idx) + " is unlabeled");
  }
  Eigen::VectorXi y = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(vocab.size()));
  for (const auto& c : *sample.categories) y(vocab.id(c)) = 1;
  return y;
}

std::vector<int> gold_ids(const Sample& sample, const LabelVocab& vocab) {
  if (!sample.categories) {
    throw ValidationError("sample idx " + std::to_string(sample.idx) + " is unlabeled");
  }
  std::vector<int> ids;
  for (const auto& c : *sample.categories) ids.push_back(vocab.id(c));
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace gifrank
