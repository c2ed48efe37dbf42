#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gifrank/corpus.hpp"

namespace gifrank {

inline constexpr std::size_t kCutoff = 6;

struct RankedPrediction {
  std::int64_t idx = 0;
  std::vector<std::string> categories;

  bool operator==(const RankedPrediction&) const = default;
};

struct EvalReport {
  double map_at_6 = 0.0;
  std::vector<double> per_sample_ap;  // in gold-file order
  std::size_t sample_count = 0;
};

/// Average precision truncated at k, normalized by min(|relevant|, k).
/// Throws ValidationError on duplicate ranked entries or an empty relevant set.
template <typename T>
double ap_at_k(std::span<const T> ranked, std::span<const T> relevant, std::size_t k);

double ap_at_k(const std::vector<std::string>& ranked, const std::vector<std::string>& relevant,
               std::size_t k = kCutoff);
double ap_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, std::size_t k = kCutoff);

/// Mean AP@k over the gold samples. Every gold idx needs exactly one
/// prediction of exactly k distinct names from `vocab` (when given).
EvalReport map_at_k(const std::vector<RankedPrediction>& predictions, const Dataset& gold, std::size_t k = kCutoff,
                    const LabelVocab* vocab = nullptr);

// Throws ValidationError unless the prediction has exactly k distinct
// entries, all in the vocabulary.
void validate_prediction(const RankedPrediction& p, const LabelVocab& vocab, std::size_t k = kCutoff);

struct ComparisonRow {
  std::string name;
  double map_at_6 = 0.0;
  double delta_vs_best = 0.0;
};

std::vector<ComparisonRow> compare_runs(const std::vector<std::pair<std::string, EvalReport>>& reports);
std::string format_comparison(const std::vector<ComparisonRow>& rows);

// Line-JSON {"idx": int, "categories": [...]}.
std::string predictions_to_jsonl(const std::vector<RankedPrediction>& predictions);
std::vector<RankedPrediction> parse_predictions(std::string_view text);
std::vector<RankedPrediction> load_predictions(const std::string& path);

std::string report_to_json(const EvalReport& report);

}  // namespace gifrank
