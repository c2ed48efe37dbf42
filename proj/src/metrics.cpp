#include "gifrank/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace gifrank {

using nlohmann::json;

template <typename T>
double ap_at_k(std::span<const T> ranked, std::span<const T> relevant, std::size_t k) {
  if (relevant.empty()) throw ValidationError("ap_at_k: relevant set is empty");
  std::set<T> seen;
  for (const auto& r : ranked) {
    if (!seen.insert(r).second) throw ValidationError("ap_at_k: duplicate entry in ranking");
  }
  const std::set<T> rel(relevant.begin(), relevant.end());
  const std::size_t depth = std::min(k, ranked.size());
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (rel.count(ranked[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(rel.size(), k));
}

template double ap_at_k<int>(std::span<const int>, std::span<const int>, std::size_t);
template double ap_at_k<std::string>(std::span<const std::string>, std::span<const std::string>, std::size_t);

double ap_at_k(const std::vector<std::string>& ranked, const std::vector<std::string>& relevant, std::size_t k) {
  return ap_at_k<std::string>(std::span(ranked), std::span(relevant), k);
}

double ap_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, std::size_t k) {
  return ap_at_k<int>(std::span(ranked), std::span(relevant), k);
}

void validate_prediction(const RankedPrediction& p, const LabelVocab& vocab, std::size_t k) {
  if (p.categories.size() != k) {
    throw ValidationError("prediction for idx " + std::to_string(p.idx) + " has " +
                          std::to_string(p.categories.size()) + " categories, expected " + std::to_string(k));
  }
  std::set<std::string_view> seen;
  for (const auto& c : p.categories) {
    if (!seen.insert(c).second) {
      throw ValidationError("prediction for idx " + std::to_string(p.idx) + " repeats '" + c + "'");
    }
    if (!vocab.contains(c)) {
      throw ValidationError("prediction for idx " + std::to_string(p.idx) + " has unknown category '" + c + "'");
    }
  }
}

EvalReport map_at_k(const std::vector<RankedPrediction>& predictions, const Dataset& gold, std::size_t k,
                    const LabelVocab* vocab) {
  std::map<std::int64_t, const RankedPrediction*> by_idx;
  std::vector<std::int64_t> duplicates, extra, missing;
  for (const auto& p : predictions) {
    if (!by_idx.emplace(p.idx, &p).second) duplicates.push_back(p.idx);
  }
  std::set<std::int64_t> gold_ids;
  for (const auto& s : gold.samples) {
    gold_ids.insert(s.idx);
    if (!by_idx.count(s.idx)) missing.push_back(s.idx);
  }
  for (const auto& [idx, p] : by_idx) {
    if (!gold_ids.count(idx)) extra.push_back(idx);
  }
  if (!duplicates.empty() || !extra.empty() || !missing.empty()) {
    auto list = [](const std::vector<std::int64_t>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size() && i < 20; ++i) s += (i ? "," : "") + std::to_string(v[i]);
      if (v.size() > 20) s += ",...";
      return s;
    };
    throw ValidationError("predictions do not match gold: missing [" + list(missing) + "] extra [" + list(extra) +
                          "] duplicate [" + list(duplicates) + "]");
  }

  EvalReport report;
  report.sample_count = gold.size();
  double total = 0.0;
  for (const auto& s : gold.samples) {
    if (!s.categories) throw ValidationError("gold sample idx " + std::to_string(s.idx) + " is unlabeled");
    const RankedPrediction& p = *by_idx.at(s.idx);
    if (vocab) {
      validate_prediction(p, *vocab, k);
    } else if (p.categories.size() != k) {
      throw ValidationError("prediction for idx " + std::to_string(p.idx) + " does not have " + std::to_string(k) +
                            " categories");
    }
    const double ap = ap_at_k(p.categories, *s.categories, k);
    report.per_sample_ap.push_back(ap);
    total += ap;
  }
  report.map_at_6 = gold.empty() ? 0.0 : total / static_cast<double>(gold.size());
  return report;
}

std::vector<ComparisonRow> compare_runs(const std::vector<std::pair<std::string, EvalReport>>& reports) {
  std::vector<ComparisonRow> rows;
  for (const auto& [name, r] : reports) rows.push_back({name, r.map_at_6, 0.0});
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.map_at_6 != b.map_at_6) return a.map_at_6 > b.map_at_6;
    return a.name < b.name;
  });
  if (!rows.empty()) {
    const double best = rows.front().map_at_6;
    for (auto& r : rows) r.delta_vs_best = r.map_at_6 - best;
  }
  return rows;
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s\n", static_cast<int>(width), "model", "MAP@6", "delta");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %+8.4f\n", static_cast<int>(width), r.name.c_str(), r.map_at_6,
                  r.delta_vs_best);
    out += buf;
  }
  return out;
}

std::string predictions_to_jsonl(const std::vector<RankedPrediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    json j = json::object();
    j["idx"] = p.idx;
    j["categories"] = p.categories;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RankedPrediction> parse_predictions(std::string_view text) {
  std::vector<RankedPrediction> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("idx") || !j["idx"].is_number_integer() || !j.contains("categories") ||
        !j["categories"].is_array()) {
      throw SchemaError("predictions line " + std::to_string(line_no) + ": expected {\"idx\": int, \"categories\": [...]}");
    }
    RankedPrediction p;
    p.idx = j["idx"].get<std::int64_t>();
    for (const auto& c : j["categories"]) {
      if (!c.is_string()) throw SchemaError("predictions line " + std::to_string(line_no) + ": non-string category");
      p.categories.push_back(c.get<std::string>());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<RankedPrediction> load_predictions(const std::string& path) { return parse_predictions(read_file(path)); }

std::string report_to_json(const EvalReport& report) {
  json j = json::object();
  j["map_at_6"] = report.map_at_6;
  j["samples"] = report.sample_count;
  j["per_sample_ap"] = report.per_sample_ap;
  return j.dump();
}

}  // namespace gifrank
