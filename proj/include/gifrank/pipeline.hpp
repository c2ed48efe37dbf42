#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gifrank/boostrank.hpp"
#include "gifrank/common.hpp"
#include "gifrank/corpus.hpp"
#include "gifrank/encoder.hpp"
#include "gifrank/featbank.hpp"
#include "gifrank/metrics.hpp"
#include "gifrank/synthetic.hpp"
#include "gifrank/textprep.hpp"

namespace gifrank {

inline constexpr std::uint32_t kArtifactFormatVersion = 1;

/// Missing or stale pipeline artifact.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

enum class Backend { kReranker, kPairwise, kPointwise };
std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);

struct PipelinePaths {
  std::string train;   // labeled line-JSON
  std::string target;  // unlabeled line-JSON to predict
  std::string artifacts = "artifacts";
  std::string predictions;  // default: <artifacts>/predictions.jsonl
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  PipelinePaths paths;
  double train_fraction = 0.9;
  NormalizeConfig normalize;
  std::string emoji_lexicon;  // TSV path; empty selects the builtin table
  EncoderConfig pointwise;
  EncoderConfig pairwise;
  FeatureBankConfig features;
  std::size_t reranker_negatives_per_positive = 4;
  TreeParams reranker;
  HpoSpace hpo;
  Backend backend = Backend::kReranker;
  SyntheticSpec synthetic;

  // Hash of every setting except paths and the prediction backend.
  std::uint64_t hash() const;
  // Copy with every per-stage seed derived from `seed`.
  PipelineConfig resolved() const;
  std::filesystem::path artifact_dir() const { return paths.artifacts; }
  void validate() const;
};

/// JSON (comments allowed). Unknown keys and type errors raise SchemaError
/// naming the field path, e.g. "encoder.pairwise.lr0".
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::string& path);
// Without run options, paths and the predict section are left out.
std::string config_to_json(const PipelineConfig& config, bool include_run_options = true);

std::string hash_hex(std::uint64_t h);

/// Exclusive writer lock on an artifact directory (a `.lock` file created
/// with O_EXCL, removed on destruction).
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Feature table produced by build-features, parsed back into groups.
RankingMatrix parse_feature_table(std::string_view tsv);

// ---------------------------------------------------------------------------
// Stages. Each reads and writes the artifact directory of `config`; the
// caller holds the DirectoryLock.

struct PreprocessSummary {
  std::size_t train = 0;
  std::size_t val = 0;
  LabelVocab vocab;
};

struct FeatureSummary {
  std::size_t train_rows = 0;
  std::size_t val_rows = 0;
  std::size_t dropped_groups = 0;
  std::vector<std::string> warnings;
};

PreprocessSummary run_preprocess(const PipelineConfig& config, std::ostream* log = nullptr);
EncoderTrainResult run_train_encoder(const PipelineConfig& config, TrainMode mode, std::ostream* log = nullptr);
FeatureSummary run_build_features(const PipelineConfig& config, std::ostream* log = nullptr);
// With `use_hpo`, tree parameters come from the hpo stage's best trial.
GbdtResult run_train_reranker(const PipelineConfig& config, bool use_hpo = false, std::ostream* log = nullptr);
std::vector<RankedPrediction> run_predict(const PipelineConfig& config, const std::string& input,
                                          const std::string& output, Backend backend, std::ostream* log = nullptr);
HpoResult run_hpo(const PipelineConfig& config, std::ostream* log = nullptr);
EvalReport run_evaluate(const std::string& predictions, const std::string& gold);

/// Writes <dir>/train.jsonl (labeled), <dir>/target.jsonl (labels
/// removed) and <dir>/target_gold.jsonl from one generated dataset.
void run_synth(const SyntheticSpec& spec, std::size_t target_count, const std::filesystem::path& dir);

struct CascadeReport {
  std::vector<RankedPrediction> predictions;
  double val_map_pointwise = 0.0;
  double val_map_pairwise = 0.0;
  std::optional<double> val_map_reranker;  // unset when the backend skips it
};

/// preprocess -> both encoders -> features -> reranker -> predict, under
/// one lock. Reranker stages are skipped unless the backend needs them.
CascadeReport run_cascade(const PipelineConfig& config, std::ostream* log = nullptr);

}  // namespace gifrank
