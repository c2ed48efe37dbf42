#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gifrank/common.hpp"
#include "gifrank/corpus.hpp"
#include "gifrank/textprep.hpp"

namespace gifrank {

enum class TrainMode : std::uint8_t { kPointwise = 0, kPairwise = 1 };

std::string_view mode_name(TrainMode mode);
TrainMode parse_mode(std::string_view name);

struct EncoderConfig {
  std::size_t token_dim = 128;
  std::size_t category_dim = 128;
  std::size_t vocab_size = 50000;  // cap, including the OOV row
  double margin = 1.0;
  std::size_t negatives_per_positive = 4;
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double lr0 = 3e-5;
  double lr_decay = 0.1;
  std::size_t lr_step_epochs = 10;
  std::uint64_t seed = 0;
  double init_scale = 0.05;

  void validate() const;
};

/// Token string -> embedding row. Row 0 is reserved for out-of-vocabulary
/// tokens.
class TokenIndex {
 public:
  static constexpr int kOov = 0;
  static constexpr std::string_view kOovToken = "<oov>";

  TokenIndex();
  // Most frequent tokens first (ties by byte order), at most `capacity`
  // rows including OOV.
  static TokenIndex build(const std::vector<TokenizedText>& corpus, std::size_t capacity);
  static TokenIndex from_tokens(std::vector<std::string> tokens);

  int lookup(std::string_view token) const;
  std::vector<int> lookup(const TokenizedText& text) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> rows_;
};

struct EncoderModel {
  TokenIndex token_index;
  Eigen::MatrixXd token_embeddings;     // vocab x token_dim
  Eigen::MatrixXd category_embeddings;  // K x category_dim
  Eigen::MatrixXd projection;           // token_dim x category_dim
  TrainMode mode = TrainMode::kPairwise;
  std::uint64_t config_hash = 0;

  std::size_t num_categories() const { return static_cast<std::size_t>(category_embeddings.rows()); }
  std::size_t query_dim() const { return static_cast<std::size_t>(projection.cols()); }
  bool all_finite() const {
    return token_embeddings.allFinite() && category_embeddings.allFinite() && projection.allFinite();
  }
};

/// Fresh model with uniform(-init_scale, init_scale) parameters.
EncoderModel init_encoder(TokenIndex index, std::size_t num_categories, const EncoderConfig& config);

// projectionᵀ · mean(token rows); zero for an empty pair.
Eigen::VectorXd encode_pair(const EncoderModel& model, const TokenizedText& pair);
Eigen::VectorXd encode_ids(const EncoderModel& model, const std::vector<int>& ids);

double score(const EncoderModel& model, const Eigen::VectorXd& query, int category);
Eigen::VectorXd score_all(const EncoderModel& model, const Eigen::VectorXd& query);

/// k distinct ids drawn uniformly from [0, K) minus `gold`.
std::vector<int> sample_negatives(const std::vector<int>& gold, std::size_t num_categories, std::size_t k, Rng& rng);

struct PointwiseLoss {
  double loss;
  double d_score;
};
PointwiseLoss pointwise_loss(double s, int y);

struct PairwiseLoss {
  double loss;
  double d_pos;
  double d_neg;
};
PairwiseLoss pairwise_loss(double s_pos, double s_neg, double margin);

double lr_at_epoch(const EncoderConfig& config, std::size_t epoch);

/// Parameter gradients with the same shapes as the model matrices.
struct EncoderGradients {
  Eigen::MatrixXd token_embeddings;
  Eigen::MatrixXd category_embeddings;
  Eigen::MatrixXd projection;

  explicit EncoderGradients(const EncoderModel& model);
  void set_zero();
};

// Loss of one pointwise example; adds scale·∂loss/∂θ to `grads`.
double accumulate_pointwise(const EncoderModel& model, const std::vector<int>& ids, int category, int label,
                            double scale, EncoderGradients& grads);
// Loss of one triplet; adds scale·∂loss/∂θ to `grads`.
double accumulate_pairwise(const EncoderModel& model, const std::vector<int>& ids, int positive, int negative,
                           double margin, double scale, EncoderGradients& grads);

/// One training query: the paired token sequence and its gold category ids.
struct LabeledPair {
  TokenizedText pair;
  std::vector<int> gold;
};

std::vector<LabeledPair> make_labeled_pairs(const Dataset& dataset, const LabelVocab& vocab,
                                            const NormalizeConfig& normalize_config = {},
                                            const EmojiLexicon& lexicon = EmojiLexicon::builtin());

struct EncoderEpoch {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double val_map = 0.0;
};

struct EncoderTrainResult {
  EncoderModel model;
  std::vector<EncoderEpoch> history;
  std::size_t best_epoch = 0;
};

/// Adam-trained pointwise or pairwise encoder. Keeps the epoch with the
/// best validation MAP@6 (the last epoch when `val` is empty).
EncoderTrainResult train_encoder(EncoderModel model, const std::vector<LabeledPair>& train,
                                 const std::vector<LabeledPair>& val, TrainMode mode, const EncoderConfig& config);

double encoder_map(const EncoderModel& model, const std::vector<LabeledPair>& data, std::size_t k = 6);

// Category ids sorted by score descending, ties by ascending id.
std::vector<int> top_k_ids(const Eigen::VectorXd& scores, std::size_t k);

std::vector<std::string> predict_topk(const EncoderModel& model, const Sample& sample, const LabelVocab& vocab,
                                      std::size_t k, const NormalizeConfig& normalize_config = {},
                                      const EmojiLexicon& lexicon = EmojiLexicon::builtin());

std::string save_encoder(const EncoderModel& model);
EncoderModel load_encoder(std::string_view bytes);

}  // namespace gifrank
