#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "gifrank/binio.hpp"
#include "gifrank/common.hpp"
#include "gifrank/corpus.hpp"
#include "gifrank/encoder.hpp"
#include "gifrank/textprep.hpp"

namespace gifrank {

using SparseVec = Eigen::SparseVector<double>;
using Document = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Distances

template <typename Scalar>
struct Distances {
  Scalar euclidean{};
  Scalar manhattan{};
  Scalar cosine{};  // 1 - cos; 1 when either side is the zero vector
};

/// Euclidean, Manhattan and cosine distance between two dense vectors.
template <typename DerivedU, typename DerivedV>
Distances<typename DerivedU::Scalar> distances(const Eigen::MatrixBase<DerivedU>& u,
                                               const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  if (u.size() != v.size()) {
    throw ValidationError("distances: length mismatch (" + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()) + ")");
  }
  Distances<Scalar> d;
  d.euclidean = (u - v).norm();
  d.manhattan = (u - v).template lpNorm<1>();
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) {
    d.cosine = Scalar(1);
  } else {
    // Clamp rounding so identical directions give exactly 0 and the range stays [0,2].
    const Scalar c = std::clamp(u.dot(v) / (nu * nv), Scalar(-1), Scalar(1));
    d.cosine = Scalar(1) - c;
    if (d.cosine < Scalar(1e-15)) d.cosine = Scalar(0);
  }
  return d;
}

// Norms of a dense reference vector, cached for repeated sparse queries.
struct DenseNorms {
  double squared_l2 = 0.0;
  double l1 = 0.0;

  static DenseNorms of(const Eigen::VectorXd& v) { return {v.squaredNorm(), v.lpNorm<1>()}; }
};

// Sparse query against a dense reference. Matches the dense overload up to
// rounding but costs O(nnz).
Distances<double> distances(const SparseVec& u, const Eigen::VectorXd& v, const DenseNorms& v_norms);

// ---------------------------------------------------------------------------
// TF-IDF

class TfIdfModel {
 public:
  /// Smoothed idf ln((1+N)/(1+df)) + 1 over the documents of `corpus`.
  static TfIdfModel fit(const std::vector<Document>& corpus);

  // Raw counts times idf, L2-normalized. Unseen terms are ignored.
  SparseVec transform(const Document& doc) const;

  std::size_t dim() const { return terms_.size(); }
  std::size_t doc_count() const { return doc_count_; }
  // -1 when unseen.
  int column(const std::string& term) const;
  double idf(const std::string& term) const;
  const std::vector<std::string>& terms() const { return terms_; }
  const Eigen::VectorXd& idf_weights() const { return idf_; }

  void write(ByteWriter& w) const;
  static TfIdfModel read(ByteReader& r);

 private:
  std::vector<std::string> terms_;  // byte-sorted; position = column
  std::unordered_map<std::string, int> columns_;
  Eigen::VectorXd idf_;
  std::size_t doc_count_ = 0;
};

// ---------------------------------------------------------------------------
// Skip-gram with negative sampling

struct SgnsConfig {
  std::size_t dim = 64;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  double noise_power = 0.75;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SgnsPairGradient {
  double loss = 0.0;
  Eigen::VectorXd d_center;
  Eigen::MatrixXd d_outputs;  // row 0: context, rows 1..: negatives
};

/// -ln σ(u_c·v) - Σ ln σ(-u_n·v) for center v and output rows
/// [u_c; u_n1; ...], with gradients.
SgnsPairGradient sgns_pair_loss(const Eigen::VectorXd& center, const Eigen::MatrixXd& outputs);

/// Word-level (or sentence-level, when each "token" is a sentence) vectors.
class WordEmbeddings {
 public:
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return terms_.size(); }
  // Writes the vector of `term` into `out` and returns true; false and a
  // zero vector for unseen terms.
  bool lookup(const std::string& term, Eigen::VectorXd& out) const;
  Eigen::VectorXd vector(const std::string& term) const;
  const std::vector<std::string>& terms() const { return terms_; }
  const Eigen::MatrixXd& matrix() const { return vectors_; }
  // Output (context) side of the model, same row order as matrix().
  const Eigen::MatrixXd& context_matrix() const { return contexts_; }
  // v_center · u_context, the logit the model assigns to the pair; 0 if
  // either term is unseen.
  double affinity(const std::string& center, const std::string& context) const;

  void write(ByteWriter& w) const;
  static WordEmbeddings read(ByteReader& r);

 private:
  friend WordEmbeddings train_sgns(const std::vector<Document>&, const SgnsConfig&);
  std::vector<std::string> terms_;
  std::unordered_map<std::string, int> rows_;
  Eigen::MatrixXd vectors_;
  Eigen::MatrixXd contexts_;
};

WordEmbeddings train_sgns(const std::vector<Document>& corpus, const SgnsConfig& config);

struct SubwordConfig {
  SgnsConfig sgns;
  std::uint32_t bucket_count = 1u << 18;
  std::size_t min_n = 3;
  std::size_t max_n = 6;

  void validate() const;
};

/// Character n-grams (by code point) of "<word>" with lengths in [min_n, max_n].
std::vector<std::string> char_ngrams(const std::string& word, std::size_t min_n, std::size_t max_n);

/// fastText-style vectors: a word is the mean of its hashed n-gram buckets
/// plus the bucket of the whole padded word. Buckets never touched in
/// training keep a seed-derived initial value, so only trained rows are
/// stored.
class SubwordEmbeddings {
 public:
  std::size_t dim() const { return dim_; }
  std::uint32_t bucket_count() const { return bucket_count_; }
  std::vector<std::uint32_t> buckets(const std::string& word) const;
  // Always true for a non-empty word.
  bool lookup(const std::string& word, Eigen::VectorXd& out) const;
  Eigen::VectorXd vector(const std::string& word) const;
  Eigen::VectorXd bucket_vector(std::uint32_t bucket) const;
  std::size_t trained_bucket_count() const { return bucket_ids_.size(); }

  void write(ByteWriter& w) const;
  static SubwordEmbeddings read(ByteReader& r);

 private:
  friend SubwordEmbeddings train_subword(const std::vector<Document>&, const SubwordConfig&);
  double init_value(std::uint32_t bucket, std::size_t j) const;

  std::size_t dim_ = 0;
  std::uint32_t bucket_count_ = 1;
  std::size_t min_n_ = 3;
  std::size_t max_n_ = 6;
  std::uint64_t seed_ = 0;
  std::vector<std::uint32_t> bucket_ids_;  // ascending
  std::unordered_map<std::uint32_t, int> bucket_rows_;
  Eigen::MatrixXd rows_;
};

SubwordEmbeddings train_subword(const std::vector<Document>& corpus, const SubwordConfig& config);

/// Mean of the vectors of the tokens the embedding knows; zero when none.
template <typename Embeddings>
Eigen::VectorXd sentence_vector(const Embeddings& emb, const Document& tokens) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(emb.dim()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(emb.dim()));
  std::size_t n = 0;
  for (const auto& t : tokens) {
    if (emb.lookup(t, v)) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? sum : Eigen::VectorXd(sum / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Label centroids

struct LabelCentroids {
  Eigen::MatrixXd centroids;         // K x dim
  std::vector<std::string> warnings;  // one per label without training samples
};

/// Row k = mean of the rows of `vectors` whose sample carries label k.
LabelCentroids build_label_centroids(const Eigen::MatrixXd& vectors, const std::vector<std::vector<int>>& labels,
                                     std::size_t num_labels);
LabelCentroids build_label_centroids(const std::vector<SparseVec>& vectors, std::size_t dim,
                                     const std::vector<std::vector<int>>& labels, std::size_t num_labels);

// ---------------------------------------------------------------------------
// Corpora

struct CorpusOptions {
  NormalizeConfig normalize;  // emoji_mode is forced to strip
  const EmojiLexicon* lexicon = &EmojiLexicon::builtin();
};

// Emoji-stripped, normalized, tokenized field.
Document word_document(const std::string& raw, const CorpusOptions& options = {});
// Emoji-stripped, normalized field as one atomic symbol ("" when empty).
std::string sentence_symbol(const std::string& raw, const CorpusOptions& options = {});

// Two documents per sample: text then reply.
std::vector<Document> build_word_corpus(const Dataset& dataset, const CorpusOptions& options = {});
// One document per sample holding its non-empty text and reply symbols.
std::vector<Document> build_sentence_corpus(const Dataset& dataset, const CorpusOptions& options = {});

// ---------------------------------------------------------------------------
// Statistical features

struct StatisticalFeatures {
  double emoji_count_text = 0, emoji_count_reply = 0;
  double token_count_text = 0, token_count_reply = 0;
  double keyword_weight_text = 0, keyword_weight_reply = 0;
};

// Sum of the `top_k` largest weights of a TF-IDF vector.
double keyword_weight(const SparseVec& v, std::size_t top_k = 3);

StatisticalFeatures statistical_features(const Sample& sample, const EmojiLexicon& lexicon, const TfIdfModel& tfidf,
                                         const CorpusOptions& options = {}, std::size_t top_k = 3);

// ---------------------------------------------------------------------------
// Feature bank

struct FeatureBankConfig {
  SgnsConfig word;
  SgnsConfig sentence{64, 1, 5, 5, 0.025, 0.75, 0};
  SubwordConfig subword;
  std::size_t keyword_top_k = 3;

  void validate() const;
};

struct FeatureVector {
  Eigen::VectorXd values;
  const std::vector<std::string>* schema = nullptr;
};

/// Per-sample vectors shared by every candidate of that sample.
struct SampleVectors {
  // [source][field]: source order tfidf_word, sgns_word, subword_word,
  // sgns_sentence; field order text, reply. tfidf is kept sparse.
  std::array<SparseVec, 2> tfidf;
  std::array<std::array<Eigen::VectorXd, 2>, 3> dense;
  Eigen::VectorXd query_pointwise;
  Eigen::VectorXd query_pairwise;
  StatisticalFeatures stats;
};

const std::vector<std::string>& feature_schema();

class FeatureBank {
 public:
  FeatureBank() = default;

  /// Fits every vector model and centroid on `train` only.
  static FeatureBank fit(const Dataset& train, const LabelVocab& vocab, EncoderModel pointwise, EncoderModel pairwise,
                         const FeatureBankConfig& config, const NormalizeConfig& normalize = {},
                         const EmojiLexicon& lexicon = EmojiLexicon::builtin());

  bool fitted() const { return fitted_; }
  const std::vector<std::string>& schema() const { return feature_schema(); }
  std::size_t num_categories() const { return num_categories_; }

  SampleVectors prepare(const Sample& sample) const;
  Eigen::VectorXd assemble(const SampleVectors& vectors, int candidate) const;
  FeatureVector assemble_features(const Sample& sample, int candidate) const;
  // One row per candidate id 0..K-1.
  Eigen::MatrixXd assemble_all(const Sample& sample) const;

  const TfIdfModel& tfidf() const { return tfidf_; }
  const WordEmbeddings& word_vectors() const { return word_; }
  const WordEmbeddings& sentence_vectors() const { return sentence_; }
  const SubwordEmbeddings& subword_vectors() const { return subword_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  // [source * 2 + field]
  const Eigen::MatrixXd& centroids(std::size_t source, std::size_t field) const {
    return centroids_[source * 2 + field];
  }

  std::uint64_t config_hash = 0;

  std::string save() const;
  // The encoders are stored in their own files and passed back in.
  static FeatureBank load(std::string_view bytes, EncoderModel pointwise, EncoderModel pairwise,
                          const NormalizeConfig& normalize = {}, const EmojiLexicon& lexicon = EmojiLexicon::builtin());

 private:
  void check_ready() const;
  void cache_norms();

  bool fitted_ = false;
  std::size_t num_categories_ = 0;
  std::size_t keyword_top_k_ = 3;
  NormalizeConfig normalize_;
  const EmojiLexicon* lexicon_ = nullptr;
  TfIdfModel tfidf_;
  WordEmbeddings word_;
  WordEmbeddings sentence_;
  SubwordEmbeddings subword_;
  EncoderModel pointwise_;
  EncoderModel pairwise_;
  std::array<Eigen::MatrixXd, 8> centroids_;
  std::array<std::vector<DenseNorms>, 2> tfidf_norms_;
  std::vector<std::string> warnings_;
};

// Tab-separated feature table: idx, candidate, relevance, then one column per
// schema name.
std::string features_to_tsv(const std::vector<std::string>& schema, const std::vector<std::int64_t>& idx,
                            const std::vector<int>& candidates, const std::vector<int>& relevance,
                            const Eigen::MatrixXd& rows);

}  // namespace gifrank
