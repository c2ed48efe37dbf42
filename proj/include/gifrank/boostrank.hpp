#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gifrank/common.hpp"

namespace gifrank {

/// Candidate rows grouped by query. Rows of one group are contiguous.
struct RankingMatrix {
  Eigen::MatrixXd features;           // rows x F
  Eigen::VectorXi relevance;          // 0/1 per row
  std::vector<int> candidates;        // category id per row
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  std::vector<std::int64_t> group_idx;                      // sample idx per group
  std::vector<std::string> schema;
  std::size_t dropped_groups = 0;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
  void validate() const;
};

/// Accumulates groups into a RankingMatrix. Groups without both a positive
/// and a negative row (or with fewer than 2 rows) are dropped and counted.
class RankingBuilder {
 public:
  explicit RankingBuilder(std::vector<std::string> schema);

  // Returns false when the group was dropped.
  bool add_group(std::int64_t idx, const std::vector<int>& candidates, const std::vector<int>& relevance,
                 const Eigen::MatrixXd& rows);
  // Keeps groups regardless of label mix (prediction-time matrices).
  void add_group_unchecked(std::int64_t idx, const std::vector<int>& candidates, const std::vector<int>& relevance,
                           const Eigen::MatrixXd& rows);
  RankingMatrix finish();

 private:
  RankingMatrix m_;
  std::vector<double> values_;
  std::vector<int> relevance_;
};

// ---------------------------------------------------------------------------
// Pairwise objective

struct PairwiseGradients {
  Eigen::VectorXd gradient;
  Eigen::VectorXd hessian;
};

/// RankNet logistic forces over every (better, worse) pair of each group:
/// λ = -1 / (1 + e^{s_i - s_j}); hessian ρ(1-ρ) with ρ = -λ. With
/// `map_weighted`, each pair is scaled by |ΔAP@6| of swapping the two rows
/// in the current ranking.
PairwiseGradients pairwise_gradients(const Eigen::VectorXd& scores, const Eigen::VectorXi& relevance,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& groups,
                                     bool map_weighted = false);

/// Σ ln(1 + e^{-(s_i - s_j)}) over the same pairs.
double pairwise_logistic_loss(const Eigen::VectorXd& scores, const Eigen::VectorXi& relevance,
                              const std::vector<std::pair<std::size_t, std::size_t>>& groups);

// ---------------------------------------------------------------------------
// Trees

struct TreeParams {
  std::size_t max_depth = 6;
  std::size_t min_samples_leaf = 20;
  std::size_t num_trees = 200;
  double shrinkage = 0.1;
  std::size_t histogram_bins = 64;
  std::size_t early_stopping_rounds = 30;
  bool map_weighted = false;

  void validate() const;
  bool operator==(const TreeParams&) const = default;
};

inline constexpr double kGainEpsilon = 1e-6;

inline double split_gain(double gl, double hl, double gr, double hr) {
  const double g = gl + gr;
  const double h = hl + hr;
  return gl * gl / (hl + kGainEpsilon) + gr * gr / (hr + kGainEpsilon) - g * g / (h + kGainEpsilon);
}

/// Per-feature thresholds frozen from training data. A value goes to the
/// left child of threshold t when v <= t.
class BinMapper {
 public:
  BinMapper() = default;
  static BinMapper fit(const Eigen::MatrixXd& features, std::size_t max_bins);

  std::size_t num_features() const { return thresholds_.size(); }
  const std::vector<double>& thresholds(std::size_t feature) const { return thresholds_[feature]; }
  // Index of the first threshold >= v, i.e. the bin holding v.
  std::uint16_t bin(std::size_t feature, double v) const;
  // rows x F bin indices, row-major.
  std::vector<std::uint16_t> transform(const Eigen::MatrixXd& features) const;

  static BinMapper from_thresholds(std::vector<std::vector<double>> thresholds);

 private:
  std::vector<std::vector<double>> thresholds_;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  bool default_left = true;  // direction for NaN
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output before shrinkage
  double gain = 0.0;   // split gain, 0 for leaves

  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  bool operator==(const Tree&) const = default;
};

/// Depth-first greedy growth on pre-binned rows (row-major, rows x F).
/// `total_gain`, if given, receives the sum of split gains.
Tree fit_tree(const BinMapper& bins, const std::vector<std::uint16_t>& binned, std::size_t num_features,
              const Eigen::VectorXd& gradient, const Eigen::VectorXd& hessian, const TreeParams& params,
              double* total_gain = nullptr);

// Convenience overload that bins `features` itself.
Tree fit_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& gradient, const Eigen::VectorXd& hessian,
              const TreeParams& params);

// ---------------------------------------------------------------------------
// Ensemble

struct GbdtModel {
  std::vector<Tree> trees;
  double base_score = 0.0;
  double shrinkage = 0.1;
  std::vector<std::string> schema;
  std::uint64_t schema_hash = 0;
  std::uint64_t config_hash = 0;
  double total_gain = 0.0;  // sum of split gains recorded while fitting

  bool operator==(const GbdtModel&) const = default;
};

struct GbdtRound {
  std::size_t round = 0;  // number of trees
  double train_loss = 0.0;
  double val_map = 0.0;
};

struct GbdtResult {
  GbdtModel model;
  std::vector<GbdtRound> history;
  std::size_t best_round = 0;
};

/// Boosting with validation MAP@6 early stopping. Returns the best-round
/// prefix (all trees when `val` has no groups).
GbdtResult fit_gbdt(const RankingMatrix& train, const RankingMatrix& val, const TreeParams& params);

// Unchecked ensemble sum per row.
Eigen::VectorXd raw_scores(const GbdtModel& model, const Eigen::MatrixXd& rows);
// Checks the caller's schema against the model before scoring.
Eigen::VectorXd predict_scores(const GbdtModel& model, const Eigen::MatrixXd& rows,
                               const std::vector<std::string>& schema);

/// Ids of the top `k` rows by score, ties by ascending id. Row i is
/// candidate i; the row count must equal `num_categories`.
std::vector<int> rank_candidates(const GbdtModel& model, const Eigen::MatrixXd& rows, std::size_t num_categories,
                                 const std::vector<std::string>& schema, std::size_t k = 6);

/// MAP@6 of ranking each group's rows by `scores` (ties by candidate id).
double ranking_map(const RankingMatrix& m, const Eigen::VectorXd& scores, std::size_t k = 6);

/// Total split gain per schema name, in schema order.
std::vector<std::pair<std::string, double>> feature_importance(const GbdtModel& model);

std::string save_gbdt(const GbdtModel& model);
GbdtModel load_gbdt(std::string_view bytes);

// ---------------------------------------------------------------------------
// Hyperparameter search

struct HpoSpace {
  double shrinkage_min = 0.01, shrinkage_max = 0.3;  // log-uniform
  std::size_t depth_min = 2, depth_max = 8;
  std::size_t trees_min = 50, trees_max = 400;
  std::size_t leaf_min = 5, leaf_max = 50;
  std::size_t budget = 50;
  std::uint64_t seed = 0;
  TreeParams base;  // fields not searched are copied from here

  void validate() const;
};

struct HpoTrial {
  std::size_t id = 0;
  TreeParams params;
  double score = 0.0;
  double seconds = 0.0;
};

struct HpoResult {
  TreeParams best;
  std::size_t best_trial = 0;
  std::vector<HpoTrial> trials;
};

TreeParams sample_params(const HpoSpace& space, Rng& rng);

/// Seeded random search maximizing `objective`; earliest trial wins ties.
/// `on_trial` sees each finished trial in order (e.g. to append a log).
HpoResult random_search(const HpoSpace& space, const std::function<double(const TreeParams&)>& objective,
                        const std::function<void(const HpoTrial&)>& on_trial = {});

std::string trial_to_json(const HpoTrial& trial);

}  // namespace gifrank
