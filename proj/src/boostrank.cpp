#include "gifrank/boostrank.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "gifrank/binio.hpp"
#include "gifrank/encoder.hpp"
#include "gifrank/metrics.hpp"

namespace gifrank {

namespace {

constexpr std::string_view kMagic = "GRGBDTMD";
constexpr std::uint32_t kVersion = 1;

// AP@k of a relevance vector already in rank order.
double ap_of_ranked(const std::vector<int>& rel_in_order, std::size_t num_relevant, std::size_t k) {
  if (num_relevant == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, rel_in_order.size()); ++i) {
    if (rel_in_order[i] > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(num_relevant, k));
}

}  // namespace

// ---------------------------------------------------------------------------

void RankingMatrix::validate() const {
  const std::size_t n = rows();
  if (static_cast<std::size_t>(relevance.size()) != n || candidates.size() != n) {
    throw ValidationError("ranking matrix: relevance/candidate length does not match row count");
  }
  if (cols() != schema.size() && n > 0) throw ValidationError("ranking matrix: column count does not match schema");
  if (group_idx.size() != groups.size()) throw ValidationError("ranking matrix: one idx per group required");
  std::size_t expect = 0;
  for (const auto& [b, e] : groups) {
    if (b != expect || e <= b || e > n) throw ValidationError("ranking matrix: groups must tile the rows");
    expect = e;
  }
  if (expect != n) throw ValidationError("ranking matrix: rows outside any group");
}

RankingBuilder::RankingBuilder(std::vector<std::string> schema) { m_.schema = std::move(schema); }

void RankingBuilder::add_group_unchecked(std::int64_t idx, const std::vector<int>& candidates,
                                         const std::vector<int>& relevance, const Eigen::MatrixXd& rows) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (candidates.size() != n || relevance.size() != n || static_cast<std::size_t>(rows.cols()) != m_.schema.size()) {
    throw ValidationError("ranking group " + std::to_string(idx) + ": inconsistent shape");
  }
  if (n == 0) throw ValidationError("ranking group " + std::to_string(idx) + ": empty");
  const std::size_t begin = m_.candidates.size();
  for (std::size_t r = 0; r < n; ++r) {
    if (relevance[r] != 0 && relevance[r] != 1) throw ValidationError("relevance must be 0 or 1");
    for (Eigen::Index c = 0; c < rows.cols(); ++c) values_.push_back(rows(static_cast<Eigen::Index>(r), c));
    m_.candidates.push_back(candidates[r]);
    relevance_.push_back(relevance[r]);
  }
  m_.groups.emplace_back(begin, begin + n);
  m_.group_idx.push_back(idx);
}

bool RankingBuilder::add_group(std::int64_t idx, const std::vector<int>& candidates, const std::vector<int>& relevance,
                               const Eigen::MatrixXd& rows) {
  const auto pos = std::count(relevance.begin(), relevance.end(), 1);
  if (relevance.size() < 2 || pos == 0 || pos == static_cast<std::ptrdiff_t>(relevance.size())) {
    ++m_.dropped_groups;
    return false;
  }
  add_group_unchecked(idx, candidates, relevance, rows);
  return true;
}

RankingMatrix RankingBuilder::finish() {
  const auto n = static_cast<Eigen::Index>(m_.candidates.size());
  const auto f = static_cast<Eigen::Index>(m_.schema.size());
  m_.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values_.data(), n, f);
  m_.relevance = Eigen::Map<const Eigen::VectorXi>(relevance_.data(), n);
  values_.clear();
  relevance_.clear();
  RankingMatrix out = std::move(m_);
  m_ = RankingMatrix{};
  m_.schema = out.schema;
  return out;
}

// ---------------------------------------------------------------------------

PairwiseGradients pairwise_gradients(const Eigen::VectorXd& scores, const Eigen::VectorXi& relevance,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& groups,
                                     bool map_weighted) {
  PairwiseGradients out{Eigen::VectorXd::Zero(scores.size()), Eigen::VectorXd::Zero(scores.size())};
  std::vector<std::size_t> order, position;
  std::vector<int> ranked_rel;
  for (const auto& [b, e] : groups) {
    const std::size_t n = e - b;
    std::size_t num_rel = 0;
    if (map_weighted) {
      order.resize(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return scores(b + x) > scores(b + y); });
      position.assign(n, 0);
      ranked_rel.assign(n, 0);
      for (std::size_t p = 0; p < n; ++p) {
        position[order[p]] = p;
        ranked_rel[p] = relevance(b + order[p]);
        num_rel += relevance(b + order[p]) > 0;
      }
    }
    const double base_ap = map_weighted ? ap_of_ranked(ranked_rel, num_rel, kCutoff) : 0.0;
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t j = b; j < e; ++j) {
        if (relevance(i) <= relevance(j)) continue;
        const double rho = 1.0 / (1.0 + std::exp(scores(i) - scores(j)));
        double w = 1.0;
        if (map_weighted) {
          std::swap(ranked_rel[position[i - b]], ranked_rel[position[j - b]]);
          w = std::abs(ap_of_ranked(ranked_rel, num_rel, kCutoff) - base_ap);
          std::swap(ranked_rel[position[i - b]], ranked_rel[position[j - b]]);
        }
        const double lambda = -rho * w;
        const double hess = rho * (1.0 - rho) * w;
        out.gradient(i) += lambda;
        out.gradient(j) -= lambda;
        out.hessian(i) += hess;
        out.hessian(j) += hess;
      }
    }
  }
  return out;
}

double pairwise_logistic_loss(const Eigen::VectorXd& scores, const Eigen::VectorXi& relevance,
                              const std::vector<std::pair<std::size_t, std::size_t>>& groups) {
  double loss = 0.0;
  for (const auto& [b, e] : groups) {
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t j = b; j < e; ++j) {
        if (relevance(i) > relevance(j)) loss += softplus(-(scores(i) - scores(j)));
      }
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------

void TreeParams::validate() const {
  if (max_depth == 0 || min_samples_leaf == 0 || early_stopping_rounds == 0) {
    throw ValidationError("tree params: max_depth, min_samples_leaf and early_stopping_rounds must be positive");
  }
  if (!(shrinkage > 0.0)) throw ValidationError("tree params: shrinkage must be positive");
  if (histogram_bins < 2 || histogram_bins > 65535) throw ValidationError("tree params: histogram_bins in [2, 65535]");
}

BinMapper BinMapper::fit(const Eigen::MatrixXd& features, std::size_t max_bins) {
  if (max_bins < 2) throw ValidationError("BinMapper: need at least 2 bins");
  BinMapper m;
  std::vector<double> col;
  for (Eigen::Index f = 0; f < features.cols(); ++f) {
    col.clear();
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      if (!std::isnan(features(r, f))) col.push_back(features(r, f));
    }
    std::sort(col.begin(), col.end());
    std::vector<double> uniq = col;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<double> t;
    if (uniq.size() <= max_bins) {
      for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
        double mid = uniq[i] + (uniq[i + 1] - uniq[i]) / 2.0;
        if (!(mid < uniq[i + 1])) mid = uniq[i];
        t.push_back(mid);
      }
    } else {
      const double top = col.back();
      for (std::size_t q = 1; q < max_bins; ++q) {
        const double v = col[q * col.size() / max_bins];
        if (v < top && (t.empty() || v > t.back())) t.push_back(v);
      }
    }
    m.thresholds_.push_back(std::move(t));
  }
  return m;
}

BinMapper BinMapper::from_thresholds(std::vector<std::vector<double>> thresholds) {
  BinMapper m;
  m.thresholds_ = std::move(thresholds);
  return m;
}

std::uint16_t BinMapper::bin(std::size_t feature, double v) const {
  const auto& t = thresholds_[feature];
  return static_cast<std::uint16_t>(std::lower_bound(t.begin(), t.end(), v) - t.begin());
}

std::vector<std::uint16_t> BinMapper::transform(const Eigen::MatrixXd& features) const {
  if (static_cast<std::size_t>(features.cols()) != thresholds_.size()) {
    throw ValidationError("BinMapper: feature count mismatch");
  }
  const auto F = static_cast<std::size_t>(features.cols());
  std::vector<std::uint16_t> out(static_cast<std::size_t>(features.rows()) * F);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (std::size_t f = 0; f < F; ++f) {
      const double v = features(r, static_cast<Eigen::Index>(f));
      // NaN lands in bin 0, matching default_left
      out[static_cast<std::size_t>(r) * F + f] = std::isnan(v) ? 0 : bin(f, v);
    }
  }
  return out;
}

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    const TreeNode& n = nodes[at];
    const double v = row(n.feature);
    const bool left = std::isnan(v) ? n.default_left : v <= n.threshold;
    at = left ? n.left : n.right;
  }
  return nodes[at].value;
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const BinMapper& bins, const std::vector<std::uint16_t>& binned, std::size_t F,
             const Eigen::VectorXd& g, const Eigen::VectorXd& h, const TreeParams& p)
      : bins_(bins), binned_(binned), F_(F), g_(g), h_(h), p_(p) {}

  int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    double G = 0.0, H = 0.0;
    for (auto r : rows) {
      G += g_(static_cast<Eigen::Index>(r));
      H += h_(static_cast<Eigen::Index>(r));
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[id].value = -G / (H + kGainEpsilon);
    if (depth >= p_.max_depth || rows.size() < 2 * p_.min_samples_leaf) return id;

    double best_gain = 0.0;
    int best_f = -1;
    std::size_t best_b = 0;
    std::vector<double> hg, hh;
    std::vector<std::size_t> hc;
    for (std::size_t f = 0; f < F_; ++f) {
      const std::size_t nb = bins_.thresholds(f).size() + 1;
      if (nb < 2) continue;
      hg.assign(nb, 0.0);
      hh.assign(nb, 0.0);
      hc.assign(nb, 0);
      for (auto r : rows) {
        const std::uint16_t b = binned_[r * F_ + f];
        hg[b] += g_(static_cast<Eigen::Index>(r));
        hh[b] += h_(static_cast<Eigen::Index>(r));
        ++hc[b];
      }
      // suffix sums give the right side without subtracting from totals
      std::vector<double> sg(nb + 1, 0.0), sh(nb + 1, 0.0);
      for (std::size_t b = nb; b-- > 0;) {
        sg[b] = sg[b + 1] + hg[b];
        sh[b] = sh[b + 1] + hh[b];
      }
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        gl += hg[b];
        hl += hh[b];
        cl += hc[b];
        if (cl < p_.min_samples_leaf) continue;
        if (rows.size() - cl < p_.min_samples_leaf) break;
        const double gain = split_gain(gl, hl, sg[b + 1], sh[b + 1]);
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_b = b;
        }
      }
    }
    if (best_f < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (binned_[r * F_ + static_cast<std::size_t>(best_f)] <= best_b ? left : right).push_back(r);
    }
    total_gain += best_gain;
    tree.nodes[id].feature = best_f;
    tree.nodes[id].threshold = bins_.thresholds(static_cast<std::size_t>(best_f))[best_b];
    tree.nodes[id].gain = best_gain;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  Tree tree;
  double total_gain = 0.0;

 private:
  const BinMapper& bins_;
  const std::vector<std::uint16_t>& binned_;
  std::size_t F_;
  const Eigen::VectorXd& g_;
  const Eigen::VectorXd& h_;
  const TreeParams& p_;
};

}  // namespace

Tree fit_tree(const BinMapper& bins, const std::vector<std::uint16_t>& binned, std::size_t num_features,
              const Eigen::VectorXd& gradient, const Eigen::VectorXd& hessian, const TreeParams& params,
              double* total_gain) {
  const auto n = static_cast<std::size_t>(gradient.size());
  if (n == 0) throw ValidationError("fit_tree: empty matrix");
  if (static_cast<std::size_t>(hessian.size()) != n || binned.size() != n * num_features ||
      bins.num_features() != num_features) {
    throw ValidationError("fit_tree: inconsistent input shapes");
  }
  TreeGrower grower(bins, binned, num_features, gradient, hessian, params);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  grower.grow(rows, 0);
  if (total_gain) *total_gain = grower.total_gain;
  return std::move(grower.tree);
}

Tree fit_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& gradient, const Eigen::VectorXd& hessian,
              const TreeParams& params) {
  const BinMapper bins = BinMapper::fit(features, params.histogram_bins);
  return fit_tree(bins, bins.transform(features), static_cast<std::size_t>(features.cols()), gradient, hessian,
                  params);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd raw_scores(const GbdtModel& model, const Eigen::MatrixXd& rows) {
  Eigen::VectorXd s(rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    double sum = 0.0;
    for (const auto& t : model.trees) sum += t.predict(rows.row(r));
    s(r) = model.base_score + model.shrinkage * sum;
  }
  return s;
}

Eigen::VectorXd predict_scores(const GbdtModel& model, const Eigen::MatrixXd& rows,
                               const std::vector<std::string>& schema) {
  if (schema_hash(schema) != model.schema_hash) {
    throw ValidationError("reranker schema mismatch: model was trained on a different feature schema");
  }
  if (static_cast<std::size_t>(rows.cols()) != schema.size()) {
    throw ValidationError("reranker input has " + std::to_string(rows.cols()) + " columns, schema has " +
                          std::to_string(schema.size()));
  }
  return raw_scores(model, rows);
}

std::vector<int> rank_candidates(const GbdtModel& model, const Eigen::MatrixXd& rows, std::size_t num_categories,
                                 const std::vector<std::string>& schema, std::size_t k) {
  if (static_cast<std::size_t>(rows.rows()) != num_categories) {
    throw ValidationError("rank_candidates: expected " + std::to_string(num_categories) + " candidate rows, got " +
                          std::to_string(rows.rows()));
  }
  return top_k_ids(predict_scores(model, rows, schema), std::min(k, num_categories));
}

double ranking_map(const RankingMatrix& m, const Eigen::VectorXd& scores, std::size_t k) {
  double sum = 0.0;
  std::size_t counted = 0;
  std::vector<std::size_t> order;
  std::vector<int> ranked, relevant;
  for (const auto& [b, e] : m.groups) {
    order.resize(e - b);
    std::iota(order.begin(), order.end(), b);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (scores(x) != scores(y)) return scores(x) > scores(y);
      return m.candidates[x] < m.candidates[y];
    });
    ranked.clear();
    relevant.clear();
    for (auto r : order) ranked.push_back(m.candidates[r]);
    for (std::size_t r = b; r < e; ++r) {
      if (m.relevance(r) > 0) relevant.push_back(m.candidates[r]);
    }
    if (relevant.empty()) continue;
    sum += ap_at_k(ranked, relevant, k);
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

GbdtResult fit_gbdt(const RankingMatrix& train, const RankingMatrix& val, const TreeParams& params) {
  params.validate();
  train.validate();
  val.validate();
  if (train.groups.empty()) throw ValidationError("fit_gbdt: training matrix has no groups");
  if (!val.groups.empty() && val.schema != train.schema) {
    throw ValidationError("fit_gbdt: train and validation schemas differ");
  }

  GbdtResult result;
  GbdtModel& model = result.model;
  model.shrinkage = params.shrinkage;
  model.schema = train.schema;
  model.schema_hash = schema_hash(train.schema);

  const BinMapper bins = BinMapper::fit(train.features, params.histogram_bins);
  const std::vector<std::uint16_t> binned = bins.transform(train.features);
  const std::size_t F = train.cols();

  std::size_t num_pairs = 0;
  for (const auto& [b, e] : train.groups) {
    std::size_t pos = 0;
    for (std::size_t r = b; r < e; ++r) pos += train.relevance(r) > 0;
    num_pairs += pos * (e - b - pos);
  }
  const double pair_norm = num_pairs == 0 ? 1.0 : static_cast<double>(num_pairs);

  Eigen::VectorXd scores = Eigen::VectorXd::Constant(train.features.rows(), model.base_score);
  Eigen::VectorXd val_scores = Eigen::VectorXd::Constant(val.features.rows(), model.base_score);
  const bool has_val = !val.groups.empty();

  auto record = [&](std::size_t round) {
    GbdtRound r;
    r.round = round;
    r.train_loss = pairwise_logistic_loss(scores, train.relevance, train.groups) / pair_norm;
    r.val_map = has_val ? ranking_map(val, val_scores) : 0.0;
    result.history.push_back(r);
    return r.val_map;
  };

  double best_map = record(0);
  std::vector<Tree> trees;
  std::vector<double> gains;
  for (std::size_t round = 1; round <= params.num_trees; ++round) {
    const PairwiseGradients pg = pairwise_gradients(scores, train.relevance, train.groups, params.map_weighted);
    double gain = 0.0;
    Tree tree = fit_tree(bins, binned, F, pg.gradient, pg.hessian, params, &gain);
    for (Eigen::Index r = 0; r < scores.size(); ++r) scores(r) += params.shrinkage * tree.predict(train.features.row(r));
    for (Eigen::Index r = 0; r < val_scores.size(); ++r) {
      val_scores(r) += params.shrinkage * tree.predict(val.features.row(r));
    }
    if (!scores.allFinite()) throw TrainingError("fit_gbdt: non-finite scores at round " + std::to_string(round));
    trees.push_back(std::move(tree));
    gains.push_back(gain);
    const double m = record(round);
    if (has_val) {
      if (m > best_map) {
        best_map = m;
        result.best_round = round;
      } else if (round - result.best_round >= params.early_stopping_rounds) {
        break;
      }
    }
  }
  if (!has_val) result.best_round = trees.size();
  trees.resize(result.best_round);
  model.trees = std::move(trees);
  for (std::size_t i = 0; i < result.best_round; ++i) model.total_gain += gains[i];
  return result;
}

std::vector<std::pair<std::string, double>> feature_importance(const GbdtModel& model) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& name : model.schema) out.emplace_back(name, 0.0);
  for (const auto& t : model.trees) {
    for (const auto& n : t.nodes) {
      if (n.feature >= 0) out.at(static_cast<std::size_t>(n.feature)).second += n.gain;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string save_gbdt(const GbdtModel& model) {
  ByteWriter w;
  w.put_header(kMagic, kVersion);
  w.put_u64(model.schema_hash);
  w.put_u64(model.config_hash);
  w.put_f64(model.shrinkage);
  w.put_f64(model.base_score);
  w.put_f64(model.total_gain);
  w.put_u64(model.schema.size());
  for (const auto& s : model.schema) w.put_string(s);
  w.put_u64(model.trees.size());
  for (const auto& t : model.trees) {
    w.put_u64(t.nodes.size());
    for (const auto& n : t.nodes) {
      w.put_i64(n.feature);
      w.put_f64(n.threshold);
      w.put_u8(n.default_left ? 1 : 0);
      w.put_i64(n.left);
      w.put_i64(n.right);
      w.put_f64(n.value);
      w.put_f64(n.gain);
    }
  }
  return w.take();
}

GbdtModel load_gbdt(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_header(kMagic, kVersion);
  GbdtModel m;
  m.schema_hash = r.get_u64();
  m.config_hash = r.get_u64();
  m.shrinkage = r.get_f64();
  m.base_score = r.get_f64();
  m.total_gain = r.get_f64();
  const std::uint64_t ns = r.get_u64();
  if (ns > r.remaining() / 8) throw ParseError("truncated schema table");
  for (std::uint64_t i = 0; i < ns; ++i) m.schema.push_back(r.get_string());
  if (schema_hash(m.schema) != m.schema_hash) throw ParseError("reranker schema hash does not match its names");
  const std::uint64_t nt = r.get_u64();
  if (nt > r.remaining() / 8) throw ParseError("truncated tree table");
  constexpr std::size_t kNodeBytes = 8 * 6 + 1;
  for (std::uint64_t t = 0; t < nt; ++t) {
    const std::uint64_t nn = r.get_u64();
    if (nn == 0 || nn > r.remaining() / kNodeBytes) throw ParseError("truncated tree");
    Tree tree;
    for (std::uint64_t i = 0; i < nn; ++i) {
      TreeNode n;
      n.feature = static_cast<int>(r.get_i64());
      n.threshold = r.get_f64();
      n.default_left = r.get_u8() != 0;
      n.left = static_cast<int>(r.get_i64());
      n.right = static_cast<int>(r.get_i64());
      n.value = r.get_f64();
      n.gain = r.get_f64();
      if (n.feature >= 0) {
        const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(nn); };
        if (static_cast<std::uint64_t>(n.feature) >= ns || !in_range(n.left) || !in_range(n.right)) {
          throw ParseError("corrupt tree node");
        }
      }
      tree.nodes.push_back(n);
    }
    m.trees.push_back(std::move(tree));
  }
  r.expect_end();
  return m;
}

// ---------------------------------------------------------------------------

void HpoSpace::validate() const {
  if (budget == 0) throw ValidationError("hpo: budget must be at least 1");
  if (!(shrinkage_min > 0.0) || shrinkage_min > shrinkage_max) throw ValidationError("hpo: bad shrinkage range");
  if (depth_min == 0 || depth_min > depth_max) throw ValidationError("hpo: bad depth range");
  if (trees_min > trees_max) throw ValidationError("hpo: bad tree-count range");
  if (leaf_min == 0 || leaf_min > leaf_max) throw ValidationError("hpo: bad leaf-size range");
  base.validate();
}

TreeParams sample_params(const HpoSpace& space, Rng& rng) {
  TreeParams p = space.base;
  p.shrinkage = std::exp(rng.uniform(std::log(space.shrinkage_min), std::log(space.shrinkage_max)));
  p.max_depth = space.depth_min + rng.uniform_index(space.depth_max - space.depth_min + 1);
  p.num_trees = space.trees_min + rng.uniform_index(space.trees_max - space.trees_min + 1);
  p.min_samples_leaf = space.leaf_min + rng.uniform_index(space.leaf_max - space.leaf_min + 1);
  return p;
}

HpoResult random_search(const HpoSpace& space, const std::function<double(const TreeParams&)>& objective,
                        const std::function<void(const HpoTrial&)>& on_trial) {
  space.validate();
  Rng rng(derive_seed(space.seed, "hpo.sample"));
  HpoResult result;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < space.budget; ++t) {
    HpoTrial trial;
    trial.id = t;
    trial.params = sample_params(space, rng);
    const auto start = std::chrono::steady_clock::now();
    trial.score = objective(trial.params);
    trial.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (trial.score > best) {
      best = trial.score;
      result.best = trial.params;
      result.best_trial = t;
    }
    if (on_trial) on_trial(trial);
    result.trials.push_back(trial);
  }
  return result;
}

std::string trial_to_json(const HpoTrial& trial) {
  nlohmann::ordered_json j;
  j["trial"] = trial.id;
  j["params"] = {{"shrinkage", trial.params.shrinkage},
                 {"max_depth", trial.params.max_depth},
                 {"num_trees", trial.params.num_trees},
                 {"min_samples_leaf", trial.params.min_samples_leaf},
                 {"histogram_bins", trial.params.histogram_bins},
                 {"early_stopping_rounds", trial.params.early_stopping_rounds},
                 {"map_weighted", trial.params.map_weighted}};
  j["score"] = trial.score;
  j["seconds"] = trial.seconds;
  return j.dump();
}

}  // namespace gifrank
