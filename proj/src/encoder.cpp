#include "gifrank/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "gifrank/binio.hpp"
#include "gifrank/metrics.hpp"

namespace gifrank {

namespace {

constexpr std::string_view kMagic = "GRENCODR";
constexpr std::uint32_t kVersion = 1;

struct Example {
  int first;   // pointwise: the category; pairwise: the positive
  int second;  // pointwise: the 0/1 label; pairwise: the negative
};

Eigen::VectorXd mean_rows(const Eigen::MatrixXd& table, const std::vector<int>& ids) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(table.cols());
  if (ids.empty()) return m;
  for (int id : ids) m += table.row(id).transpose();
  return m / static_cast<double>(ids.size());
}

// Forward + backward for every example sharing one query. Returns the summed
// loss; gradients are scaled by `scale`.
double accumulate_query(const EncoderModel& model, const std::vector<int>& ids, const std::vector<Example>& examples,
                        TrainMode mode, double margin, double scale, EncoderGradients& grads) {
  const Eigen::VectorXd mean = mean_rows(model.token_embeddings, ids);
  const Eigen::VectorXd query = model.projection.transpose() * mean;
  Eigen::VectorXd d_query = Eigen::VectorXd::Zero(query.size());
  double loss = 0.0;
  for (const Example& ex : examples) {
    if (mode == TrainMode::kPointwise) {
      const double s = model.category_embeddings.row(ex.first).dot(query);
      const PointwiseLoss l = pointwise_loss(s, ex.second);
      loss += l.loss;
      const double g = scale * l.d_score;
      grads.category_embeddings.row(ex.first) += g * query.transpose();
      d_query += g * model.category_embeddings.row(ex.first).transpose();
    } else {
      const double sp = model.category_embeddings.row(ex.first).dot(query);
      const double sn = model.category_embeddings.row(ex.second).dot(query);
      const PairwiseLoss l = pairwise_loss(sp, sn, margin);
      loss += l.loss;
      if (l.d_pos == 0.0 && l.d_neg == 0.0) continue;
      const double gp = scale * l.d_pos;
      const double gn = scale * l.d_neg;
      grads.category_embeddings.row(ex.first) += gp * query.transpose();
      grads.category_embeddings.row(ex.second) += gn * query.transpose();
      d_query += gp * model.category_embeddings.row(ex.first).transpose() +
                 gn * model.category_embeddings.row(ex.second).transpose();
    }
  }
  if (ids.empty()) return loss;
  grads.projection.noalias() += mean * d_query.transpose();
  const Eigen::VectorXd d_mean = model.projection * d_query / static_cast<double>(ids.size());
  for (int id : ids) grads.token_embeddings.row(id) += d_mean.transpose();
  return loss;
}

struct Adam {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  Eigen::MatrixXd m, v;

  explicit Adam(const Eigen::MatrixXd& like)
      : m(Eigen::MatrixXd::Zero(like.rows(), like.cols())), v(Eigen::MatrixXd::Zero(like.rows(), like.cols())) {}

  void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, double lr, std::size_t t) {
    m = kBeta1 * m + (1 - kBeta1) * grad;
    v = kBeta2 * v + (1 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1 - std::pow(kBeta2, static_cast<double>(t));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }
};

double map_on_ids(const EncoderModel& model, const std::vector<std::vector<int>>& ids,
                  const std::vector<LabeledPair>& data, std::size_t k) {
  if (data.empty()) return 0.0;
  const std::size_t cut = std::min(k, model.num_categories());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd q = encode_ids(model, ids[i]);
    total += ap_at_k(top_k_ids(score_all(model, q), cut), data[i].gold, cut);
  }
  return total / static_cast<double>(data.size());
}

}  // namespace

std::string_view mode_name(TrainMode mode) { return mode == TrainMode::kPointwise ? "pointwise" : "pairwise"; }

TrainMode parse_mode(std::string_view name) {
  if (name == "pointwise") return TrainMode::kPointwise;
  if (name == "pairwise") return TrainMode::kPairwise;
  throw ValidationError("unknown encoder mode '" + std::string(name) + "' (expected pointwise or pairwise)");
}

void EncoderConfig::validate() const {
  if (token_dim == 0 || category_dim == 0) throw ValidationError("encoder dimensions must be positive");
  if (vocab_size < 2) throw ValidationError("encoder vocab_size must be at least 2");
  if (!(margin >= 0.0)) throw ValidationError("encoder margin must be non-negative");
  if (negatives_per_positive == 0) throw ValidationError("negatives_per_positive must be positive");
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (!(lr0 > 0.0)) throw ValidationError("lr0 must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ValidationError("lr_decay must lie in (0,1]");
  if (lr_step_epochs == 0) throw ValidationError("lr_step_epochs must be positive");
  if (!(init_scale > 0.0)) throw ValidationError("init_scale must be positive");
}

TokenIndex::TokenIndex() : tokens_{std::string(kOovToken)} { rows_.emplace(kOovToken, kOov); }

TokenIndex TokenIndex::build(const std::vector<TokenizedText>& corpus, std::size_t capacity) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& t : doc.tokens) ++counts[t];
  }
  counts.erase(std::string(kOovToken));
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (capacity > 0 && ranked.size() + 1 > capacity) ranked.resize(capacity - 1);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [t, c] : ranked) tokens.push_back(std::move(t));
  return from_tokens(std::move(tokens));
}

TokenIndex TokenIndex::from_tokens(std::vector<std::string> tokens) {
  TokenIndex index;
  for (auto& t : tokens) {
    if (t == kOovToken) continue;
    if (!index.rows_.emplace(t, static_cast<int>(index.tokens_.size())).second) {
      throw ValidationError("duplicate token '" + t + "' in token index");
    }
    index.tokens_.push_back(std::move(t));
  }
  return index;
}

int TokenIndex::lookup(std::string_view token) const {
  auto it = rows_.find(std::string(token));
  return it == rows_.end() ? kOov : it->second;
}

std::vector<int> TokenIndex::lookup(const TokenizedText& text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (const auto& t : text.tokens) ids.push_back(lookup(t));
  return ids;
}

EncoderModel init_encoder(TokenIndex index, std::size_t num_categories, const EncoderConfig& config) {
  config.validate();
  if (num_categories == 0) throw ValidationError("encoder needs at least one category");
  EncoderModel model;
  Rng rng(derive_seed(config.seed, "encoder.init"));
  const double a = config.init_scale;
  auto fill = [&](Eigen::MatrixXd& m, std::size_t rows, std::size_t cols) {
    m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-a, a);
    }
  };
  fill(model.token_embeddings, index.size(), config.token_dim);
  fill(model.projection, config.token_dim, config.category_dim);
  fill(model.category_embeddings, num_categories, config.category_dim);
  model.token_index = std::move(index);
  return model;
}

Eigen::VectorXd encode_ids(const EncoderModel& model, const std::vector<int>& ids) {
  return model.projection.transpose() * mean_rows(model.token_embeddings, ids);
}

Eigen::VectorXd encode_pair(const EncoderModel& model, const TokenizedText& pair) {
  return encode_ids(model, model.token_index.lookup(pair));
}

double score(const EncoderModel& model, const Eigen::VectorXd& query, int category) {
  if (category < 0 || static_cast<std::size_t>(category) >= model.num_categories()) {
    throw ValidationError("category id " + std::to_string(category) + " out of range [0," +
                          std::to_string(model.num_categories()) + ")");
  }
  if (query.size() != model.category_embeddings.cols()) {
    throw ValidationError("query dimension does not match category embeddings");
  }
  return model.category_embeddings.row(category).dot(query);
}

Eigen::VectorXd score_all(const EncoderModel& model, const Eigen::VectorXd& query) {
  return model.category_embeddings * query;
}

std::vector<int> sample_negatives(const std::vector<int>& gold, std::size_t num_categories, std::size_t k, Rng& rng) {
  std::vector<char> excluded(num_categories, 0);
  for (int g : gold) {
    if (g >= 0 && static_cast<std::size_t>(g) < num_categories) excluded[g] = 1;
  }
  std::vector<int> pool;
  for (std::size_t i = 0; i < num_categories; ++i) {
    if (!excluded[i]) pool.push_back(static_cast<int>(i));
  }
  if (k > pool.size()) {
    throw ValidationError("sample_negatives: requested " + std::to_string(k) + " negatives but only " +
                          std::to_string(pool.size()) + " non-gold categories exist");
  }
  // Partial Fisher-Yates: the first k slots are a uniform k-subset in random order.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
  }
  pool.resize(k);
  return pool;
}

PointwiseLoss pointwise_loss(double s, int y) {
  // -[y ln σ(s) + (1-y) ln(1-σ(s))] = softplus(s) - y·s
  return {softplus(s) - (y ? s : 0.0), sigmoid(s) - (y ? 1.0 : 0.0)};
}

PairwiseLoss pairwise_loss(double s_pos, double s_neg, double margin) {
  const double loss = margin - (s_pos - s_neg);
  if (loss > 0.0) return {loss, -1.0, 1.0};
  return {0.0, 0.0, 0.0};
}

double lr_at_epoch(const EncoderConfig& config, std::size_t epoch) {
  const auto steps = static_cast<double>(epoch / config.lr_step_epochs);
  // Dividing by the inverse factor keeps 3e-5 -> 3e-6 -> 3e-7 exact in binary.
  return config.lr0 / std::pow(1.0 / config.lr_decay, steps);
}

EncoderGradients::EncoderGradients(const EncoderModel& model)
    : token_embeddings(Eigen::MatrixXd::Zero(model.token_embeddings.rows(), model.token_embeddings.cols())),
      category_embeddings(Eigen::MatrixXd::Zero(model.category_embeddings.rows(), model.category_embeddings.cols())),
      projection(Eigen::MatrixXd::Zero(model.projection.rows(), model.projection.cols())) {}

void EncoderGradients::set_zero() {
  token_embeddings.setZero();
  category_embeddings.setZero();
  projection.setZero();
}

double accumulate_pointwise(const EncoderModel& model, const std::vector<int>& ids, int category, int label,
                            double scale, EncoderGradients& grads) {
  return accumulate_query(model, ids, {{category, label}}, TrainMode::kPointwise, 0.0, scale, grads);
}

double accumulate_pairwise(const EncoderModel& model, const std::vector<int>& ids, int positive, int negative,
                           double margin, double scale, EncoderGradients& grads) {
  return accumulate_query(model, ids, {{positive, negative}}, TrainMode::kPairwise, margin, scale, grads);
}

std::vector<LabeledPair> make_labeled_pairs(const Dataset& dataset, const LabelVocab& vocab,
                                            const NormalizeConfig& normalize_config, const EmojiLexicon& lexicon) {
  std::vector<LabeledPair> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.samples) {
    out.push_back({preprocess_pair(s.text, s.reply, normalize_config, lexicon), gold_ids(s, vocab)});
  }
  return out;
}

std::vector<int> top_k_ids(const Eigen::VectorXd& scores, std::size_t k) {
  std::vector<int> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), [&](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  order.resize(k);
  return order;
}

double encoder_map(const EncoderModel& model, const std::vector<LabeledPair>& data, std::size_t k) {
  std::vector<std::vector<int>> ids;
  ids.reserve(data.size());
  for (const auto& d : data) ids.push_back(model.token_index.lookup(d.pair));
  return map_on_ids(model, ids, data, k);
}

EncoderTrainResult train_encoder(EncoderModel model, const std::vector<LabeledPair>& train,
                                 const std::vector<LabeledPair>& val, TrainMode mode, const EncoderConfig& config) {
  config.validate();
  if (train.empty()) throw ValidationError("train_encoder: empty training set");
  const std::size_t K = model.num_categories();
  for (const auto* set : {&train, &val}) {
    for (const auto& p : *set) {
      if (p.gold.empty()) throw TrainingError("train_encoder: sample without gold categories");
      for (int g : p.gold) {
        if (g < 0 || static_cast<std::size_t>(g) >= K) throw TrainingError("train_encoder: gold id out of range");
      }
    }
  }
  model.mode = mode;

  EncoderTrainResult result;
  result.model = model;
  if (config.epochs == 0) return result;

  std::vector<std::vector<int>> train_ids, val_ids;
  for (const auto& p : train) train_ids.push_back(model.token_index.lookup(p.pair));
  for (const auto& p : val) val_ids.push_back(model.token_index.lookup(p.pair));

  Rng rng(derive_seed(config.seed, mode == TrainMode::kPointwise ? "encoder.train.pointwise" : "encoder.train.pairwise"));
  EncoderGradients grads(model);
  Adam adam_tok(model.token_embeddings), adam_cat(model.category_embeddings), adam_proj(model.projection);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<Example>> batch_examples;
  std::size_t step = 0;
  double best_map = -1.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(config, epoch);
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_examples = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch_examples.assign(end - start, {});
      std::size_t n_examples = 0;
      for (std::size_t b = start; b < end; ++b) {
        const auto& gold = train[order[b]].gold;
        const std::size_t k = std::min(config.negatives_per_positive, K - gold.size());
        auto& exs = batch_examples[b - start];
        for (int pos : gold) {
          const std::vector<int> negs = sample_negatives(gold, K, k, rng);
          if (mode == TrainMode::kPointwise) {
            exs.push_back({pos, 1});
            for (int n : negs) exs.push_back({n, 0});
          } else {
            for (int n : negs) exs.push_back({pos, n});
          }
        }
        n_examples += exs.size();
      }
      if (n_examples == 0) continue;

      grads.set_zero();
      const double scale = 1.0 / static_cast<double>(n_examples);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        batch_loss += accumulate_query(model, train_ids[order[b]], batch_examples[b - start], mode, config.margin,
                                       scale, grads);
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("train_encoder: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting " +
                            std::to_string(start) + " (lr " + std::to_string(lr) + ")");
      }
      ++step;
      adam_tok.step(model.token_embeddings, grads.token_embeddings, lr, step);
      adam_cat.step(model.category_embeddings, grads.category_embeddings, lr, step);
      adam_proj.step(model.projection, grads.projection, lr, step);
      if (!model.all_finite()) {
        throw TrainingError("train_encoder: parameters became non-finite at epoch " + std::to_string(epoch));
      }
      epoch_loss += batch_loss;
      epoch_examples += n_examples;
    }

    EncoderEpoch stats;
    stats.epoch = epoch;
    stats.learning_rate = lr;
    stats.train_loss = epoch_examples ? epoch_loss / static_cast<double>(epoch_examples) : 0.0;
    stats.val_map = val.empty() ? map_on_ids(model, train_ids, train, 6) : map_on_ids(model, val_ids, val, 6);
    result.history.push_back(stats);
    if (stats.val_map > best_map) {
      best_map = stats.val_map;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

std::vector<std::string> predict_topk(const EncoderModel& model, const Sample& sample, const LabelVocab& vocab,
                                      std::size_t k, const NormalizeConfig& normalize_config,
                                      const EmojiLexicon& lexicon) {
  if (vocab.size() != model.num_categories()) throw ValidationError("predict_topk: vocabulary does not match model");
  if (k > vocab.size()) throw ValidationError("predict_topk: k exceeds the number of categories");
  const Eigen::VectorXd q = encode_pair(model, preprocess_pair(sample.text, sample.reply, normalize_config, lexicon));
  std::vector<std::string> names;
  for (int id : top_k_ids(score_all(model, q), k)) names.push_back(vocab.name(id));
  return names;
}

std::string save_encoder(const EncoderModel& model) {
  ByteWriter w;
  w.put_header(kMagic, kVersion);
  w.put_u8(static_cast<std::uint8_t>(model.mode));
  w.put_u64(model.config_hash);
  w.put_u64(model.token_index.size());
  for (const auto& t : model.token_index.tokens()) w.put_string(t);
  w.put_matrix(model.token_embeddings);
  w.put_matrix(model.projection);
  w.put_matrix(model.category_embeddings);
  return w.take();
}

EncoderModel load_encoder(std::string_view bytes) {
  ByteReader r(bytes);
  r.expect_header(kMagic, kVersion);
  EncoderModel model;
  const std::uint8_t mode = r.get_u8();
  if (mode > 1) throw ParseError("encoder file: invalid mode byte");
  model.mode = static_cast<TrainMode>(mode);
  model.config_hash = r.get_u64();
  const std::uint64_t n_tokens = r.get_u64();
  if (n_tokens == 0 || n_tokens > r.remaining() / 8) throw ParseError("encoder file: invalid token count");
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (std::uint64_t i = 0; i < n_tokens; ++i) tokens.push_back(r.get_string());
  if (tokens.front() != TokenIndex::kOovToken) throw ParseError("encoder file: first token row must be OOV");
  model.token_index = TokenIndex::from_tokens(std::move(tokens));
  model.token_embeddings = r.get_matrix();
  model.projection = r.get_matrix();
  model.category_embeddings = r.get_matrix();
  r.expect_end();
  if (static_cast<std::uint64_t>(model.token_embeddings.rows()) != n_tokens ||
      model.projection.rows() != model.token_embeddings.cols() ||
      model.projection.cols() != model.category_embeddings.cols()) {
    throw ParseError("encoder file: inconsistent matrix shapes");
  }
  return model;
}

}  // namespace gifrank
