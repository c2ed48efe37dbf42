#include "gifrank/featbank.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace gifrank {

namespace {

constexpr std::string_view kMagic = "GRFEATBK";
constexpr std::uint32_t kVersion = 1;

constexpr std::array<const char*, 4> kSources = {"tfidf_word", "sgns_word", "subword_word", "sgns_sentence"};
constexpr std::array<const char*, 2> kFields = {"text", "reply"};
constexpr std::array<const char*, 3> kMetrics = {"euclidean", "manhattan", "cosine"};

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

// Cumulative unigram^power table for noise sampling.
class NoiseTable {
 public:
  NoiseTable(const std::vector<std::size_t>& counts, double power) : cumulative_(counts.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      total += std::pow(static_cast<double>(counts[i]), power);
      cumulative_[i] = total;
    }
  }

  int draw(Rng& rng) const {
    const double x = rng.uniform01() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                     static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
  }

 private:
  std::vector<double> cumulative_;
};

struct IndexedCorpus {
  std::vector<std::string> terms;
  std::vector<std::size_t> counts;
  std::vector<std::vector<int>> docs;
  std::size_t total_tokens = 0;
};

IndexedCorpus index_corpus(const std::vector<Document>& corpus) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& t : doc) ++counts[t];
  }
  IndexedCorpus ic;
  std::unordered_map<std::string, int> rows;
  for (const auto& [t, c] : counts) {
    rows.emplace(t, static_cast<int>(ic.terms.size()));
    ic.terms.push_back(t);
    ic.counts.push_back(c);
  }
  for (const auto& doc : corpus) {
    std::vector<int> ids;
    for (const auto& t : doc) ids.push_back(rows.at(t));
    ic.total_tokens += ids.size();
    ic.docs.push_back(std::move(ids));
  }
  return ic;
}

// Shared skip-gram loop. `center_vector(word, out)` produces the input
// representation of a word and `apply_center(word, grad, lr)` applies
// the gradient with respect to it.
void run_sgns(const IndexedCorpus& ic, const SgnsConfig& config, Eigen::MatrixXd& outputs, std::string_view stage,
              const std::function<void(int, Eigen::VectorXd&)>& center_vector,
              const std::function<void(int, const Eigen::VectorXd&, double)>& apply_center) {
  if (ic.terms.empty()) return;
  Rng rng(derive_seed(config.seed, stage));
  const NoiseTable noise(ic.counts, config.noise_power);
  const double total = static_cast<double>(config.epochs * ic.total_tokens);
  double processed = 0.0;
  const auto d = static_cast<Eigen::Index>(config.dim);
  Eigen::VectorXd center(d), d_center(d);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(config.negatives + 1), d);
  std::vector<int> row_ids;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& doc : ic.docs) {
      const auto n = static_cast<std::ptrdiff_t>(doc.size());
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double lr = config.learning_rate * std::max(1e-4, 1.0 - processed / total);
        processed += 1.0;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - static_cast<std::ptrdiff_t>(config.window));
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + static_cast<std::ptrdiff_t>(config.window));
        if (lo == hi) continue;
        center_vector(doc[i], center);
        d_center.setZero();
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          row_ids.assign(1, doc[j]);
          for (std::size_t k = 0; k < config.negatives; ++k) {
            const int neg = noise.draw(rng);
            if (neg != doc[j]) row_ids.push_back(neg);
          }
          rows.resize(static_cast<Eigen::Index>(row_ids.size()), d);
          for (std::size_t r = 0; r < row_ids.size(); ++r) rows.row(r) = outputs.row(row_ids[r]);
          const SgnsPairGradient g = sgns_pair_loss(center, rows);
          for (std::size_t r = 0; r < row_ids.size(); ++r) outputs.row(row_ids[r]) -= lr * g.d_outputs.row(r);
          d_center += g.d_center;
        }
        apply_center(doc[i], d_center, lr);
      }
    }
  }
}

void write_strings(ByteWriter& w, const std::vector<std::string>& v) {
  w.put_u64(v.size());
  for (const auto& s : v) w.put_string(s);
}

std::vector<std::string> read_strings(ByteReader& r) {
  const std::uint64_t n = r.get_u64();
  if (n > r.remaining() / 8) throw ParseError("truncated string table");
  std::vector<std::string> v;
  v.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) v.push_back(r.get_string());
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

Distances<double> distances(const SparseVec& u, const Eigen::VectorXd& v, const DenseNorms& v_norms) {
  if (u.size() != v.size()) {
    throw ValidationError("distances: length mismatch (" + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()) + ")");
  }
  double dot = 0.0, u_sq = 0.0, l1 = v_norms.l1;
  for (SparseVec::InnerIterator it(u); it; ++it) {
    const double a = it.value();
    const double b = v(it.index());
    dot += a * b;
    u_sq += a * a;
    l1 += std::abs(a - b) - std::abs(b);
  }
  Distances<double> d;
  d.euclidean = std::sqrt(std::max(0.0, u_sq + v_norms.squared_l2 - 2.0 * dot));
  d.manhattan = std::max(0.0, l1);
  if (u_sq == 0.0 || v_norms.squared_l2 == 0.0) {
    d.cosine = 1.0;
  } else {
    const double c = std::clamp(dot / (std::sqrt(u_sq) * std::sqrt(v_norms.squared_l2)), -1.0, 1.0);
    d.cosine = 1.0 - c;
    if (d.cosine < 1e-15) d.cosine = 0.0;
  }
  return d;
}

// ---------------------------------------------------------------------------

TfIdfModel TfIdfModel::fit(const std::vector<Document>& corpus) {
  if (corpus.empty()) throw ValidationError("fit_tfidf: empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::set<std::string_view> uniq(doc.begin(), doc.end());
    for (auto t : uniq) ++df[std::string(t)];
  }
  TfIdfModel m;
  m.doc_count_ = corpus.size();
  m.idf_.resize(static_cast<Eigen::Index>(df.size()));
  const double n = static_cast<double>(corpus.size());
  for (const auto& [term, count] : df) {
    const auto col = static_cast<int>(m.terms_.size());
    m.columns_.emplace(term, col);
    m.terms_.push_back(term);
    m.idf_(col) = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
  }
  return m;
}

int TfIdfModel::column(const std::string& term) const {
  auto it = columns_.find(term);
  return it == columns_.end() ? -1 : it->second;
}

double TfIdfModel::idf(const std::string& term) const {
  const int c = column(term);
  return c < 0 ? 0.0 : idf_(c);
}

SparseVec TfIdfModel::transform(const Document& doc) const {
  std::map<int, double> counts;
  for (const auto& t : doc) {
    if (const int c = column(t); c >= 0) counts[c] += 1.0;
  }
  SparseVec v(static_cast<Eigen::Index>(dim()));
  double sq = 0.0;
  for (auto& [c, w] : counts) {
    w *= idf_(c);
    sq += w * w;
  }
  if (sq == 0.0) return v;
  const double norm = std::sqrt(sq);
  v.reserve(static_cast<Eigen::Index>(counts.size()));
  for (const auto& [c, w] : counts) v.insert(c) = w / norm;
  return v;
}

void TfIdfModel::write(ByteWriter& w) const {
  w.put_u64(doc_count_);
  write_strings(w, terms_);
  for (Eigen::Index i = 0; i < idf_.size(); ++i) w.put_f64(idf_(i));
}

TfIdfModel TfIdfModel::read(ByteReader& r) {
  TfIdfModel m;
  m.doc_count_ = r.get_u64();
  m.terms_ = read_strings(r);
  m.idf_.resize(static_cast<Eigen::Index>(m.terms_.size()));
  for (std::size_t i = 0; i < m.terms_.size(); ++i) {
    m.idf_(static_cast<Eigen::Index>(i)) = r.get_f64();
    if (!m.columns_.emplace(m.terms_[i], static_cast<int>(i)).second) throw ParseError("duplicate tf-idf term");
  }
  return m;
}

// ---------------------------------------------------------------------------

void SgnsConfig::validate() const {
  if (dim == 0 || window == 0 || epochs == 0) throw ValidationError("sgns: dim, window and epochs must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("sgns: learning_rate must be positive");
}

SgnsPairGradient sgns_pair_loss(const Eigen::VectorXd& center, const Eigen::MatrixXd& outputs) {
  SgnsPairGradient g;
  g.d_center = Eigen::VectorXd::Zero(center.size());
  g.d_outputs.resize(outputs.rows(), outputs.cols());
  for (Eigen::Index r = 0; r < outputs.rows(); ++r) {
    const double x = outputs.row(r).dot(center);
    double coeff;
    if (r == 0) {
      g.loss += softplus(-x);  // -ln σ(x)
      coeff = -sigmoid(-x);
    } else {
      g.loss += softplus(x);  // -ln σ(-x)
      coeff = sigmoid(x);
    }
    g.d_center += coeff * outputs.row(r).transpose();
    g.d_outputs.row(r) = coeff * center.transpose();
  }
  return g;
}

bool WordEmbeddings::lookup(const std::string& term, Eigen::VectorXd& out) const {
  auto it = rows_.find(term);
  if (it == rows_.end()) {
    out.setZero(static_cast<Eigen::Index>(dim()));
    return false;
  }
  out = vectors_.row(it->second).transpose();
  return true;
}

Eigen::VectorXd WordEmbeddings::vector(const std::string& term) const {
  Eigen::VectorXd v;
  lookup(term, v);
  return v;
}

double WordEmbeddings::affinity(const std::string& center, const std::string& context) const {
  auto a = rows_.find(center);
  auto b = rows_.find(context);
  if (a == rows_.end() || b == rows_.end()) return 0.0;
  return vectors_.row(a->second).dot(contexts_.row(b->second));
}

void WordEmbeddings::write(ByteWriter& w) const {
  write_strings(w, terms_);
  w.put_matrix(vectors_);
  w.put_matrix(contexts_);
}

WordEmbeddings WordEmbeddings::read(ByteReader& r) {
  WordEmbeddings e;
  e.terms_ = read_strings(r);
  e.vectors_ = r.get_matrix();
  e.contexts_ = r.get_matrix();
  if (static_cast<std::size_t>(e.vectors_.rows()) != e.terms_.size() || e.contexts_.rows() != e.vectors_.rows()) {
    throw ParseError("word vector shape mismatch");
  }
  for (std::size_t i = 0; i < e.terms_.size(); ++i) e.rows_.emplace(e.terms_[i], static_cast<int>(i));
  return e;
}

WordEmbeddings train_sgns(const std::vector<Document>& corpus, const SgnsConfig& config) {
  config.validate();
  if (corpus.empty()) throw ValidationError("train_sgns: empty corpus");
  const IndexedCorpus ic = index_corpus(corpus);
  const auto d = static_cast<Eigen::Index>(config.dim);
  const auto v = static_cast<Eigen::Index>(ic.terms.size());

  WordEmbeddings emb;
  emb.terms_ = ic.terms;
  for (std::size_t i = 0; i < ic.terms.size(); ++i) emb.rows_.emplace(ic.terms[i], static_cast<int>(i));
  emb.vectors_.resize(v, d);
  Rng init(derive_seed(config.seed, "sgns.init"));
  const double a = 0.5 / static_cast<double>(config.dim);
  for (Eigen::Index r = 0; r < v; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) emb.vectors_(r, c) = init.uniform(-a, a);
  }
  emb.contexts_ = Eigen::MatrixXd::Zero(v, d);
  run_sgns(
      ic, config, emb.contexts_, "sgns.train",
      [&](int w, Eigen::VectorXd& out) { out = emb.vectors_.row(w).transpose(); },
      [&](int w, const Eigen::VectorXd& grad, double lr) { emb.vectors_.row(w) -= lr * grad.transpose(); });
  return emb;
}

// ---------------------------------------------------------------------------

void SubwordConfig::validate() const {
  sgns.validate();
  if (bucket_count == 0) throw ValidationError("subword: bucket_count must be positive");
  if (min_n == 0 || min_n > max_n) throw ValidationError("subword: need 1 <= min_n <= max_n");
}

std::vector<std::string> char_ngrams(const std::string& word, std::size_t min_n, std::size_t max_n) {
  const std::string padded = "<" + word + ">";
  std::vector<std::size_t> starts;  // code point boundaries
  for (std::size_t i = 0; i < padded.size();) {
    starts.push_back(i);
    i += std::min(utf8_length(static_cast<unsigned char>(padded[i])), padded.size() - i);
  }
  starts.push_back(padded.size());
  const std::size_t n_cp = starts.size() - 1;
  std::vector<std::string> grams;
  for (std::size_t i = 0; i < n_cp; ++i) {
    for (std::size_t n = min_n; n <= max_n && i + n <= n_cp; ++n) {
      grams.push_back(padded.substr(starts[i], starts[i + n] - starts[i]));
    }
  }
  return grams;
}

std::vector<std::uint32_t> SubwordEmbeddings::buckets(const std::string& word) const {
  std::vector<std::uint32_t> ids;
  if (word.empty()) return ids;
  for (const auto& g : char_ngrams(word, min_n_, max_n_)) ids.push_back(fnv1a32(g) % bucket_count_);
  ids.push_back(fnv1a32("<" + word + ">") % bucket_count_);
  return ids;
}

double SubwordEmbeddings::init_value(std::uint32_t bucket, std::size_t j) const {
  const std::uint64_t x = splitmix64(seed_ ^ splitmix64((static_cast<std::uint64_t>(bucket) << 16) ^ j));
  const double u = static_cast<double>(x >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) / static_cast<double>(dim_);
}

Eigen::VectorXd SubwordEmbeddings::bucket_vector(std::uint32_t bucket) const {
  if (auto it = bucket_rows_.find(bucket); it != bucket_rows_.end()) return rows_.row(it->second).transpose();
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim_));
  for (std::size_t j = 0; j < dim_; ++j) v(static_cast<Eigen::Index>(j)) = init_value(bucket, j);
  return v;
}

bool SubwordEmbeddings::lookup(const std::string& word, Eigen::VectorXd& out) const {
  out.setZero(static_cast<Eigen::Index>(dim_));
  const auto ids = buckets(word);
  if (ids.empty()) return false;
  for (auto b : ids) out += bucket_vector(b);
  out /= static_cast<double>(ids.size());
  return true;
}

Eigen::VectorXd SubwordEmbeddings::vector(const std::string& word) const {
  Eigen::VectorXd v;
  lookup(word, v);
  return v;
}

void SubwordEmbeddings::write(ByteWriter& w) const {
  w.put_u64(dim_);
  w.put_u32(bucket_count_);
  w.put_u64(min_n_);
  w.put_u64(max_n_);
  w.put_u64(seed_);
  w.put_u64(bucket_ids_.size());
  for (auto b : bucket_ids_) w.put_u32(b);
  w.put_matrix(rows_);
}

SubwordEmbeddings SubwordEmbeddings::read(ByteReader& r) {
  SubwordEmbeddings e;
  e.dim_ = r.get_u64();
  e.bucket_count_ = r.get_u32();
  e.min_n_ = r.get_u64();
  e.max_n_ = r.get_u64();
  e.seed_ = r.get_u64();
  if (e.bucket_count_ == 0 || e.min_n_ == 0 || e.min_n_ > e.max_n_) throw ParseError("invalid subword header");
  const std::uint64_t n = r.get_u64();
  if (n > r.remaining() / 4) throw ParseError("truncated subword bucket table");
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint32_t b = r.get_u32();
    e.bucket_rows_.emplace(b, static_cast<int>(i));
    e.bucket_ids_.push_back(b);
  }
  e.rows_ = r.get_matrix();
  if (static_cast<std::uint64_t>(e.rows_.rows()) != n || (n > 0 && static_cast<std::size_t>(e.rows_.cols()) != e.dim_)) {
    throw ParseError("subword matrix shape mismatch");
  }
  return e;
}

SubwordEmbeddings train_subword(const std::vector<Document>& corpus, const SubwordConfig& config) {
  config.validate();
  if (corpus.empty()) throw ValidationError("train_subword: empty corpus");
  const IndexedCorpus ic = index_corpus(corpus);
  SubwordEmbeddings emb;
  emb.dim_ = config.sgns.dim;
  emb.bucket_count_ = config.bucket_count;
  emb.min_n_ = config.min_n;
  emb.max_n_ = config.max_n;
  emb.seed_ = derive_seed(config.sgns.seed, "subword.init");

  std::vector<std::vector<std::uint32_t>> word_buckets;
  std::set<std::uint32_t> all;
  for (const auto& t : ic.terms) {
    word_buckets.push_back(emb.buckets(t));
    all.insert(word_buckets.back().begin(), word_buckets.back().end());
  }
  emb.bucket_ids_.assign(all.begin(), all.end());
  const auto d = static_cast<Eigen::Index>(emb.dim_);
  emb.rows_.resize(static_cast<Eigen::Index>(emb.bucket_ids_.size()), d);
  for (std::size_t i = 0; i < emb.bucket_ids_.size(); ++i) {
    emb.bucket_rows_.emplace(emb.bucket_ids_[i], static_cast<int>(i));
    for (std::size_t j = 0; j < emb.dim_; ++j) {
      emb.rows_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = emb.init_value(emb.bucket_ids_[i], j);
    }
  }
  // Word -> row indices into rows_.
  std::vector<std::vector<int>> word_rows(word_buckets.size());
  for (std::size_t w = 0; w < word_buckets.size(); ++w) {
    for (auto b : word_buckets[w]) word_rows[w].push_back(emb.bucket_rows_.at(b));
  }

  Eigen::MatrixXd outputs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ic.terms.size()), d);
  run_sgns(
      ic, config.sgns, outputs, "subword.train",
      [&](int w, Eigen::VectorXd& out) {
        out.setZero(d);
        for (int r : word_rows[w]) out += emb.rows_.row(r).transpose();
        out /= static_cast<double>(word_rows[w].size());
      },
      [&](int w, const Eigen::VectorXd& grad, double lr) {
        const double share = lr / static_cast<double>(word_rows[w].size());
        for (int r : word_rows[w]) emb.rows_.row(r) -= share * grad.transpose();
      });
  return emb;
}

// ---------------------------------------------------------------------------

LabelCentroids build_label_centroids(const Eigen::MatrixXd& vectors, const std::vector<std::vector<int>>& labels,
                                     std::size_t num_labels) {
  if (static_cast<std::size_t>(vectors.rows()) != labels.size()) {
    throw ValidationError("build_label_centroids: one label set per vector row required");
  }
  LabelCentroids out;
  out.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_labels), vectors.cols());
  std::vector<std::size_t> counts(num_labels, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int k : labels[i]) {
      out.centroids.row(k) += vectors.row(static_cast<Eigen::Index>(i));
      ++counts[k];
    }
  }
  for (std::size_t k = 0; k < num_labels; ++k) {
    if (counts[k] == 0) {
      out.warnings.push_back("label " + std::to_string(k) + " has no training samples; centroid set to zero");
    } else {
      out.centroids.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(counts[k]);
    }
  }
  return out;
}

LabelCentroids build_label_centroids(const std::vector<SparseVec>& vectors, std::size_t dim,
                                     const std::vector<std::vector<int>>& labels, std::size_t num_labels) {
  if (vectors.size() != labels.size()) {
    throw ValidationError("build_label_centroids: one label set per vector required");
  }
  LabelCentroids out;
  out.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_labels), static_cast<Eigen::Index>(dim));
  std::vector<std::size_t> counts(num_labels, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int k : labels[i]) {
      for (SparseVec::InnerIterator it(vectors[i]); it; ++it) out.centroids(k, it.index()) += it.value();
      ++counts[k];
    }
  }
  for (std::size_t k = 0; k < num_labels; ++k) {
    if (counts[k] == 0) {
      out.warnings.push_back("label " + std::to_string(k) + " has no training samples; centroid set to zero");
    } else {
      out.centroids.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(counts[k]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

NormalizeConfig strip_config(const NormalizeConfig& base) {
  NormalizeConfig c = base;
  c.emoji_mode = EmojiMode::kStrip;
  return c;
}

}  // namespace

Document word_document(const std::string& raw, const CorpusOptions& options) {
  const std::string stripped = strip_emoji(raw, *options.lexicon);
  return tokenize(normalize(stripped, strip_config(options.normalize), *options.lexicon)).tokens;
}

std::string sentence_symbol(const std::string& raw, const CorpusOptions& options) {
  return normalize(strip_emoji(raw, *options.lexicon), strip_config(options.normalize), *options.lexicon);
}

std::vector<Document> build_word_corpus(const Dataset& dataset, const CorpusOptions& options) {
  std::vector<Document> docs;
  docs.reserve(2 * dataset.size());
  for (const auto& s : dataset.samples) {
    docs.push_back(word_document(s.text, options));
    docs.push_back(word_document(s.reply, options));
  }
  return docs;
}

std::vector<Document> build_sentence_corpus(const Dataset& dataset, const CorpusOptions& options) {
  std::vector<Document> docs;
  docs.reserve(dataset.size());
  for (const auto& s : dataset.samples) {
    Document doc;
    for (const auto* field : {&s.text, &s.reply}) {
      std::string sym = sentence_symbol(*field, options);
      if (!sym.empty()) doc.push_back(std::move(sym));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

double keyword_weight(const SparseVec& v, std::size_t top_k) {
  std::vector<double> w;
  for (SparseVec::InnerIterator it(v); it; ++it) w.push_back(it.value());
  std::sort(w.begin(), w.end(), std::greater<>());
  if (w.size() > top_k) w.resize(top_k);
  double sum = 0.0;
  for (double x : w) sum += x;
  return sum;
}

StatisticalFeatures statistical_features(const Sample& sample, const EmojiLexicon& lexicon, const TfIdfModel& tfidf,
                                         const CorpusOptions& options, std::size_t top_k) {
  StatisticalFeatures f;
  const Document text = word_document(sample.text, options);
  const Document reply = word_document(sample.reply, options);
  f.emoji_count_text = static_cast<double>(count_emoji(sample.text, lexicon));
  f.emoji_count_reply = static_cast<double>(count_emoji(sample.reply, lexicon));
  f.token_count_text = static_cast<double>(text.size());
  f.token_count_reply = static_cast<double>(reply.size());
  f.keyword_weight_text = keyword_weight(tfidf.transform(text), top_k);
  f.keyword_weight_reply = keyword_weight(tfidf.transform(reply), top_k);
  return f;
}

// ---------------------------------------------------------------------------

void FeatureBankConfig::validate() const {
  word.validate();
  sentence.validate();
  subword.validate();
  if (keyword_top_k == 0) throw ValidationError("keyword_top_k must be positive");
}

const std::vector<std::string>& feature_schema() {
  static const std::vector<std::string> schema = [] {
    std::vector<std::string> s;
    for (const char* src : kSources) {
      for (const char* field : kFields) {
        for (const char* metric : kMetrics) s.push_back(std::string(src) + "." + field + "." + metric);
      }
    }
    for (const char* enc : {"pointwise_emb", "pairwise_emb"}) {
      for (const char* metric : kMetrics) s.push_back(std::string(enc) + "." + metric);
    }
    s.push_back("pointwise_score");
    s.push_back("pairwise_score");
    for (const char* stat : {"emoji_count_text", "emoji_count_reply", "token_count_text", "token_count_reply",
                             "keyword_weight_text", "keyword_weight_reply"}) {
      s.push_back(stat);
    }
    return s;
  }();
  return schema;
}

void FeatureBank::check_ready() const {
  if (!fitted_) throw ValidationError("feature bank is not fitted");
}

void FeatureBank::cache_norms() {
  for (std::size_t f = 0; f < 2; ++f) {
    tfidf_norms_[f].clear();
    const Eigen::MatrixXd& c = centroids_[f];
    for (Eigen::Index k = 0; k < c.rows(); ++k) tfidf_norms_[f].push_back(DenseNorms::of(c.row(k).transpose()));
  }
}

FeatureBank FeatureBank::fit(const Dataset& train, const LabelVocab& vocab, EncoderModel pointwise,
                             EncoderModel pairwise, const FeatureBankConfig& config, const NormalizeConfig& normalize,
                             const EmojiLexicon& lexicon) {
  config.validate();
  if (train.empty() || !train.labeled) throw ValidationError("feature bank must be fitted on labeled training data");
  const std::size_t K = vocab.size();
  if (pointwise.num_categories() != K || pairwise.num_categories() != K) {
    throw ValidationError("encoder category count does not match the label vocabulary");
  }

  FeatureBank bank;
  bank.num_categories_ = K;
  bank.keyword_top_k_ = config.keyword_top_k;
  bank.normalize_ = normalize;
  bank.lexicon_ = &lexicon;
  bank.pointwise_ = std::move(pointwise);
  bank.pairwise_ = std::move(pairwise);

  const CorpusOptions opts{normalize, &lexicon};
  const std::vector<Document> words = build_word_corpus(train, opts);
  bank.tfidf_ = TfIdfModel::fit(words);
  bank.word_ = train_sgns(words, config.word);
  bank.subword_ = train_subword(words, config.subword);
  bank.sentence_ = train_sgns(build_sentence_corpus(train, opts), config.sentence);
  bank.fitted_ = true;

  const std::size_t n = train.size();
  std::vector<std::vector<int>> labels;
  labels.reserve(n);
  std::array<std::vector<SparseVec>, 2> tfidf_vecs;
  std::array<std::array<Eigen::MatrixXd, 2>, 3> dense;
  for (auto& src : dense) {
    for (auto& m : src) m.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(config.word.dim));
  }
  for (std::size_t s = 0; s < 3; ++s) {
    const std::size_t dim = s == 0 ? bank.word_.dim() : (s == 1 ? bank.subword_.dim() : bank.sentence_.dim());
    for (auto& m : dense[s]) m.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& sample = train.samples[i];
    labels.push_back(gold_ids(sample, vocab));
    SampleVectors sv = bank.prepare(sample);
    for (std::size_t f = 0; f < 2; ++f) {
      tfidf_vecs[f].push_back(std::move(sv.tfidf[f]));
      for (std::size_t s = 0; s < 3; ++s) dense[s][f].row(static_cast<Eigen::Index>(i)) = sv.dense[s][f].transpose();
    }
  }
  for (std::size_t f = 0; f < 2; ++f) {
    LabelCentroids c = build_label_centroids(tfidf_vecs[f], bank.tfidf_.dim(), labels, K);
    if (f == 0) bank.warnings_ = c.warnings;
    bank.centroids_[f] = std::move(c.centroids);
    for (std::size_t s = 0; s < 3; ++s) {
      bank.centroids_[(s + 1) * 2 + f] = build_label_centroids(dense[s][f], labels, K).centroids;
    }
  }
  bank.cache_norms();
  return bank;
}

SampleVectors FeatureBank::prepare(const Sample& sample) const {
  check_ready();
  const CorpusOptions opts{normalize_, lexicon_};
  SampleVectors sv;
  std::array<const std::string*, 2> fields = {&sample.text, &sample.reply};
  for (std::size_t f = 0; f < 2; ++f) {
    const Document doc = word_document(*fields[f], opts);
    sv.tfidf[f] = tfidf_.transform(doc);
    sv.dense[0][f] = sentence_vector(word_, doc);
    sv.dense[1][f] = sentence_vector(subword_, doc);
    const std::string sym = sentence_symbol(*fields[f], opts);
    sv.dense[2][f] = sentence_.vector(sym);
  }
  const TokenizedText pair = preprocess_pair(sample.text, sample.reply, normalize_, *lexicon_);
  sv.query_pointwise = encode_pair(pointwise_, pair);
  sv.query_pairwise = encode_pair(pairwise_, pair);
  sv.stats = statistical_features(sample, *lexicon_, tfidf_, opts, keyword_top_k_);
  return sv;
}

Eigen::VectorXd FeatureBank::assemble(const SampleVectors& sv, int candidate) const {
  check_ready();
  if (candidate < 0 || static_cast<std::size_t>(candidate) >= num_categories_) {
    throw ValidationError("candidate id " + std::to_string(candidate) + " out of range [0," +
                          std::to_string(num_categories_) + ")");
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(feature_schema().size()));
  Eigen::Index at = 0;
  auto push = [&](const Distances<double>& d) {
    x(at++) = d.euclidean;
    x(at++) = d.manhattan;
    x(at++) = d.cosine;
  };
  for (std::size_t f = 0; f < 2; ++f) {
    push(distances(sv.tfidf[f], centroids_[f].row(candidate).transpose(), tfidf_norms_[f][candidate]));
  }
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t f = 0; f < 2; ++f) {
      push(distances(sv.dense[s][f], centroids_[(s + 1) * 2 + f].row(candidate).transpose()));
    }
  }
  const auto e_point = pointwise_.category_embeddings.row(candidate).transpose();
  const auto e_pair = pairwise_.category_embeddings.row(candidate).transpose();
  push(distances(sv.query_pointwise, e_point));
  push(distances(sv.query_pairwise, e_pair));
  x(at++) = sv.query_pointwise.dot(e_point);
  x(at++) = sv.query_pairwise.dot(e_pair);
  x(at++) = sv.stats.emoji_count_text;
  x(at++) = sv.stats.emoji_count_reply;
  x(at++) = sv.stats.token_count_text;
  x(at++) = sv.stats.token_count_reply;
  x(at++) = sv.stats.keyword_weight_text;
  x(at++) = sv.stats.keyword_weight_reply;
  return x;
}

FeatureVector FeatureBank::assemble_features(const Sample& sample, int candidate) const {
  return {assemble(prepare(sample), candidate), &feature_schema()};
}

Eigen::MatrixXd FeatureBank::assemble_all(const Sample& sample) const {
  const SampleVectors sv = prepare(sample);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(num_categories_), static_cast<Eigen::Index>(feature_schema().size()));
  for (std::size_t c = 0; c < num_categories_; ++c) {
    rows.row(static_cast<Eigen::Index>(c)) = assemble(sv, static_cast<int>(c)).transpose();
  }
  return rows;
}

std::string FeatureBank::save() const {
  check_ready();
  ByteWriter w;
  w.put_header(kMagic, kVersion);
  w.put_u64(config_hash);
  w.put_u64(schema_hash(feature_schema()));
  w.put_u64(num_categories_);
  w.put_u64(keyword_top_k_);
  tfidf_.write(w);
  word_.write(w);
  subword_.write(w);
  sentence_.write(w);
  for (const auto& c : centroids_) w.put_matrix(c);
  write_strings(w, warnings_);
  return w.take();
}

FeatureBank FeatureBank::load(std::string_view bytes, EncoderModel pointwise, EncoderModel pairwise,
                              const NormalizeConfig& normalize, const EmojiLexicon& lexicon) {
  ByteReader r(bytes);
  r.expect_header(kMagic, kVersion);
  FeatureBank bank;
  bank.config_hash = r.get_u64();
  if (r.get_u64() != schema_hash(feature_schema())) throw ValidationError("feature bank schema hash mismatch");
  bank.num_categories_ = r.get_u64();
  bank.keyword_top_k_ = r.get_u64();
  bank.tfidf_ = TfIdfModel::read(r);
  bank.word_ = WordEmbeddings::read(r);
  bank.subword_ = SubwordEmbeddings::read(r);
  bank.sentence_ = WordEmbeddings::read(r);
  for (auto& c : bank.centroids_) c = r.get_matrix();
  bank.warnings_ = read_strings(r);
  r.expect_end();
  if (pointwise.num_categories() != bank.num_categories_ || pairwise.num_categories() != bank.num_categories_) {
    throw ValidationError("encoder category count does not match the feature bank");
  }
  for (std::size_t i = 0; i < bank.centroids_.size(); ++i) {
    if (static_cast<std::size_t>(bank.centroids_[i].rows()) != bank.num_categories_) {
      throw ParseError("feature bank centroid shape mismatch");
    }
  }
  bank.pointwise_ = std::move(pointwise);
  bank.pairwise_ = std::move(pairwise);
  bank.normalize_ = normalize;
  bank.lexicon_ = &lexicon;
  bank.fitted_ = true;
  bank.cache_norms();
  return bank;
}

std::string features_to_tsv(const std::vector<std::string>& schema, const std::vector<std::int64_t>& idx,
                            const std::vector<int>& candidates, const std::vector<int>& relevance,
                            const Eigen::MatrixXd& rows) {
  if (static_cast<std::size_t>(rows.cols()) != schema.size() || idx.size() != static_cast<std::size_t>(rows.rows()) ||
      candidates.size() != idx.size() || relevance.size() != idx.size()) {
    throw ValidationError("features_to_tsv: inconsistent table shape");
  }
  std::string out = "idx\tcandidate\trelevance";
  for (const auto& name : schema) out += "\t" + name;
  out += '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    out += std::to_string(idx[r]) + "\t" + std::to_string(candidates[r]) + "\t" + std::to_string(relevance[r]);
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "\t%.17g", rows(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace gifrank
