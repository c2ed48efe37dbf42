#include "gifrank/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gifrank {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kReranker: return "reranker";
    case Backend::kPairwise: return "pairwise";
    case Backend::kPointwise: return "pointwise";
  }
  return "?";
}

Backend parse_backend(std::string_view name) {
  if (name == "reranker") return Backend::kReranker;
  if (name == "pairwise") return Backend::kPairwise;
  if (name == "pointwise") return Backend::kPointwise;
  throw ValidationError("unknown backend '" + std::string(name) + "' (expected reranker, pairwise or pointwise)");
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Config <-> JSON. One field walk serves both directions.

namespace {

std::string join_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

class ConfigReader {
 public:
  explicit ConfigReader(const json& root) { stack_.push_back({&root, "", {}}); }

  void enter(const char* key) {
    Frame& top = stack_.back();
    top.seen.insert(key);
    const std::string path = join_path(top.path, key);
    const json* child = &empty_;
    if (top.node->contains(key)) {
      child = &(*top.node)[key];
      if (!child->is_object()) throw SchemaError("config: " + path + " must be an object");
    }
    stack_.push_back({child, path, {}});
  }

  void leave() {
    const Frame& top = stack_.back();
    for (const auto& [k, v] : top.node->items()) {
      if (!top.seen.count(k)) throw SchemaError("config: unknown key " + join_path(top.path, k));
    }
    stack_.pop_back();
  }

  template <typename T>
  void field(const char* key, T& out) {
    Frame& top = stack_.back();
    top.seen.insert(key);
    if (!top.node->contains(key)) return;
    const json& v = (*top.node)[key];
    const std::string path = join_path(top.path, key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw SchemaError("config: " + path + " must be a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned()) throw SchemaError("config: " + path + " must be a non-negative integer");
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
        throw SchemaError("config: " + path + " is out of range");
      }
      out = static_cast<T>(u);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw SchemaError("config: " + path + " must be a number");
      out = v.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw SchemaError("config: " + path + " must be a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, EmojiMode>) {
      if (!v.is_string()) throw SchemaError("config: " + path + " must be a string");
      const auto s = v.get<std::string>();
      if (s == "convert") {
        out = EmojiMode::kConvertToMeaning;
      } else if (s == "strip") {
        out = EmojiMode::kStrip;
      } else {
        throw SchemaError("config: " + path + " must be \"convert\" or \"strip\"");
      }
    } else if constexpr (std::is_same_v<T, Backend>) {
      if (!v.is_string()) throw SchemaError("config: " + path + " must be a string");
      try {
        out = parse_backend(v.get<std::string>());
      } catch (const ValidationError& e) {
        throw SchemaError("config: " + path + ": " + e.what());
      }
    } else {
      static_assert(sizeof(T) == 0, "unsupported config field type");
    }
  }

 private:
  struct Frame {
    const json* node;
    std::string path;
    std::set<std::string> seen;
  };
  std::vector<Frame> stack_;
  const json empty_ = json::object();
};

class ConfigWriter {
 public:
  ConfigWriter() { stack_.emplace_back(ojson::object()); }

  void enter(const char* key) {
    keys_.emplace_back(key);
    stack_.emplace_back(ojson::object());
  }
  void leave() {
    ojson done = std::move(stack_.back());
    stack_.pop_back();
    stack_.back()[keys_.back()] = std::move(done);
    keys_.pop_back();
  }

  template <typename T>
  void field(const char* key, const T& v) {
    if constexpr (std::is_same_v<T, EmojiMode>) {
      stack_.back()[key] = v == EmojiMode::kStrip ? "strip" : "convert";
    } else if constexpr (std::is_same_v<T, Backend>) {
      stack_.back()[key] = std::string(backend_name(v));
    } else {
      stack_.back()[key] = v;
    }
  }

  ojson result() { return std::move(stack_.front()); }

 private:
  std::vector<ojson> stack_;
  std::vector<std::string> keys_;
};

template <typename V, typename C>
void walk_sgns(V& v, C& s) {
  v.field("dim", s.dim);
  v.field("window", s.window);
  v.field("negatives", s.negatives);
  v.field("epochs", s.epochs);
  v.field("learning_rate", s.learning_rate);
  v.field("noise_power", s.noise_power);
}

template <typename V, typename C>
void walk_encoder(V& v, C& e) {
  v.field("token_dim", e.token_dim);
  v.field("category_dim", e.category_dim);
  v.field("vocab_size", e.vocab_size);
  v.field("margin", e.margin);
  v.field("negatives_per_positive", e.negatives_per_positive);
  v.field("epochs", e.epochs);
  v.field("batch_size", e.batch_size);
  v.field("lr0", e.lr0);
  v.field("lr_decay", e.lr_decay);
  v.field("lr_step_epochs", e.lr_step_epochs);
  v.field("init_scale", e.init_scale);
}

template <typename V, typename C>
void walk_trees(V& v, C& t) {
  v.field("max_depth", t.max_depth);
  v.field("min_samples_leaf", t.min_samples_leaf);
  v.field("num_trees", t.num_trees);
  v.field("shrinkage", t.shrinkage);
  v.field("histogram_bins", t.histogram_bins);
  v.field("early_stopping_rounds", t.early_stopping_rounds);
  v.field("map_weighted", t.map_weighted);
}

template <typename V, typename C>
void walk_config(V& v, C& c, bool include_run_options) {
  v.field("seed", c.seed);
  if (include_run_options) {
    v.enter("paths");
    v.field("train", c.paths.train);
    v.field("target", c.paths.target);
    v.field("artifacts", c.paths.artifacts);
    v.field("predictions", c.paths.predictions);
    v.leave();
  }
  v.enter("split");
  v.field("train_fraction", c.train_fraction);
  v.leave();

  v.enter("normalize");
  v.field("user_token", c.normalize.user_token);
  v.field("url_token", c.normalize.url_token);
  v.field("number_token", c.normalize.number_token);
  v.field("emoji_mode", c.normalize.emoji_mode);
  v.field("emoji_lexicon", c.emoji_lexicon);
  v.leave();

  v.enter("encoder");
  v.enter("pointwise");
  walk_encoder(v, c.pointwise);
  v.leave();
  v.enter("pairwise");
  walk_encoder(v, c.pairwise);
  v.leave();
  v.leave();

  v.enter("features");
  v.enter("word");
  walk_sgns(v, c.features.word);
  v.leave();
  v.enter("sentence");
  walk_sgns(v, c.features.sentence);
  v.leave();
  v.enter("subword");
  walk_sgns(v, c.features.subword.sgns);
  v.field("bucket_count", c.features.subword.bucket_count);
  v.field("min_n", c.features.subword.min_n);
  v.field("max_n", c.features.subword.max_n);
  v.leave();
  v.field("keyword_top_k", c.features.keyword_top_k);
  v.leave();

  v.enter("reranker");
  v.field("negatives_per_positive", c.reranker_negatives_per_positive);
  v.enter("trees");
  walk_trees(v, c.reranker);
  v.leave();
  v.leave();

  v.enter("hpo");
  v.field("shrinkage_min", c.hpo.shrinkage_min);
  v.field("shrinkage_max", c.hpo.shrinkage_max);
  v.field("depth_min", c.hpo.depth_min);
  v.field("depth_max", c.hpo.depth_max);
  v.field("trees_min", c.hpo.trees_min);
  v.field("trees_max", c.hpo.trees_max);
  v.field("leaf_min", c.hpo.leaf_min);
  v.field("leaf_max", c.hpo.leaf_max);
  v.field("budget", c.hpo.budget);
  v.leave();

  if (include_run_options) {
    v.enter("predict");
    v.field("backend", c.backend);
    v.leave();
  }

  v.enter("synthetic");
  v.field("num_samples", c.synthetic.num_samples);
  v.field("num_labels", c.synthetic.num_labels);
  v.field("strength", c.synthetic.strength);
  v.field("vocab_size", c.synthetic.vocab_size);
  v.field("signature_tokens", c.synthetic.signature_tokens);
  v.field("emoji_rate", c.synthetic.emoji_rate);
  v.leave();
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("config: top level must be an object");
  PipelineConfig c;
  ConfigReader r(root);
  walk_config(r, c, true);
  r.leave();
  return c;
}

PipelineConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string config_to_json(const PipelineConfig& config, bool include_run_options) {
  ConfigWriter w;
  walk_config(w, config, include_run_options);
  return w.result().dump(2) + "\n";
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(config_to_json(*this, false)); }

PipelineConfig PipelineConfig::resolved() const {
  PipelineConfig c = *this;
  c.pointwise.seed = derive_seed(seed, "encoder.pointwise");
  c.pairwise.seed = derive_seed(seed, "encoder.pairwise");
  c.features.word.seed = derive_seed(seed, "features.word");
  c.features.sentence.seed = derive_seed(seed, "features.sentence");
  c.features.subword.sgns.seed = derive_seed(seed, "features.subword");
  c.hpo.seed = derive_seed(seed, "hpo");
  c.hpo.base = reranker;
  c.synthetic.seed = derive_seed(seed, "synthetic");
  return c;
}

void PipelineConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ValidationError("split.train_fraction must lie in (0, 1]");
  if (reranker_negatives_per_positive == 0) throw ValidationError("reranker.negatives_per_positive must be positive");
  normalize.validate();
  pointwise.validate();
  pairwise.validate();
  features.validate();
  reranker.validate();
  HpoSpace h = hpo;
  h.base = reranker;
  h.validate();
  synthetic.validate();
}

// ---------------------------------------------------------------------------
// Lock

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw ArtifactError("artifact directory " + dir.string() + " is locked by another run (remove " +
                          path_.string() + " if no run is active)");
    }
    throw Error("cannot create lock " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

// ---------------------------------------------------------------------------
// Feature tables

RankingMatrix parse_feature_table(std::string_view tsv) {
  auto split = [](std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    return out;
  };
  auto next_line = [&](std::size_t& pos) {
    const std::size_t nl = tsv.find('\n', pos);
    std::string_view line = tsv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? tsv.size() : nl + 1;
    return line;
  };

  std::size_t pos = 0;
  const auto header = split(next_line(pos));
  if (header.size() < 4 || header[0] != "idx" || header[1] != "candidate" || header[2] != "relevance") {
    throw ParseError("feature table: header must start with idx, candidate, relevance");
  }
  std::vector<std::string> schema(header.begin() + 3, header.end());
  const std::size_t F = schema.size();
  RankingBuilder builder(schema);

  std::vector<int> cands, rels;
  std::vector<double> values;
  std::int64_t current = 0;
  auto flush = [&] {
    if (cands.empty()) return;
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(cands.size()), static_cast<Eigen::Index>(F));
    for (std::size_t r = 0; r < cands.size(); ++r) {
      for (std::size_t f = 0; f < F; ++f) rows(r, f) = values[r * F + f];
    }
    builder.add_group(current, cands, rels, rows);
    cands.clear();
    rels.clear();
    values.clear();
  };

  std::size_t line_no = 1;
  std::string cell;
  while (pos < tsv.size()) {
    ++line_no;
    const std::string_view line = next_line(pos);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != F + 3) {
      throw ParseError("feature table line " + std::to_string(line_no) + ": expected " + std::to_string(F + 3) +
                       " columns, got " + std::to_string(cells.size()));
    }
    auto number = [&](std::string_view s) {
      cell.assign(s);
      char* end = nullptr;
      const double d = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw ParseError("feature table line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      return d;
    };
    const auto idx = static_cast<std::int64_t>(number(cells[0]));
    if (!cands.empty() && idx != current) flush();
    current = idx;
    cands.push_back(static_cast<int>(number(cells[1])));
    rels.push_back(static_cast<int>(number(cells[2])));
    for (std::size_t f = 0; f < F; ++f) values.push_back(number(cells[3 + f]));
  }
  flush();
  return builder.finish();
}

// ---------------------------------------------------------------------------
// Stage plumbing

namespace {

constexpr const char* kTrainSplit = "train.jsonl";
constexpr const char* kValSplit = "val.jsonl";
constexpr const char* kFeatBank = "featbank.bin";
constexpr const char* kFeaturesTrain = "features_train.tsv";
constexpr const char* kFeaturesVal = "features_val.tsv";
constexpr const char* kReranker = "reranker.bin";
constexpr const char* kHpoBest = "hpo_best.json";

std::string encoder_file(TrainMode mode) { return "encoder_" + std::string(mode_name(mode)) + ".bin"; }
std::string encoder_stage(TrainMode mode) { return "train-encoder." + std::string(mode_name(mode)); }

std::string command_for(const std::string& stage) {
  if (stage == encoder_stage(TrainMode::kPointwise)) return "train-encoder --mode pointwise";
  if (stage == encoder_stage(TrainMode::kPairwise)) return "train-encoder --mode pairwise";
  return stage;
}

class Workspace {
 public:
  explicit Workspace(const PipelineConfig& config) : cfg_(config.resolved()), hash_(config.hash()) {
    cfg_.validate();
    if (!cfg_.emoji_lexicon.empty()) own_lexicon_ = std::make_unique<EmojiLexicon>(EmojiLexicon::load(cfg_.emoji_lexicon));
    fs::create_directories(dir());
  }

  const PipelineConfig& cfg() const { return cfg_; }
  std::uint64_t hash() const { return hash_; }
  fs::path dir() const { return cfg_.artifact_dir(); }
  std::string file(const std::string& name) const { return (dir() / name).string(); }
  const EmojiLexicon& lexicon() const { return own_lexicon_ ? *own_lexicon_ : EmojiLexicon::builtin(); }

  // Stamp of an upstream stage; throws when missing or stale.
  json require(const std::string& stage) const {
    const fs::path p = dir() / ("stage." + stage + ".json");
    if (!fs::exists(p)) {
      throw ArtifactError("missing artifact " + p.string() + ": run `gifrank " + command_for(stage) + "` first");
    }
    json j;
    try {
      j = json::parse(read_file(p.string()));
    } catch (const json::exception& e) {
      throw ParseError("stage stamp " + p.string() + ": " + e.what());
    }
    if (j.value("format_version", 0u) != kArtifactFormatVersion) {
      throw VersionError("stage stamp " + p.string() + " has an unsupported format version");
    }
    const std::string got = j.value("config_hash", "");
    if (got != hash_hex(hash_)) {
      throw ArtifactError("stale artifact: stage " + stage + " ran with config " + got + " but the current config is " +
                          hash_hex(hash_) + "; rerun `gifrank " + command_for(stage) + "`");
    }
    return j;
  }

  void stamp(const std::string& stage, const std::vector<std::string>& outputs, ojson extra = ojson::object()) const {
    ojson j;
    j["stage"] = stage;
    j["format_version"] = kArtifactFormatVersion;
    j["config_hash"] = hash_hex(hash_);
    j["outputs"] = outputs;
    for (auto& [k, v] : extra.items()) j[k] = v;
    write_file(file("stage." + stage + ".json"), j.dump(2) + "\n");
  }

  void check_model_hash(std::uint64_t h, const std::string& what, const std::string& stage) const {
    if (h != hash_) {
      throw ArtifactError("stale artifact: " + what + " was built with config " + hash_hex(h) +
                          "; rerun `gifrank " + command_for(stage) + "`");
    }
  }

  LabelVocab vocab() const {
    const json j = require("preprocess");
    return LabelVocab(j.at("labels").get<std::vector<std::string>>());
  }

  EncoderModel encoder(TrainMode mode) const {
    require(encoder_stage(mode));
    EncoderModel m = load_encoder(read_file(file(encoder_file(mode))));
    check_model_hash(m.config_hash, encoder_file(mode), encoder_stage(mode));
    return m;
  }

  FeatureBank bank() const {
    require("build-features");
    FeatureBank b = FeatureBank::load(read_file(file(kFeatBank)), encoder(TrainMode::kPointwise),
                                      encoder(TrainMode::kPairwise), cfg_.normalize, lexicon());
    check_model_hash(b.config_hash, kFeatBank, "build-features");
    return b;
  }

  const EncoderConfig& encoder_config(TrainMode mode) const {
    return mode == TrainMode::kPointwise ? cfg_.pointwise : cfg_.pairwise;
  }

 private:
  PipelineConfig cfg_;
  std::uint64_t hash_;
  std::unique_ptr<EmojiLexicon> own_lexicon_;
};

void say(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << '\n';
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

ojson trees_json(const TreeParams& t) {
  ConfigWriter w;
  walk_trees(w, t);
  return w.result();
}

}  // namespace

PreprocessSummary run_preprocess(const PipelineConfig& config, std::ostream* log) {
  Workspace ws(config);
  if (ws.cfg().paths.train.empty()) throw ValidationError("paths.train is not set");
  const Dataset all = load_samples(ws.cfg().paths.train, true);
  auto [train, val] = split_dataset(all, {ws.cfg().train_fraction, derive_seed(ws.cfg().seed, "split")});
  PreprocessSummary s{train.size(), val.size(), build_label_vocab(all)};
  save_samples(train, ws.file(kTrainSplit));
  save_samples(val, ws.file(kValSplit));
  ojson extra;
  extra["train_count"] = s.train;
  extra["val_count"] = s.val;
  extra["labels"] = s.vocab.names();
  ws.stamp("preprocess", {kTrainSplit, kValSplit}, extra);
  say(log, "preprocess: " + std::to_string(s.train) + " train / " + std::to_string(s.val) + " val, " +
               std::to_string(s.vocab.size()) + " labels");
  return s;
}

EncoderTrainResult run_train_encoder(const PipelineConfig& config, TrainMode mode, std::ostream* log) {
  Workspace ws(config);
  const LabelVocab vocab = ws.vocab();
  const Dataset train = load_samples(ws.file(kTrainSplit), true);
  const Dataset val = load_samples(ws.file(kValSplit), true);
  const auto& ec = ws.encoder_config(mode);
  const auto train_pairs = make_labeled_pairs(train, vocab, ws.cfg().normalize, ws.lexicon());
  const auto val_pairs = make_labeled_pairs(val, vocab, ws.cfg().normalize, ws.lexicon());

  std::vector<TokenizedText> corpus;
  corpus.reserve(train_pairs.size());
  for (const auto& p : train_pairs) corpus.push_back(p.pair);
  EncoderModel model = init_encoder(TokenIndex::build(corpus, ec.vocab_size), vocab.size(), ec);
  EncoderTrainResult r = train_encoder(std::move(model), train_pairs, val_pairs, mode, ec);
  r.model.config_hash = ws.hash();

  const std::string name = encoder_file(mode);
  const std::string history = "encoder_" + std::string(mode_name(mode)) + "_history.jsonl";
  write_file(ws.file(name), save_encoder(r.model));
  std::string lines;
  for (const auto& e : r.history) {
    ojson j;
    j["epoch"] = e.epoch;
    j["learning_rate"] = e.learning_rate;
    j["train_loss"] = e.train_loss;
    j["val_map"] = e.val_map;
    lines += j.dump() + "\n";
  }
  write_file(ws.file(history), lines);

  ojson extra;
  extra["best_epoch"] = r.best_epoch;
  extra["val_map"] = r.history.empty() ? 0.0 : r.history[r.best_epoch].val_map;
  ws.stamp(encoder_stage(mode), {name, history}, extra);
  say(log, "train-encoder " + std::string(mode_name(mode)) + ": best epoch " + std::to_string(r.best_epoch) +
               ", val MAP@6 " + fmt(extra["val_map"].get<double>()));
  return r;
}

FeatureSummary run_build_features(const PipelineConfig& config, std::ostream* log) {
  Workspace ws(config);
  const LabelVocab vocab = ws.vocab();
  const Dataset train = load_samples(ws.file(kTrainSplit), true);
  const Dataset val = load_samples(ws.file(kValSplit), true);
  FeatureBank bank = FeatureBank::fit(train, vocab, ws.encoder(TrainMode::kPointwise), ws.encoder(TrainMode::kPairwise),
                                      ws.cfg().features, ws.cfg().normalize, ws.lexicon());
  bank.config_hash = ws.hash();
  write_file(ws.file(kFeatBank), bank.save());

  const std::size_t K = vocab.size();
  const auto& schema = bank.schema();
  FeatureSummary summary;
  summary.warnings = bank.warnings();
  Rng rng(derive_seed(ws.cfg().seed, "reranker.candidates"));

  auto table = [&](const Dataset& data, bool all_candidates, std::size_t& rows_out) {
    std::vector<std::int64_t> idx;
    std::vector<int> cands, rels;
    std::vector<Eigen::VectorXd> rows;
    for (const auto& s : data.samples) {
      const std::vector<int> gold = gold_ids(s, vocab);
      std::vector<int> group;
      if (all_candidates) {
        for (std::size_t c = 0; c < K; ++c) group.push_back(static_cast<int>(c));
      } else {
        const std::size_t n = std::min(ws.cfg().reranker_negatives_per_positive * gold.size(), K - gold.size());
        group = sample_negatives(gold, K, n, rng);
        group.insert(group.end(), gold.begin(), gold.end());
        std::sort(group.begin(), group.end());
      }
      if (group.size() < 2 || gold.size() == group.size()) ++summary.dropped_groups;
      const SampleVectors v = bank.prepare(s);
      for (int c : group) {
        idx.push_back(s.idx);
        cands.push_back(c);
        rels.push_back(std::find(gold.begin(), gold.end(), c) != gold.end() ? 1 : 0);
        rows.push_back(bank.assemble(v, c));
      }
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(schema.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    rows_out = rows.size();
    return features_to_tsv(schema, idx, cands, rels, m);
  };

  write_file(ws.file(kFeaturesTrain), table(train, false, summary.train_rows));
  write_file(ws.file(kFeaturesVal), table(val, true, summary.val_rows));

  ojson extra;
  extra["train_rows"] = summary.train_rows;
  extra["val_rows"] = summary.val_rows;
  extra["warnings"] = summary.warnings;
  ws.stamp("build-features", {kFeatBank, kFeaturesTrain, kFeaturesVal}, extra);
  for (const auto& w : summary.warnings) say(log, "warning: " + w);
  say(log, "build-features: " + std::to_string(summary.train_rows) + " train rows, " +
               std::to_string(summary.val_rows) + " val rows");
  return summary;
}

namespace {

std::pair<RankingMatrix, RankingMatrix> load_tables(const Workspace& ws) {
  ws.require("build-features");
  return {parse_feature_table(read_file(ws.file(kFeaturesTrain))),
          parse_feature_table(read_file(ws.file(kFeaturesVal)))};
}

double best_val_map(const GbdtResult& r) {
  return r.history.empty() ? 0.0 : r.history[std::min(r.best_round, r.history.size() - 1)].val_map;
}

}  // namespace

GbdtResult run_train_reranker(const PipelineConfig& config, bool use_hpo, std::ostream* log) {
  Workspace ws(config);
  const auto [train, val] = load_tables(ws);
  TreeParams params = ws.cfg().reranker;
  if (use_hpo) {
    ws.require("hpo");
    const json best = json::parse(read_file(ws.file(kHpoBest)));
    ConfigReader r(best.at("params"));
    walk_trees(r, params);
    r.leave();
  }
  GbdtResult r = fit_gbdt(train, val, params);
  r.model.config_hash = ws.hash();
  write_file(ws.file(kReranker), save_gbdt(r.model));

  std::string history;
  for (const auto& h : r.history) {
    ojson j;
    j["round"] = h.round;
    j["train_loss"] = h.train_loss;
    j["val_map"] = h.val_map;
    history += j.dump() + "\n";
  }
  write_file(ws.file("reranker_history.jsonl"), history);
  std::string importance = "feature\tgain\n";
  for (const auto& [name, gain] : feature_importance(r.model)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", gain);
    importance += name + "\t" + buf + "\n";
  }
  write_file(ws.file("feature_importance.tsv"), importance);

  ojson extra;
  extra["params"] = trees_json(params);
  extra["trees"] = r.model.trees.size();
  extra["best_round"] = r.best_round;
  extra["val_map"] = best_val_map(r);
  ws.stamp("train-reranker", {kReranker, "reranker_history.jsonl", "feature_importance.tsv"}, extra);
  say(log, "train-reranker: " + std::to_string(r.model.trees.size()) + " trees, val MAP@6 " + fmt(best_val_map(r)));
  return r;
}

std::vector<RankedPrediction> run_predict(const PipelineConfig& config, const std::string& input,
                                          const std::string& output, Backend backend, std::ostream* log) {
  Workspace ws(config);
  if (input.empty()) throw ValidationError("no input file to predict (set paths.target or pass --input)");
  const LabelVocab vocab = ws.vocab();
  const Dataset target = load_samples(input, false);

  std::vector<RankedPrediction> out;
  out.reserve(target.size());
  if (backend == Backend::kReranker) {
    ws.require("train-reranker");
    const FeatureBank bank = ws.bank();
    const GbdtModel model = load_gbdt(read_file(ws.file(kReranker)));
    ws.check_model_hash(model.config_hash, kReranker, "train-reranker");
    for (const auto& s : target.samples) {
      RankedPrediction p{s.idx, {}};
      for (int id : rank_candidates(model, bank.assemble_all(s), vocab.size(), bank.schema(), kCutoff)) {
        p.categories.push_back(vocab.name(id));
      }
      out.push_back(std::move(p));
    }
  } else {
    const EncoderModel model = ws.encoder(backend == Backend::kPairwise ? TrainMode::kPairwise : TrainMode::kPointwise);
    for (const auto& s : target.samples) {
      out.push_back({s.idx, predict_topk(model, s, vocab, kCutoff, ws.cfg().normalize, ws.lexicon())});
    }
  }
  for (const auto& p : out) validate_prediction(p, vocab);

  const std::string path = output.empty() ? ws.file("predictions.jsonl") : output;
  write_file(path, predictions_to_jsonl(out));
  ojson extra;
  extra["backend"] = std::string(backend_name(backend));
  extra["count"] = out.size();
  ws.stamp("predict", {path}, extra);
  say(log, "predict (" + std::string(backend_name(backend)) + "): " + std::to_string(out.size()) + " rows -> " + path);
  return out;
}

HpoResult run_hpo(const PipelineConfig& config, std::ostream* log) {
  Workspace ws(config);
  const auto [train, val] = load_tables(ws);
  std::ofstream trials(ws.file("hpo_trials.jsonl"), std::ios::trunc);
  if (!trials) throw Error("cannot write " + ws.file("hpo_trials.jsonl"));
  const HpoResult result = random_search(
      ws.cfg().hpo, [&](const TreeParams& p) { return best_val_map(fit_gbdt(train, val, p)); },
      [&](const HpoTrial& t) {
        trials << trial_to_json(t) << '\n' << std::flush;
        say(log, "hpo trial " + std::to_string(t.id) + ": " + fmt(t.score));
      });
  ojson best;
  best["trial"] = result.best_trial;
  best["score"] = result.trials.at(result.best_trial).score;
  best["params"] = trees_json(result.best);
  write_file(ws.file(kHpoBest), best.dump(2) + "\n");
  ws.stamp("hpo", {"hpo_trials.jsonl", kHpoBest}, best);
  say(log, "hpo: best trial " + std::to_string(result.best_trial) + ", val MAP@6 " + fmt(best["score"].get<double>()));
  return result;
}

EvalReport run_evaluate(const std::string& predictions, const std::string& gold) {
  return map_at_k(load_predictions(predictions), load_samples(gold, true));
}

void run_synth(const SyntheticSpec& spec, std::size_t target_count, const fs::path& dir) {
  SyntheticSpec all = spec;
  all.num_samples = spec.num_samples + target_count;
  const Dataset data = generate_synthetic(all);
  const auto cut = data.samples.begin() + static_cast<std::ptrdiff_t>(spec.num_samples);
  const Dataset train = make_dataset({data.samples.begin(), cut});
  Dataset gold = make_dataset({cut, data.samples.end()});
  Dataset target = gold;
  for (auto& s : target.samples) s.categories.reset();
  target.labeled = false;
  fs::create_directories(dir);
  save_samples(train, (dir / "train.jsonl").string());
  save_samples(target, (dir / "target.jsonl").string());
  save_samples(gold, (dir / "target_gold.jsonl").string());
}

CascadeReport run_cascade(const PipelineConfig& config, std::ostream* log) {
  DirectoryLock lock(config.artifact_dir());
  CascadeReport report;
  run_preprocess(config, log);
  const auto pw = run_train_encoder(config, TrainMode::kPointwise, log);
  const auto pr = run_train_encoder(config, TrainMode::kPairwise, log);
  report.val_map_pointwise = pw.history.empty() ? 0.0 : pw.history[pw.best_epoch].val_map;
  report.val_map_pairwise = pr.history.empty() ? 0.0 : pr.history[pr.best_epoch].val_map;
  if (config.backend == Backend::kReranker) {
    run_build_features(config, log);
    report.val_map_reranker = best_val_map(run_train_reranker(config, false, log));
  }
  report.predictions = run_predict(config, config.paths.target, config.paths.predictions, config.backend, log);
  return report;
}

}  // namespace gifrank
