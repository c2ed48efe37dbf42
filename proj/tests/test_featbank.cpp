#include <doctest.h>

#include <cmath>

#include "gifrank/featbank.hpp"
#include "oracles.hpp"

using namespace gifrank;

namespace {

Sample labeled(std::int64_t idx, std::string text, std::string reply, std::vector<std::string> cats) {
  Sample s;
  s.idx = idx;
  s.text = std::move(text);
  s.reply = std::move(reply);
  s.categories = std::move(cats);
  return s;
}

SparseVec sparse(const Eigen::VectorXd& dense) {
  SparseVec v(dense.size());
  for (Eigen::Index i = 0; i < dense.size(); ++i) {
    if (dense(i) != 0.0) v.insert(i) = dense(i);
  }
  return v;
}

Dataset fixture() {
  return make_dataset({
      labeled(1, "Fell right under my trap", "Ouch! 😂", {"lol", "shock"}),
      labeled(2, "happy birthday @sam", "thank you ❤️", {"love", "happy"}),
      labeled(3, "", "no words 😂😂", {"lol"}),
      labeled(4, "I won the game 123 times", "wow!!", {"shock", "happy"}),
      labeled(5, "my cat ate the cake", "lol that cat", {"lol"}),
      labeled(6, "see https://x.co/a", "cool link", {"happy"}),
      labeled(7, "Love this song", "me too ❤️", {"love"}),
      labeled(8, "what just happened", "no idea", {"shock"}),
  });
}

FeatureBankConfig small_config() {
  FeatureBankConfig c;
  c.word.dim = 8;
  c.word.epochs = 3;
  c.sentence.dim = 8;
  c.sentence.epochs = 3;
  c.subword.sgns.dim = 8;
  c.subword.sgns.epochs = 3;
  c.subword.bucket_count = 1024;
  return c;
}

struct Fitted {
  Dataset data = fixture();
  LabelVocab vocab{std::vector<std::string>{"happy", "lol", "love", "never_seen", "shock"}};
  EncoderModel point, pair;
  FeatureBank bank;

  Fitted() {
    EncoderConfig ec;
    ec.token_dim = 6;
    ec.category_dim = 5;
    ec.seed = 1;
    std::vector<TokenizedText> texts;
    for (const auto& p : make_labeled_pairs(data, vocab)) texts.push_back(p.pair);
    const TokenIndex index = TokenIndex::build(texts, 100);
    point = init_encoder(index, vocab.size(), ec);
    point.mode = TrainMode::kPointwise;
    ec.seed = 2;
    pair = init_encoder(index, vocab.size(), ec);
    bank = FeatureBank::fit(data, vocab, point, pair, small_config());
  }
};

std::size_t schema_index(const std::string& name) {
  const auto& s = feature_schema();
  return static_cast<std::size_t>(std::find(s.begin(), s.end(), name) - s.begin());
}

}  // namespace

TEST_CASE("dense distance examples") {
  auto d = distances(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4));
  CHECK(d.euclidean == 5.0);
  CHECK(d.manhattan == 7.0);
  CHECK(d.cosine == 1.0);
  d = distances(Eigen::Vector2d(3, 4), Eigen::Vector2d(3, 4));
  CHECK(d.euclidean == 0.0);
  CHECK(d.manhattan == 0.0);
  CHECK(d.cosine == 0.0);
  d = distances(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1));
  CHECK(d.euclidean == doctest::Approx(1.414214).epsilon(1e-6));
  CHECK(d.manhattan == 2.0);
  CHECK(d.cosine == 1.0);
  CHECK_THROWS_AS(distances(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(3)), ValidationError);
}

TEST_CASE("distance properties and sparse agreement") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd u(12), v(12);
    for (int i = 0; i < 12; ++i) {
      u(i) = rng.uniform01() < 0.6 ? 0.0 : rng.uniform(-1, 1);
      v(i) = rng.uniform(-1, 1);
    }
    const auto dense = distances(u, v);
    CHECK(dense.euclidean >= 0.0);
    CHECK(dense.manhattan >= 0.0);
    CHECK(dense.cosine >= 0.0);
    CHECK(dense.cosine <= 2.0);
    const auto sp = distances(sparse(u), v, DenseNorms::of(v));
    CHECK(sp.euclidean == doctest::Approx(dense.euclidean).epsilon(1e-12));
    CHECK(sp.manhattan == doctest::Approx(dense.manhattan).epsilon(1e-12));
    CHECK(sp.cosine == doctest::Approx(dense.cosine).epsilon(1e-12));
    const auto self = distances(v, v);
    CHECK(self.euclidean == 0.0);
    CHECK(self.cosine == 0.0);
  }
}

TEST_CASE("tf-idf hand values") {
  const TfIdfModel m = TfIdfModel::fit({{"a", "b"}, {"a", "c"}});
  CHECK(m.idf("a") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.idf("b") == doctest::Approx(1.405465).epsilon(1e-6));
  const SparseVec v = m.transform({"a", "b"});
  CHECK(v.coeff(m.column("a")) == doctest::Approx(0.579739).epsilon(1e-6));
  CHECK(v.coeff(m.column("b")) == doctest::Approx(0.814801).epsilon(1e-6));
  CHECK(v.coeff(m.column("c")) == 0.0);
  CHECK(m.transform({"z"}).nonZeros() == 0);
  CHECK(m.transform({}).nonZeros() == 0);
  CHECK(keyword_weight(v) == doctest::Approx(1.394540).epsilon(1e-6));
  CHECK(keyword_weight(v, 1) == doctest::Approx(0.814801).epsilon(1e-6));
  CHECK(std::abs(m.transform({"a", "c", "c", "q"}).norm() - 1.0) < 1e-12);
  CHECK_THROWS_AS(TfIdfModel::fit({}), ValidationError);
}

TEST_CASE("word and sentence corpora") {
  const Dataset d = make_dataset({labeled(1, "Fell right under my trap", "Ouch! 😂", {"x"}), labeled(2, "", "hi", {"x"})});
  const auto words = build_word_corpus(d);
  REQUIRE(words.size() == 4);
  CHECK(words[0] == Document{"fell", "right", "under", "my", "trap"});
  CHECK(words[1] == Document{"ouch", "!"});
  CHECK(words[2].empty());
  CHECK(sentence_symbol("Ouch! 😂") == "ouch!");
  const auto sentences = build_sentence_corpus(d);
  REQUIRE(sentences.size() == 2);
  CHECK(sentences[0] == Document{"fell right under my trap", "ouch!"});
  CHECK(sentences[1] == Document{"hi"});
}

TEST_CASE("sgns pair loss") {
  Eigen::VectorXd center = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd outputs = Eigen::MatrixXd::Zero(2, 3);
  CHECK(sgns_pair_loss(center, outputs).loss == doctest::Approx(2 * std::log(2.0)));

  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd c(4);
    Eigen::MatrixXd o(4, 4);
    for (int i = 0; i < 4; ++i) {
      c(i) = rng.uniform(-1, 1);
      for (int j = 0; j < 4; ++j) o(i, j) = rng.uniform(-1, 1);
    }
    const auto g = sgns_pair_loss(c, o);
    const auto gc = oracle::numeric_gradient([&](const Eigen::VectorXd& x) { return sgns_pair_loss(x, o).loss; }, c);
    CHECK(oracle::relative_error(g.d_center, gc) <= 1e-5);
    Eigen::VectorXd flat = o.reshaped();
    const auto go = oracle::numeric_gradient(
        [&](const Eigen::VectorXd& x) { return sgns_pair_loss(c, x.reshaped(4, 4)).loss; }, flat);
    CHECK(oracle::relative_error(g.d_outputs.reshaped(), go) <= 1e-5);
  }
}

TEST_CASE("sgns learns alternation") {
  Document alt;
  for (int i = 0; i < 1000; ++i) alt.push_back(i % 2 ? "b" : "a");
  SgnsConfig cfg;
  cfg.dim = 16;
  cfg.window = 2;
  cfg.seed = 8;
  const WordEmbeddings emb = train_sgns({alt, {"ctrl"}}, cfg);
  CHECK(emb.matrix().allFinite());
  CHECK(emb.affinity("a", "b") > emb.affinity("a", "ctrl"));
  CHECK(emb.affinity("b", "a") > emb.affinity("b", "ctrl"));
  CHECK(emb.vector("unseen").isZero(0.0));

  const WordEmbeddings again = train_sgns({alt, {"ctrl"}}, cfg);
  CHECK(again.matrix() == emb.matrix());
}

TEST_CASE("subword hashing") {
  CHECK(char_ngrams("cat", 3, 3) == std::vector<std::string>{"<ca", "cat", "at>"});
  CHECK(char_ngrams("é", 1, 2) == std::vector<std::string>{"<", "<é", "é", "é>", ">"});

  SubwordConfig cfg;
  cfg.min_n = 3;
  cfg.max_n = 3;
  cfg.bucket_count = 4096;
  cfg.sgns.dim = 8;
  cfg.sgns.epochs = 2;
  const SubwordEmbeddings emb = train_subword({{"the", "cat", "sat"}, {"a", "cat"}}, cfg);
  const auto cat = emb.buckets("cat");
  CHECK(cat.size() == 4);
  CHECK(emb.buckets("cat") == cat);
  CHECK(cat[0] == fnv1a32("<ca") % 4096);
  CHECK(cat[3] == fnv1a32("<cat>") % 4096);

  const auto cats = emb.buckets("cats");
  std::size_t shared = 0;
  for (auto b : cats) shared += std::count(cat.begin(), cat.end(), b) > 0;
  CHECK(shared >= 2);
  CHECK(emb.vector("cats").norm() > 0.0);
  CHECK(emb.vector("").isZero(0.0));

  ByteWriter w;
  emb.write(w);
  ByteReader r(w.bytes());
  const SubwordEmbeddings back = SubwordEmbeddings::read(r);
  CHECK(back.vector("cats") == emb.vector("cats"));
  CHECK(back.vector("cat") == emb.vector("cat"));
}

TEST_CASE("sentence_vector and centroids") {
  const WordEmbeddings none;
  CHECK(sentence_vector(none, {}).size() == 0);

  Eigen::MatrixXd vecs(3, 2);
  vecs << 1, 0, 0, 1, 4, 4;
  const auto c = build_label_centroids(vecs, {{0}, {0, 1}, {}}, 3);
  CHECK(c.centroids.row(0).isApprox(Eigen::RowVector2d(0.5, 0.5)));
  CHECK(c.centroids.row(1).isApprox(Eigen::RowVector2d(0, 1)));
  CHECK(c.centroids.row(2).isZero(0.0));
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("label 2") != std::string::npos);

  std::vector<SparseVec> sv = {sparse(Eigen::Vector2d(1, 0)), sparse(Eigen::Vector2d(0, 1))};
  const auto cs = build_label_centroids(sv, 2, {{0}, {0}}, 1);
  CHECK(cs.centroids.row(0).isApprox(Eigen::RowVector2d(0.5, 0.5)));
}

TEST_CASE("statistical features") {
  const TfIdfModel m = TfIdfModel::fit({{"a", "b"}, {"a", "c"}});
  const auto f = statistical_features(labeled(1, "", "Ouch! 😂😂", {}), EmojiLexicon::builtin(), m);
  CHECK(f.emoji_count_reply == 2.0);
  CHECK(f.token_count_reply == 2.0);
  CHECK(f.emoji_count_text == 0.0);
  CHECK(f.token_count_text == 0.0);
  CHECK(f.keyword_weight_text == 0.0);
  const auto g = statistical_features(labeled(1, "a b", "", {}), EmojiLexicon::builtin(), m);
  CHECK(g.keyword_weight_text == doctest::Approx(1.394540).epsilon(1e-6));
}

TEST_CASE("feature bank") {
  const Fitted f;
  const FeatureBank& bank = f.bank;
  // 24 centroid distances + 6 encoder distances + 2 scores + 6 statistics
  REQUIRE(feature_schema().size() == 38);
  CHECK(bank.warnings().size() == 1);
  CHECK(bank.centroids(0, 0).row(3).isZero(0.0));

  SUBCASE("schema is fixed and finite") {
    for (const auto& s : f.data.samples) {
      const Eigen::MatrixXd rows = bank.assemble_all(s);
      CHECK(rows.rows() == 5);
      CHECK(rows.cols() == 38);
      CHECK(rows.allFinite());
    }
    CHECK(bank.assemble_features(f.data.samples[0], 2).values.size() == 38);
  }

  SUBCASE("empty text uses the zero vector") {
    const Sample& empty = f.data.samples[2];
    const Eigen::MatrixXd rows = bank.assemble_all(empty);
    const char* sources[] = {"tfidf_word", "sgns_word", "subword_word", "sgns_sentence"};
    for (std::size_t s = 0; s < 4; ++s) {
      for (Eigen::Index c = 0; c < rows.rows(); ++c) {
        const std::string p = std::string(sources[s]) + ".text.";
        const Eigen::RowVectorXd centroid = bank.centroids(s, 0).row(c);
        CHECK(rows(c, schema_index(p + "cosine")) == 1.0);
        CHECK(rows(c, schema_index(p + "euclidean")) == doctest::Approx(centroid.norm()));
        CHECK(rows(c, schema_index(p + "manhattan")) == doctest::Approx(centroid.lpNorm<1>()));
      }
    }
  }

  SUBCASE("candidates differ only in candidate-dependent features") {
    const Eigen::MatrixXd rows = bank.assemble_all(f.data.samples[3]);
    const auto& schema = feature_schema();
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const bool per_sample = schema[j].rfind("emoji_count", 0) == 0 || schema[j].rfind("token_count", 0) == 0 ||
                              schema[j].rfind("keyword_weight", 0) == 0;
      if (per_sample) {
        CHECK(rows(0, j) == rows(4, j));
      }
    }
    CHECK((rows.row(0) - rows.row(4)).head(32).norm() > 0.0);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(bank.assemble_features(f.data.samples[0], 5), ValidationError);
    CHECK_THROWS_AS(bank.assemble_features(f.data.samples[0], -1), ValidationError);
    const FeatureBank unfitted;
    CHECK_THROWS_AS(unfitted.assemble_all(f.data.samples[0]), ValidationError);
  }

  SUBCASE("transforming new data leaves the models untouched") {
    const std::string before = bank.save();
    bank.assemble_all(labeled(99, "completely new words here", "🎉🎉 yay", {}));
    CHECK(bank.save() == before);
  }

  SUBCASE("deterministic fit and round trip") {
    const FeatureBank again = FeatureBank::fit(f.data, f.vocab, f.point, f.pair, small_config());
    const std::string bytes = bank.save();
    CHECK(again.save() == bytes);
    const FeatureBank loaded = FeatureBank::load(bytes, f.point, f.pair);
    CHECK(loaded.save() == bytes);
    for (const auto& s : f.data.samples) CHECK(loaded.assemble_all(s) == bank.assemble_all(s));
    std::string newer = bytes;
    newer[8] = 9;
    CHECK_THROWS_AS(FeatureBank::load(newer, f.point, f.pair), VersionError);
    CHECK_THROWS_AS(FeatureBank::load(bytes.substr(0, bytes.size() / 2), f.point, f.pair), ParseError);
  }
}

TEST_CASE("feature table export") {
  Eigen::MatrixXd rows(2, 2);
  rows << 1.5, 0, -2, 0.25;
  const std::string tsv = features_to_tsv({"f1", "f2"}, {7, 7}, {0, 1}, {1, 0}, rows);
  CHECK(tsv == "idx\tcandidate\trelevance\tf1\tf2\n7\t0\t1\t1.5\t0\n7\t1\t0\t-2\t0.25\n");
  CHECK_THROWS_AS(features_to_tsv({"f1"}, {7, 7}, {0, 1}, {1, 0}, rows), ValidationError);
}
