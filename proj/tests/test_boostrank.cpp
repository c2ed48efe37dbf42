#include <doctest.h>

#include <cmath>
#include <set>

#include "gifrank/boostrank.hpp"
#include "gifrank/encoder.hpp"
#include "oracles.hpp"

using namespace gifrank;

namespace {

using Groups = std::vector<std::pair<std::size_t, std::size_t>>;

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back("f" + std::to_string(i));
  return s;
}

// Groups of `k` candidates; feature 0 equals relevance, the rest are noise.
RankingMatrix separable(std::size_t groups, std::size_t k, std::uint64_t seed, bool oracle_feature = true) {
  Rng rng(seed);
  RankingBuilder b(names(3));
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<int> cand, rel;
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(k), 3);
    const std::size_t n_pos = 1 + rng.uniform_index(2);
    for (std::size_t c = 0; c < k; ++c) {
      cand.push_back(static_cast<int>(c));
      rel.push_back(c < n_pos ? 1 : 0);
    }
    rng.shuffle(rel);
    for (std::size_t c = 0; c < k; ++c) {
      const auto r = static_cast<Eigen::Index>(c);
      rows(r, 0) = oracle_feature ? rel[c] : rng.uniform01();
      rows(r, 1) = rng.uniform01();
      rows(r, 2) = rng.uniform(-3, 3);
    }
    b.add_group(static_cast<std::int64_t>(g), cand, rel, rows);
  }
  return b.finish();
}

GbdtModel single_leaf(double value, double shrinkage, std::size_t features) {
  GbdtModel m;
  m.shrinkage = shrinkage;
  m.schema = names(features);
  m.schema_hash = schema_hash(m.schema);
  Tree t;
  t.nodes.push_back(TreeNode{});
  t.nodes[0].value = value;
  m.trees.push_back(t);
  return m;
}

}  // namespace

TEST_CASE("pairwise gradient examples") {
  const Eigen::VectorXi rel = (Eigen::VectorXi(2) << 1, 0).finished();
  const Groups one = {{0, 2}};
  auto g = pairwise_gradients(Eigen::Vector2d(0.3, 0.3), rel, one);
  CHECK(g.gradient(0) == -0.5);
  CHECK(g.gradient(1) == 0.5);
  CHECK(g.hessian(0) == 0.25);
  CHECK(g.hessian(1) == 0.25);

  g = pairwise_gradients(Eigen::Vector2d(10, 0), rel, one);
  CHECK(g.gradient(0) == doctest::Approx(-4.5398e-5).epsilon(1e-4));
  CHECK(g.gradient(0) == doctest::Approx(-1.0 / (1.0 + std::exp(10.0))));

  g = pairwise_gradients(Eigen::Vector3d(1, 2, 3), Eigen::Vector3i(1, 1, 1), {{0, 3}});
  CHECK(g.gradient.isZero(0.0));
  CHECK(g.hessian.isZero(0.0));
}

TEST_CASE("pairwise gradients: antisymmetry and finite differences") {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng.uniform_index(6);
    Eigen::VectorXd s(n);
    Eigen::VectorXi rel(n);
    for (std::size_t i = 0; i < n; ++i) {
      s(i) = rng.uniform(-2, 2);
      rel(i) = rng.uniform01() < 0.4 ? 1 : 0;
    }
    rel(0) = 1;
    rel(1) = 0;
    const Groups groups = {{0, 2}, {2, n}};
    const auto g = pairwise_gradients(s, rel, groups);
    CHECK(std::abs(g.gradient(0) + g.gradient(1)) == 0.0);
    CHECK(std::abs(g.gradient.segment(2, n - 2).sum()) < 1e-12);
    const auto num = oracle::numeric_gradient(
        [&](const Eigen::VectorXd& x) { return pairwise_logistic_loss(x, rel, groups); }, s);
    CHECK(oracle::relative_error(g.gradient, num) <= 1e-5);
    CHECK((g.hessian.array() >= 0.0).all());

    const auto w = pairwise_gradients(s, rel, groups, true);
    CHECK((w.gradient.array().abs() <= g.gradient.array().abs() + 1e-15).all());
  }
}

TEST_CASE("bin mapper") {
  Eigen::MatrixXd x(5, 2);
  x << 0, 1, 1, 1, 2, 1, 2, 1, 4, 1;
  const BinMapper m = BinMapper::fit(x, 8);
  CHECK(m.thresholds(0) == std::vector<double>{0.5, 1.5, 3.0});
  CHECK(m.thresholds(1).empty());
  CHECK(m.bin(0, 0.5) == 0);
  CHECK(m.bin(0, 0.6) == 1);
  CHECK(m.bin(0, 10) == 3);

  Eigen::MatrixXd many(1000, 1);
  for (int i = 0; i < 1000; ++i) many(i, 0) = i;
  const BinMapper q = BinMapper::fit(many, 64);
  CHECK(q.thresholds(0).size() <= 63);
  CHECK(q.thresholds(0).size() >= 60);
  CHECK(std::is_sorted(q.thresholds(0).begin(), q.thresholds(0).end()));
  CHECK(q.thresholds(0).back() < 999);
}

TEST_CASE("fit_tree examples") {
  TreeParams p;
  p.min_samples_leaf = 1;
  Eigen::MatrixXd x(8, 1);
  Eigen::VectorXd g(8), h = Eigen::VectorXd::Ones(8);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = i % 2;
    g(i) = i % 2 ? -1.0 : 1.0;
  }
  Tree t = fit_tree(x, g, h, p);
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 0.5);
  const double lv = t.nodes[t.nodes[0].left].value;
  const double rv = t.nodes[t.nodes[0].right].value;
  CHECK(lv < 0.0);
  CHECK(rv > 0.0);
  CHECK(t.nodes[0].gain == doctest::Approx(oracle::best_split_gain({0, 1, 0, 1, 0, 1, 0, 1}, {1, -1, 1, -1, 1, -1, 1, -1},
                                                                   std::vector<double>(8, 1.0), {0.5}, 1)));

  t = fit_tree(x, Eigen::VectorXd::Zero(8), h, p);
  CHECK(t.nodes.size() == 1);
  CHECK(t.nodes[0].value == 0.0);

  t = fit_tree(Eigen::MatrixXd::Constant(8, 1, 3.0), g, h, p);
  CHECK(t.nodes.size() == 1);

  p.max_depth = 1;
  p.min_samples_leaf = 5;
  t = fit_tree(x, g, h, p);  // no split leaves 5 rows on both sides
  CHECK(t.nodes.size() == 1);
}

TEST_CASE("root split equals exhaustive oracle") {
  Rng rng(2024);
  TreeParams p;
  p.max_depth = 1;
  p.min_samples_leaf = 1 + rng.uniform_index(3);
  p.histogram_bins = 16;
  for (int d = 0; d < 200; ++d) {
    const std::size_t n = 10 + rng.uniform_index(60);
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd g(n), h(n);
    std::vector<double> xs, gs, hs;
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = static_cast<double>(rng.uniform_index(40)) / 4.0;
      g(i) = (static_cast<double>(rng.uniform_index(33)) - 16.0) / 8.0;  // dyadic keeps sums exact
      h(i) = static_cast<double>(1 + rng.uniform_index(8)) / 16.0;
      xs.push_back(x(i, 0));
      gs.push_back(g(i));
      hs.push_back(h(i));
    }
    const BinMapper bins = BinMapper::fit(x, p.histogram_bins);
    const Tree t = fit_tree(bins, bins.transform(x), 1, g, h, p);
    const double expected = oracle::best_split_gain(xs, gs, hs, bins.thresholds(0), p.min_samples_leaf);
    CHECK(t.nodes[0].gain == expected);
  }
}

TEST_CASE("gbdt training") {
  const RankingMatrix train = separable(60, 8, 1);
  const RankingMatrix val = separable(20, 8, 2);
  TreeParams p;
  p.min_samples_leaf = 5;
  p.num_trees = 10;

  SUBCASE("oracle feature is found within 10 rounds") {
    const auto r = fit_gbdt(train, val, p);
    CHECK(r.history.back().val_map == 1.0);
    CHECK(ranking_map(val, raw_scores(r.model, val.features)) == 1.0);
    CHECK(r.history.front().round == 0);
  }
  SUBCASE("num_trees = 0") {
    p.num_trees = 0;
    const auto r = fit_gbdt(train, val, p);
    CHECK(r.model.trees.empty());
    CHECK(raw_scores(r.model, val.features).isZero(0.0));
  }
  SUBCASE("deterministic") {
    const auto a = fit_gbdt(train, val, p);
    const auto b = fit_gbdt(train, val, p);
    CHECK(a.model == b.model);
    CHECK(save_gbdt(a.model) == save_gbdt(b.model));
  }
  SUBCASE("early stopping keeps the best round") {
    const RankingMatrix noisy_train = separable(60, 8, 3, false);
    const RankingMatrix noisy_val = separable(30, 8, 4, false);
    p.num_trees = 200;
    p.early_stopping_rounds = 5;
    const auto r = fit_gbdt(noisy_train, noisy_val, p);
    CHECK(r.model.trees.size() == r.best_round);
    for (std::size_t i = 0; i <= r.best_round; ++i) CHECK(r.history[i].val_map <= r.history[r.best_round].val_map);
    CHECK(r.history.size() <= r.best_round + p.early_stopping_rounds + 1);
  }
  SUBCASE("no validation keeps every tree") {
    const auto r = fit_gbdt(train, RankingMatrix{}, p);
    CHECK(r.model.trees.size() == p.num_trees);
  }
  SUBCASE("schema mismatch") {
    RankingMatrix other = val;
    other.schema[0] = "renamed";
    CHECK_THROWS_AS(fit_gbdt(train, other, p), ValidationError);
    const auto r = fit_gbdt(train, val, p);
    CHECK_THROWS_AS(predict_scores(r.model, val.features, other.schema), ValidationError);
  }
}

TEST_CASE("ranking builder drops degenerate groups") {
  RankingBuilder b(names(1));
  CHECK_FALSE(b.add_group(1, {0, 1}, {0, 0}, Eigen::MatrixXd::Zero(2, 1)));
  CHECK_FALSE(b.add_group(2, {0, 1}, {1, 1}, Eigen::MatrixXd::Zero(2, 1)));
  CHECK_FALSE(b.add_group(3, {0}, {1}, Eigen::MatrixXd::Zero(1, 1)));
  CHECK(b.add_group(4, {0, 1}, {1, 0}, Eigen::MatrixXd::Zero(2, 1)));
  const RankingMatrix m = b.finish();
  CHECK(m.dropped_groups == 3);
  CHECK(m.groups.size() == 1);
  CHECK(m.group_idx == std::vector<std::int64_t>{4});
}

TEST_CASE("predict_scores and rank_candidates") {
  const GbdtModel leaf = single_leaf(0.7, 0.1, 2);
  const Eigen::VectorXd s = predict_scores(leaf, Eigen::MatrixXd::Random(4, 2), leaf.schema);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(s(i) == doctest::Approx(0.07));

  GbdtModel empty = leaf;
  empty.trees.clear();
  CHECK(raw_scores(empty, Eigen::MatrixXd::Random(3, 2)).isZero(0.0));

  // one split on f0: rows with f0 > 0 score higher
  GbdtModel m = leaf;
  m.trees[0].nodes = {TreeNode{0, 0.0, true, 1, 2, 0.0, 1.0}, TreeNode{}, TreeNode{}};
  m.trees[0].nodes[1].value = -1.0;
  m.trees[0].nodes[2].value = 1.0;
  Eigen::MatrixXd rows(8, 2);
  rows.setZero();
  rows(5, 0) = 1.0;
  rows(2, 0) = 1.0;
  CHECK(rank_candidates(m, rows, 8, m.schema) == std::vector<int>{2, 5, 0, 1, 3, 4});
  CHECK(rank_candidates(empty, rows, 8, m.schema) == std::vector<int>{0, 1, 2, 3, 4, 5});
  const auto six = rank_candidates(m, rows.topRows(6), 6, m.schema);
  CHECK(std::set<int>(six.begin(), six.end()).size() == 6);
  CHECK_THROWS_AS(rank_candidates(m, rows, 7, m.schema), ValidationError);

  Eigen::MatrixXd perm = rows;
  perm.row(0).swap(perm.row(5));
  const Eigen::VectorXd a = raw_scores(m, rows), b = raw_scores(m, perm);
  CHECK(a(5) == b(0));
  CHECK(a(0) == b(5));

  // monotone transforms of the scores keep the ranking
  Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(9, -2, 2).array().cos();
  CHECK(top_k_ids(r, 6) == top_k_ids(r.array().exp().matrix(), 6));
}

TEST_CASE("feature importance") {
  GbdtModel empty = single_leaf(0.0, 0.1, 3);
  empty.trees.clear();
  for (const auto& [name, gain] : feature_importance(empty)) CHECK(gain == 0.0);

  GbdtModel m = single_leaf(0.0, 0.1, 3);
  m.trees[0].nodes = {TreeNode{1, 0.0, true, 1, 2, 0.0, 2.5}, TreeNode{}, TreeNode{}};
  const auto imp = feature_importance(m);
  CHECK(imp[0].second == 0.0);
  CHECK(imp[1].second == 2.5);
  CHECK(imp[2].second == 0.0);
  CHECK(imp[1].first == "f1");

  TreeParams p;
  p.min_samples_leaf = 3;
  p.num_trees = 15;
  const auto r = fit_gbdt(separable(40, 6, 9, false), RankingMatrix{}, p);
  double sum = 0.0;
  for (const auto& [name, gain] : feature_importance(r.model)) {
    CHECK(gain >= 0.0);
    sum += gain;
  }
  CHECK(sum > 0.0);
  CHECK(sum == doctest::Approx(r.model.total_gain).epsilon(1e-12));
}

TEST_CASE("gbdt serialization") {
  TreeParams p;
  p.min_samples_leaf = 3;
  p.num_trees = 5;
  GbdtModel m = fit_gbdt(separable(30, 6, 5), RankingMatrix{}, p).model;
  m.config_hash = 77;
  const std::string bytes = save_gbdt(m);
  const GbdtModel back = load_gbdt(bytes);
  CHECK(back == m);
  CHECK(save_gbdt(back) == bytes);
  std::string newer = bytes;
  newer[8] = 2;
  CHECK_THROWS_AS(load_gbdt(newer), VersionError);
  CHECK_THROWS_AS(load_gbdt(bytes.substr(0, bytes.size() - 3)), ParseError);
  std::string junk = bytes;
  junk[0] = 'Z';
  CHECK_THROWS_AS(load_gbdt(junk), ParseError);
}

TEST_CASE("random search") {
  HpoSpace space;
  space.seed = 3;
  space.budget = 1;
  auto r = random_search(space, [](const TreeParams& p) { return p.shrinkage; });
  REQUIRE(r.trials.size() == 1);
  CHECK(r.best == r.trials[0].params);

  space.budget = 20;
  r = random_search(space, [](const TreeParams&) { return 0.5; });
  CHECK(r.best_trial == 0);
  for (const auto& t : r.trials) {
    CHECK(t.params.shrinkage >= space.shrinkage_min);
    CHECK(t.params.shrinkage <= space.shrinkage_max);
    CHECK(t.params.max_depth >= space.depth_min);
    CHECK(t.params.max_depth <= space.depth_max);
    CHECK(t.params.num_trees >= space.trees_min);
    CHECK(t.params.num_trees <= space.trees_max);
    CHECK(t.params.min_samples_leaf >= space.leaf_min);
    CHECK(t.params.min_samples_leaf <= space.leaf_max);
  }

  auto objective = [](const TreeParams& p) { return -std::abs(std::log(p.shrinkage / 0.05)) - 0.01 * p.max_depth; };
  const auto a = random_search(space, objective);
  const auto b = random_search(space, objective);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].params == b.trials[i].params);
    CHECK(a.trials[i].score == b.trials[i].score);
  }
  CHECK(a.best_trial == b.best_trial);
  for (const auto& t : a.trials) CHECK(t.score <= a.trials[a.best_trial].score);

  const std::string line = trial_to_json(a.trials[0]);
  CHECK(line.find("\"trial\":0") != std::string::npos);
  CHECK(line.find("\"seconds\"") != std::string::npos);

  space.budget = 0;
  CHECK_THROWS_AS(random_search(space, objective), ValidationError);
}
