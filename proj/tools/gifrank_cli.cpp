#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gifrank/pipeline.hpp"

using namespace gifrank;
using json = nlohmann::json;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string artifacts;
  std::vector<std::string> overrides;  // dotted.path=value
};

// Config file plus command-line overrides. Values of --set are parsed as
// JSON when possible, otherwise taken as strings.
PipelineConfig resolve_config(const GlobalOptions& g) {
  json root = json::object();
  if (!g.config.empty()) {
    try {
      root = json::parse(read_file(g.config), nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ParseError("config " + g.config + ": " + e.what());
    }
  }
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw SchemaError("--set expects key=value, got '" + o + "'");
    const std::string path = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &root;
    std::size_t start = 0;
    for (;;) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object()) throw SchemaError("--set " + path + ": parent is not an object");
      node = &(*node)[key];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = value;
  }
  PipelineConfig c = parse_config(root.dump());
  if (g.seed) c.seed = *g.seed;
  if (!g.artifacts.empty()) c.paths.artifacts = g.artifacts;
  return c;
}

void print_report(const EvalReport& r) {
  std::printf("samples  %zu\nMAP@6    %.6f\n", r.sample_count, r.map_at_6);
  std::printf("%s\n", report_to_json(r).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gifrank: top-6 category recommendation for (text, reply) pairs"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "global seed override");
  app.add_option("--artifacts", g.artifacts, "artifact directory override");
  app.add_option("--set", g.overrides, "config override, e.g. encoder.pairwise.epochs=5");

  auto* preprocess = app.add_subcommand("preprocess", "split labeled data and build the label vocabulary");
  std::string train_path;
  preprocess->add_option("--train", train_path, "labeled line-JSON (overrides paths.train)");

  auto* train_enc = app.add_subcommand("train-encoder", "train the pair encoder");
  std::string mode = "pairwise";
  train_enc->add_option("--mode", mode, "pointwise or pairwise")->check(CLI::IsMember({"pointwise", "pairwise"}));

  auto* features = app.add_subcommand("build-features", "fit the feature bank and write feature tables");

  auto* train_rr = app.add_subcommand("train-reranker", "train the boosted reranker");
  bool use_hpo = false;
  train_rr->add_flag("--use-hpo", use_hpo, "take tree parameters from the best hpo trial");

  auto* predict = app.add_subcommand("predict", "rank categories for unlabeled samples");
  std::string input, output, backend;
  predict->add_option("--input", input, "unlabeled line-JSON (default: paths.target)");
  predict->add_option("--output", output, "predictions file (default: paths.predictions)");
  predict->add_option("--backend", backend, "reranker, pairwise or pointwise")
      ->check(CLI::IsMember({"reranker", "pairwise", "pointwise"}));

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold labels");
  std::string pred_file, gold_file;
  evaluate->add_option("--pred", pred_file, "predictions line-JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--gold", gold_file, "labeled line-JSON")->required()->check(CLI::ExistingFile);

  auto* hpo = app.add_subcommand("hpo", "random search over reranker parameters");

  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  std::string synth_out = "synthetic";
  std::size_t target_count = 512;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--target-count", target_count, "held-out samples written without labels");

  auto* run = app.add_subcommand("run", "run every stage and predict paths.target");
  auto* show = app.add_subcommand("show-config", "print the effective config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (evaluate->parsed()) {
      print_report(run_evaluate(pred_file, gold_file));
      return 0;
    }
    PipelineConfig config = resolve_config(g);
    if (show->parsed()) {
      std::cout << config_to_json(config);
      std::cout << "# config hash " << hash_hex(config.hash()) << '\n';
      return 0;
    }
    if (synth->parsed()) {
      SyntheticSpec spec = config.resolved().synthetic;
      run_synth(spec, target_count, synth_out);
      std::cerr << "synth: " << spec.num_samples << " train + " << target_count << " target samples -> " << synth_out
                << '\n';
      return 0;
    }
    if (!train_path.empty()) config.paths.train = train_path;
    if (!backend.empty()) config.backend = parse_backend(backend);
    config.validate();

    if (run->parsed()) {
      const CascadeReport r = run_cascade(config, &std::cerr);
      std::printf("val MAP@6 pointwise %.6f\nval MAP@6 pairwise  %.6f\n", r.val_map_pointwise, r.val_map_pairwise);
      if (r.val_map_reranker) std::printf("val MAP@6 reranker  %.6f\n", *r.val_map_reranker);
      return 0;
    }

    DirectoryLock lock(config.artifact_dir());
    if (preprocess->parsed()) {
      run_preprocess(config, &std::cerr);
    } else if (train_enc->parsed()) {
      run_train_encoder(config, parse_mode(mode), &std::cerr);
    } else if (features->parsed()) {
      run_build_features(config, &std::cerr);
    } else if (train_rr->parsed()) {
      run_train_reranker(config, use_hpo, &std::cerr);
    } else if (predict->parsed()) {
      run_predict(config, input.empty() ? config.paths.target : input,
                  output.empty() ? config.paths.predictions : output, config.backend, &std::cerr);
    } else if (hpo->parsed()) {
      run_hpo(config, &std::cerr);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
