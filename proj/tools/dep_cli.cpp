// Command-line front end for the texture recognition and manifold pipeline.
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure.

#include <CLI11.hpp>

#include <iostream>

#include "dep/io.hpp"
#include "dep/pipeline.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
};

dep::PipelineConfig effective_config(const GlobalArgs& args) {
  dep::PipelineConfig cfg = dep::PipelineConfig::defaults();
  if (!args.config_path.empty()) cfg.apply_file_text(dep::read_text_file(args.config_path));
  for (const std::string& kv : args.overrides) cfg.apply_override(kv);
  if (args.seed_set) cfg.seed = args.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep encoding-pooling texture recognition and manifold pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs args;
  app.add_option("--config", args.config_path, "Configuration file");
  app.add_option("--seed", args.seed, "Override pipeline.seed")->each([&](const std::string&) {
    args.seed_set = true;
  });
  app.add_option("--out", args.out_dir, "Output directory");
  app.add_option("--override", args.overrides, "Config override key=value (repeatable)");

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic texture dataset");
  gen->fallthrough();

  auto* train = app.add_subcommand("train", "Train a model variant");
  train->fallthrough();
  std::string data_dir = "dataset";
  std::string variant;
  std::string scales;
  std::string resume;
  train->add_option("--data", data_dir, "Dataset directory");
  train->add_option("--variant", variant, "Head variant: dep, gap or encoding");
  train->add_option("--scales", scales, "Training scales, e.g. 48,64,96");
  train->add_option("--resume", resume, "Resume from checkpoint directory");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->fallthrough();
  std::string ckpt;
  eval->add_option("--data", data_dir, "Dataset directory");
  eval->add_option("--ckpt", ckpt, "Checkpoint directory")->required();

  auto* extract = app.add_subcommand("extract", "Extract features from a checkpoint");
  extract->fallthrough();
  std::string layer = "fc2";
  std::string split = "all";
  extract->add_option("--data", data_dir, "Dataset directory");
  extract->add_option("--ckpt", ckpt, "Checkpoint directory")->required();
  extract->add_option("--layer", layer, "Feature layer (fc2, pool, enc)");
  extract->add_option("--split", split, "Split to extract: train, test or all");

  auto* manifold = app.add_subcommand("manifold", "Fit the embedding and train the manifold regressor");
  manifold->fallthrough();
  std::string features = "features.tnsr";
  std::string meta = "features_meta.csv";
  manifold->add_option("--features", features, "Feature matrix (TNSR)");
  manifold->add_option("--meta", meta, "Feature metadata CSV");

  auto* confusion = app.add_subcommand("confusion", "Order a confusion matrix by the manifold");
  confusion->fallthrough();
  std::string cm_csv;
  std::string emb_csv;
  bool force = false;
  confusion->add_option("--cm", cm_csv, "Confusion matrix CSV")->required();
  confusion->add_option("--embedding", emb_csv, "Embedding CSV")->required();
  confusion->add_flag("--force", force, "Allow mixed config hashes");

  auto* gradcheck = app.add_subcommand("grad-check", "Run finite-difference gradient checks");
  gradcheck->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      dep::cmd_gen_data(effective_config(args), args.out_dir);
    } else if (train->parsed()) {
      dep::PipelineConfig cfg = effective_config(args);
      if (!variant.empty()) cfg.head.variant = dep::head_variant_from_string(variant);
      if (!scales.empty()) cfg.set("train.scales", scales);
      dep::cmd_train(cfg, data_dir, args.out_dir, resume);
    } else if (eval->parsed()) {
      dep::cmd_eval(data_dir, ckpt, args.out_dir);
    } else if (extract->parsed()) {
      dep::cmd_extract(data_dir, ckpt, layer, split, args.out_dir);
    } else if (manifold->parsed()) {
      dep::cmd_manifold(effective_config(args), features, meta, args.out_dir);
    } else if (confusion->parsed()) {
      dep::cmd_confusion(cm_csv, emb_csv, args.out_dir, force);
    } else if (gradcheck->parsed()) {
      return dep::cmd_grad_check();
    }
  } catch (const dep::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dep::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dep::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dep::FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dep::DimensionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dep::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
