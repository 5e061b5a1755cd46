#pragma once

#include <string>

#include "dep/model.hpp"
#include "dep/regressor.hpp"
#include "dep/trainer.hpp"
#include "dep/tsne.hpp"

namespace dep {

// Nested run configuration parsed from a TOML-style text file with CLI
// overrides. Unknown keys are rejected; the FNV-1a hash of the canonical
// dump is stamped into every output a run produces.
struct PipelineConfig {
  std::uint64_t seed = 7;

  std::string dataset_root = "dataset";
  int dataset_per_class = 200;
  int dataset_size = 64;
  double dataset_noise = 0.02;

  std::string backbone_preset = "mini";
  BackboneConfig backbone = BackboneConfig::mini();

  HeadConfig head;

  TrainConfig train;

  TsneConfig tsne;
  int tsne_train_subset = 2000;

  RegressorConfig regressor;

  static PipelineConfig defaults();

  // Throws ConfigError on unknown keys or malformed values.
  void apply_file_text(const std::string& text);
  void apply_override(const std::string& key_equals_value);
  void set(const std::string& key, const std::string& raw_value);

  std::string canonical() const;
  std::string hash() const;  // 16 hex chars of FNV-1a 64 over canonical()
};

std::string fnv1a_hex(const std::string& text);

}  // namespace dep
