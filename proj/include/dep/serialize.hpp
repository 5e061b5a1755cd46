#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dep/dataset.hpp"
#include "dep/graph.hpp"

namespace dep {

// TNSR binary format: magic "TNSR", u32 version, u32 rank, u32 dims,
// then row-major f64 payload; all little-endian.
void save_tnsr(const std::filesystem::path& path, const Tensor& t);
Tensor load_tnsr(const std::filesystem::path& path);

// Rank-validated ingestion path for externally computed feature maps.
Tensor load_external_features(const std::filesystem::path& path);

struct CheckpointMeta {
  std::string config_text;
  std::string config_hash;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::string variant;
  ChannelStats stats;
  std::vector<std::string> classes;
};

// Checkpoint directory: manifest.json plus one TNSR file per named parameter
// (and per optimizer velocity, so training can resume exactly).
void save_checkpoint(const std::filesystem::path& dir, const std::vector<Parameter*>& params,
                     const std::map<std::string, Tensor>& velocities, const CheckpointMeta& meta);
CheckpointMeta load_checkpoint_meta(const std::filesystem::path& dir);
void load_checkpoint_params(const std::filesystem::path& dir, const std::vector<Parameter*>& params,
                            std::map<std::string, Tensor>* velocities);

}  // namespace dep
