#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "dep/config.hpp"
#include "dep/io.hpp"
#include "dep/serialize.hpp"

namespace dep {

TextureModel build_model(const PipelineConfig& cfg, Index classes);

void cmd_gen_data(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

struct TrainOutputs {
  double final_acc = 0;
  std::filesystem::path checkpoint_dir;
};
TrainOutputs cmd_train(const PipelineConfig& cfg, const std::filesystem::path& data_dir,
                       const std::filesystem::path& out_dir,
                       const std::filesystem::path& resume_dir = {});

double cmd_eval(const std::filesystem::path& data_dir, const std::filesystem::path& ckpt_dir,
                const std::filesystem::path& out_dir);

void cmd_extract(const std::filesystem::path& data_dir, const std::filesystem::path& ckpt_dir,
                 const std::string& layer, const std::string& split,
                 const std::filesystem::path& out_dir);

void cmd_manifold(const PipelineConfig& cfg, const std::filesystem::path& features_tnsr,
                  const std::filesystem::path& meta_csv, const std::filesystem::path& out_dir);

void cmd_confusion(const std::filesystem::path& cm_csv, const std::filesystem::path& embedding_csv,
                   const std::filesystem::path& out_dir, bool force = false);

int cmd_grad_check();

// Manifold-derived class ordering (shared with tests and the acceptance
// suite).
struct EmbeddingRow {
  std::string id;
  double x = 0;
  double y = 0;
  std::string split;
  std::string cls;
};

std::vector<EmbeddingRow> parse_embedding_rows(const CsvTable& table);
std::vector<std::array<double, 2>> class_centroids(const std::vector<EmbeddingRow>& rows,
                                                   const std::vector<std::string>& classes);
// Order class indices by projection onto the first principal axis of the
// centroid cloud.
std::vector<int> order_classes_1d(const std::vector<std::array<double, 2>>& centroids);
double mean_adjacent_distance(const std::vector<std::array<double, 2>>& centroids,
                              const std::vector<int>& order);

}  // namespace dep
