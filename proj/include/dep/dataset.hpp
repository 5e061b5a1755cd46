#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "dep/tensor.hpp"

#include <nlohmann/json_fwd.hpp>

namespace dep {

struct LabeledImage {
  std::string id;  // "<split>/<class>/<index>"
  int label = 0;
  Tensor image;  // [3,H,W] in [0,1]
};

struct SampleSet {
  std::vector<std::string> classes;
  std::vector<LabeledImage> items;
};

// Per-channel standardization statistics of a training split.
struct ChannelStats {
  std::array<double, 3> mean{0, 0, 0};
  std::array<double, 3> stddev{1, 1, 1};
};

// On-disk layout: root/<split>/<class_name>/<index>.ppm plus manifest.json.
void save_dataset(const std::filesystem::path& root, const SampleSet& train, const SampleSet& test,
                  const std::string& manifest_json);
std::pair<SampleSet, SampleSet> load_dataset(const std::filesystem::path& root);

}  // namespace dep
