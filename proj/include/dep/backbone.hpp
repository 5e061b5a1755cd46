#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dep/layers.hpp"

namespace dep {

// Shape contract for the convolutional feature extractor. Each stage opens
// with a (possibly strided) residual block; projection skips appear whenever
// channel count or stride changes.
struct BackboneConfig {
  bool has_stem = true;
  Index in_channels = 3;
  Index stem_channels = 8;
  int stem_kernel = 3;
  int stem_stride = 1;
  bool stem_pool = false;  // 3x3 stride-2 max pool after the stem
  std::vector<Index> widths = {8, 16, 32, 64};
  std::vector<int> blocks = {1, 1, 1, 1};
  std::vector<int> strides = {2, 2, 2, 2};

  static BackboneConfig mini();
  static BackboneConfig paper18();
  static BackboneConfig identity(Index channels);

  void validate() const;
  Index out_channels() const;
  std::pair<Index, Index> out_spatial(Index h, Index w) const;
};

struct ResidualBlock {
  Conv2dLayer conv1, conv2;
  BatchNormLayer bn1, bn2;
  std::optional<Conv2dLayer> proj;
  std::optional<BatchNormLayer> proj_bn;

  static ResidualBlock make(const std::string& name, Index in, Index out, int stride, Rng rng,
                            int group);
  Var forward(Binder& bind, Var x, Mode mode);
  void collect(std::vector<Parameter*>& out);
};

class Backbone {
 public:
  Backbone() = default;
  Backbone(const BackboneConfig& cfg, Rng rng, int group = 0);

  Var forward(Graph& g, Binder& bind, Var images, Mode mode);
  void collect(std::vector<Parameter*>& out);
  const BackboneConfig& config() const { return cfg_; }

 private:
  BackboneConfig cfg_;
  std::optional<Conv2dLayer> stem_;
  std::optional<BatchNormLayer> stem_bn_;
  std::vector<ResidualBlock> blocks_;
};

}  // namespace dep
