#include "dep/backbone.hpp"

namespace dep {

BackboneConfig BackboneConfig::mini() { return BackboneConfig{}; }

BackboneConfig BackboneConfig::paper18() {
  BackboneConfig c;
  c.stem_channels = 64;
  c.stem_kernel = 7;
  c.stem_stride = 2;
  c.stem_pool = true;
  c.widths = {64, 128, 256, 512};
  c.blocks = {2, 2, 2, 2};
  c.strides = {1, 2, 2, 2};
  return c;
}

BackboneConfig BackboneConfig::identity(Index channels) {
  BackboneConfig c;
  c.has_stem = false;
  c.in_channels = channels;
  c.widths.clear();
  c.blocks.clear();
  c.strides.clear();
  return c;
}

void BackboneConfig::validate() const {
  if (widths.size() != blocks.size() || widths.size() != strides.size())
    throw ConfigError("backbone: widths, blocks and strides must have equal length");
  for (Index w : widths)
    if (w < 1) throw ConfigError("backbone: stage width must be >= 1");
  for (int b : blocks)
    if (b < 1) throw ConfigError("backbone: blocks per stage must be >= 1");
  for (int s : strides)
    if (s < 1) throw ConfigError("backbone: stage stride must be >= 1");
  if (has_stem && (stem_channels < 1 || stem_kernel < 1 || stem_stride < 1))
    throw ConfigError("backbone: bad stem configuration");
  if (!has_stem && !widths.empty())
    throw ConfigError("backbone: stages require a stem");
}

Index BackboneConfig::out_channels() const {
  if (!widths.empty()) return widths.back();
  return has_stem ? stem_channels : in_channels;
}

namespace {
Index conv_out(Index in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }
}  // namespace

std::pair<Index, Index> BackboneConfig::out_spatial(Index h, Index w) const {
  if (has_stem) {
    const int pad = stem_kernel / 2;
    h = conv_out(h, stem_kernel, stem_stride, pad);
    w = conv_out(w, stem_kernel, stem_stride, pad);
    if (stem_pool) {
      h = conv_out(h, 3, 2, 1);
      w = conv_out(w, 3, 2, 1);
    }
  }
  for (std::size_t s = 0; s < widths.size(); ++s) {
    h = conv_out(h, 3, strides[s], 1);
    w = conv_out(w, 3, strides[s], 1);
    // remaining blocks in the stage are stride 1 and spatial-preserving
  }
  if (h < 1 || w < 1)
    throw DimensionError("backbone: input too small for configured strides");
  return {h, w};
}

ResidualBlock ResidualBlock::make(const std::string& name, Index in, Index out, int stride, Rng rng,
                                  int group) {
  ResidualBlock b;
  b.conv1 = Conv2dLayer::make(name + ".conv1", in, out, 3, stride, 1, false, rng.stream(1), group);
  b.bn1 = BatchNormLayer::make(name + ".bn1", out, 1.0, group);
  b.conv2 = Conv2dLayer::make(name + ".conv2", out, out, 3, 1, 1, false, rng.stream(2), group);
  // final gamma starts at zero so a fresh block is the identity around the skip
  b.bn2 = BatchNormLayer::make(name + ".bn2", out, 0.0, group);
  if (in != out || stride != 1) {
    b.proj = Conv2dLayer::make(name + ".proj", in, out, 1, stride, 0, false, rng.stream(3), group);
    b.proj_bn = BatchNormLayer::make(name + ".proj_bn", out, 1.0, group);
  }
  return b;
}

Var ResidualBlock::forward(Binder& bind, Var x, Mode mode) {
  Var y = relu(bn1.forward(bind, conv1.forward(bind, x), mode));
  y = bn2.forward(bind, conv2.forward(bind, y), mode);
  Var skip = proj ? proj_bn->forward(bind, proj->forward(bind, x), mode) : x;
  return relu(add(y, skip));
}

void ResidualBlock::collect(std::vector<Parameter*>& out) {
  conv1.collect(out);
  bn1.collect(out);
  conv2.collect(out);
  bn2.collect(out);
  if (proj) proj->collect(out);
  if (proj_bn) proj_bn->collect(out);
}

Backbone::Backbone(const BackboneConfig& cfg, Rng rng, int group) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.has_stem) {
    stem_ = Conv2dLayer::make("backbone.stem", cfg_.in_channels, cfg_.stem_channels, cfg_.stem_kernel,
                              cfg_.stem_stride, cfg_.stem_kernel / 2, false, rng.stream(0), group);
    stem_bn_ = BatchNormLayer::make("backbone.stem_bn", cfg_.stem_channels, 1.0, group);
  }
  Index in = cfg_.has_stem ? cfg_.stem_channels : cfg_.in_channels;
  for (std::size_t s = 0; s < cfg_.widths.size(); ++s) {
    for (int b = 0; b < cfg_.blocks[s]; ++b) {
      const std::string name =
          "backbone.stage" + std::to_string(s) + ".block" + std::to_string(b);
      const int stride = b == 0 ? cfg_.strides[s] : 1;
      blocks_.push_back(
          ResidualBlock::make(name, in, cfg_.widths[s], stride, rng.stream(16 + s * 8 + b), group));
      in = cfg_.widths[s];
    }
  }
}

Var Backbone::forward(Graph& g, Binder& bind, Var images, Mode mode) {
  (void)g;
  const Tensor& X = images.value();
  if (X.rank() != 4)
    throw DimensionError("backbone: expected [B,C,H,W] input, got " + shape_str(X.shape()));
  if (X.dim(1) != cfg_.in_channels)
    throw DimensionError("backbone: expected " + std::to_string(cfg_.in_channels) +
                         " input channels, got " + shape_str(X.shape()));
  Var y = images;
  if (stem_) {
    y = relu(stem_bn_->forward(bind, stem_->forward(bind, y), mode));
    if (cfg_.stem_pool) y = maxpool2d(y, 3, 2, 1);
  }
  for (ResidualBlock& b : blocks_) y = b.forward(bind, y, mode);
  return y;
}

void Backbone::collect(std::vector<Parameter*>& out) {
  if (stem_) stem_->collect(out);
  if (stem_bn_) stem_bn_->collect(out);
  for (ResidualBlock& b : blocks_) b.collect(out);
}

}  // namespace dep
