#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dep/backbone.hpp"
#include "dep/encoding.hpp"

namespace dep {

enum class HeadVariant { Dep, GapOnly, EncodingOnly };

HeadVariant head_variant_from_string(const std::string& s);
std::string to_string(HeadVariant v);

struct HeadConfig {
  HeadVariant variant = HeadVariant::Dep;
  Index classes = 6;
  // fused head
  Index codewords = 8;
  Index reduce_enc = 16;   // I: texture factor width
  Index reduce_pool = 16;  // J: spatial factor width
  Index fc2_out = 128;
  // encoding-only head
  Index enc_codewords = 8;
  Index enc_channels = 16;  // 1x1 reduction target
};

// Backbone plus one of three classification heads: the fused
// encoding+pooling head, pooling only, or encoding only.
class TextureModel {
 public:
  TextureModel() = default;
  TextureModel(const BackboneConfig& bcfg, const HeadConfig& hcfg, std::uint64_t seed);

  struct Forward {
    Var logits;
    std::vector<std::pair<std::string, Var>> taps;
    Var tap(std::string_view name) const;
  };

  Forward forward(Graph& g, Binder& bind, Var images, Mode mode);
  // Head only, for externally supplied feature maps.
  Forward forward_features(Graph& g, Binder& bind, Var features, Mode mode);

  std::vector<Parameter*> parameters();
  const BackboneConfig& backbone_config() const { return bcfg_; }
  const HeadConfig& head_config() const { return hcfg_; }
  std::vector<std::string> tap_names() const;
  Index tap_dim(const std::string& name) const;

 private:
  BackboneConfig bcfg_;
  HeadConfig hcfg_;
  Backbone backbone_;
  std::optional<Codebook> cb_;
  std::optional<LinearLayer> fc1_enc_, fc1_pool_, fc2_, cls_;
  std::optional<Conv2dLayer> reduce_;
};

}  // namespace dep
