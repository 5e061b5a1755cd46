#include "dep/model.hpp"

namespace dep {

HeadVariant head_variant_from_string(const std::string& s) {
  if (s == "dep") return HeadVariant::Dep;
  if (s == "gap") return HeadVariant::GapOnly;
  if (s == "encoding") return HeadVariant::EncodingOnly;
  throw ConfigError("head variant must be one of dep, gap, encoding; got '" + s + "'");
}

std::string to_string(HeadVariant v) {
  switch (v) {
    case HeadVariant::Dep: return "dep";
    case HeadVariant::GapOnly: return "gap";
    case HeadVariant::EncodingOnly: return "encoding";
  }
  return "?";
}

TextureModel::TextureModel(const BackboneConfig& bcfg, const HeadConfig& hcfg, std::uint64_t seed)
    : bcfg_(bcfg), hcfg_(hcfg) {
  bcfg_.validate();
  if (hcfg_.classes < 1) throw ConfigError("head: classes must be >= 1");
  Rng rng(seed);
  backbone_ = Backbone(bcfg_, rng.stream(1), 0);
  const Index C = bcfg_.out_channels();
  Rng hr = rng.stream(2);
  switch (hcfg_.variant) {
    case HeadVariant::Dep: {
      cb_ = Codebook::init(hcfg_.codewords, C, hr.stream(1), "head.codebook", 1);
      fc1_enc_ = LinearLayer::make("head.fc1_enc", hcfg_.codewords * C, hcfg_.reduce_enc,
                                   hr.stream(2), 1);
      fc1_pool_ = LinearLayer::make("head.fc1_pool", C, hcfg_.reduce_pool, hr.stream(3), 1);
      fc2_ = LinearLayer::make("head.fc2", hcfg_.reduce_enc * hcfg_.reduce_pool, hcfg_.fc2_out,
                               hr.stream(4), 1);
      cls_ = LinearLayer::make("head.classifier", hcfg_.fc2_out, hcfg_.classes, hr.stream(5), 1);
      break;
    }
    case HeadVariant::GapOnly: {
      cls_ = LinearLayer::make("head.classifier", C, hcfg_.classes, hr.stream(5), 1);
      break;
    }
    case HeadVariant::EncodingOnly: {
      reduce_ = Conv2dLayer::make("head.reduce", C, hcfg_.enc_channels, 1, 1, 0, true, hr.stream(6), 1);
      cb_ = Codebook::init(hcfg_.enc_codewords, hcfg_.enc_channels, hr.stream(1), "head.codebook", 1);
      cls_ = LinearLayer::make("head.classifier", hcfg_.enc_codewords * hcfg_.enc_channels,
                               hcfg_.classes, hr.stream(5), 1);
      break;
    }
  }
}

Var TextureModel::Forward::tap(std::string_view name) const {
  for (const auto& [n, v] : taps)
    if (n == name) return v;
  throw ContractError("model: no tap named '" + std::string(name) + "'");
}

TextureModel::Forward TextureModel::forward(Graph& g, Binder& bind, Var images, Mode mode) {
  Var feats = backbone_.forward(g, bind, images, mode);
  return forward_features(g, bind, feats, mode);
}

TextureModel::Forward TextureModel::forward_features(Graph& g, Binder& bind, Var features,
                                                     Mode mode) {
  (void)g;
  const Tensor& F = features.value();
  if (F.rank() != 4)
    throw DimensionError("head: expected [B,C,H,W] features, got " + shape_str(F.shape()));
  const Index C = bcfg_.out_channels();
  if (F.dim(1) != C)
    throw DimensionError("head: expected " + std::to_string(C) + " feature channels, got " +
                         shape_str(F.shape()));
  Forward out;
  switch (hcfg_.variant) {
    case HeadVariant::Dep: {
      Var enc = encode_batch(features, bind(cb_->codewords), bind(cb_->smoothing));
      Var pool = global_avg_pool(features);
      Var a = fc1_enc_->forward(bind, enc);
      Var b = fc1_pool_->forward(bind, pool);
      Var fused = l2_normalize_rows(outer_product(a, b));
      Var h = fc2_->forward(bind, fused);
      out.logits = cls_->forward(bind, relu(h));
      out.taps = {{"enc", enc}, {"pool", pool}, {"fc2", h}};
      break;
    }
    case HeadVariant::GapOnly: {
      Var pool = global_avg_pool(features);
      out.logits = cls_->forward(bind, pool);
      out.taps = {{"pool", pool}};
      break;
    }
    case HeadVariant::EncodingOnly: {
      Var r = reduce_->forward(bind, features);
      Var enc = encode_batch(r, bind(cb_->codewords), bind(cb_->smoothing));
      out.logits = cls_->forward(bind, enc);
      out.taps = {{"enc", enc}};
      break;
    }
  }
  return out;
}

std::vector<Parameter*> TextureModel::parameters() {
  std::vector<Parameter*> out;
  backbone_.collect(out);
  if (reduce_) reduce_->collect(out);
  if (cb_) {
    out.push_back(&cb_->codewords);
    out.push_back(&cb_->smoothing);
  }
  if (fc1_enc_) fc1_enc_->collect(out);
  if (fc1_pool_) fc1_pool_->collect(out);
  if (fc2_) fc2_->collect(out);
  if (cls_) cls_->collect(out);
  return out;
}

std::vector<std::string> TextureModel::tap_names() const {
  switch (hcfg_.variant) {
    case HeadVariant::Dep: return {"enc", "pool", "fc2"};
    case HeadVariant::GapOnly: return {"pool"};
    case HeadVariant::EncodingOnly: return {"enc"};
  }
  return {};
}

Index TextureModel::tap_dim(const std::string& name) const {
  const Index C = bcfg_.out_channels();
  if (name == "pool" &&
      (hcfg_.variant == HeadVariant::Dep || hcfg_.variant == HeadVariant::GapOnly))
    return C;
  if (name == "fc2" && hcfg_.variant == HeadVariant::Dep) return hcfg_.fc2_out;
  if (name == "enc" && hcfg_.variant == HeadVariant::Dep) return hcfg_.codewords * C;
  if (name == "enc" && hcfg_.variant == HeadVariant::EncodingOnly)
    return hcfg_.enc_codewords * hcfg_.enc_channels;
  throw ConfigError("model: unknown feature layer '" + name + "'; available: " + [this] {
    std::string s;
    for (const std::string& t : tap_names()) s += (s.empty() ? "" : ", ") + t;
    return s;
  }());
}

}  // namespace dep
