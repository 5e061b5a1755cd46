#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dep/dataset.hpp"

namespace dep {

enum class TextureKind {
  OrientedGrating,
  Checkerboard,
  FilteredNoise,
  BlobField,
  StripeJitter,
  Composite,
};

TextureKind texture_kind_from_string(const std::string& s);
std::string to_string(TextureKind k);

struct ParamRange {
  double lo = 0;
  double hi = 0;
};

struct TextureSpec {
  int class_id = 0;
  std::string name;
  TextureKind kind = TextureKind::OrientedGrating;
  ParamRange frequency{6, 10};    // cycles per image (gratings/stripes) or cell size in px
  ParamRange orientation{0, 3.141592653589793};
  ParamRange exponent{1, 3};      // spectral falloff for filtered noise
  ParamRange density{8, 16};      // blob count
};

// Six default classes: three with layout structure (grating, checkerboard,
// jittered stripes) and three orderless (two noise exponents, blob field).
std::vector<TextureSpec> default_specs();

struct GeneratedDataset {
  SampleSet train;
  SampleSet test;
  std::string manifest_json;
};

// Deterministic under seed; 80/20 train/test split stratified by class, with
// train and test instances drawn from disjoint rng substreams. Adds light
// pixel noise (sigma `noise`) and a random per-image tint shared across all
// classes so color carries no class signal.
GeneratedDataset generate(const std::vector<TextureSpec>& specs, int per_class, int size,
                          std::uint64_t seed, double noise = 0.02);

}  // namespace dep
