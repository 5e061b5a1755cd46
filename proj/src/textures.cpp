#include "dep/textures.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "dep/rng.hpp"

namespace dep {

namespace {

constexpr double kPi = 3.141592653589793;

double sample(const ParamRange& r, Rng& rng) { return rng.uniform(r.lo, r.hi); }

// All generators fill a [0,1] grayscale field of side `size`.

void gen_grating(std::vector<double>& g, Index size, const TextureSpec& spec, Rng& rng) {
  const double freq = sample(spec.frequency, rng);
  const double theta = sample(spec.orientation, rng);
  const double phase = rng.uniform(0, 2 * kPi);
  const double kx = std::cos(theta) * 2 * kPi * freq / static_cast<double>(size);
  const double ky = std::sin(theta) * 2 * kPi * freq / static_cast<double>(size);
  for (Index y = 0; y < size; ++y)
    for (Index x = 0; x < size; ++x)
      g[static_cast<std::size_t>(y * size + x)] =
          0.5 + 0.5 * std::sin(kx * static_cast<double>(x) + ky * static_cast<double>(y) + phase);
}

void gen_checkerboard(std::vector<double>& g, Index size, const TextureSpec& spec, Rng& rng) {
  const double cell = sample(spec.frequency, rng);
  const double theta = rng.uniform(-kPi / 16, kPi / 16);
  const double ox = rng.uniform(0, cell), oy = rng.uniform(0, cell);
  const double c = std::cos(theta), s = std::sin(theta);
  for (Index y = 0; y < size; ++y)
    for (Index x = 0; x < size; ++x) {
      const double u = (c * x - s * y + ox) / cell;
      const double v = (s * x + c * y + oy) / cell;
      const long parity =
          (static_cast<long>(std::floor(u)) + static_cast<long>(std::floor(v))) & 1;
      g[static_cast<std::size_t>(y * size + x)] = parity ? 0.85 : 0.15;
    }
}

void gen_filtered_noise(std::vector<double>& g, Index size, const TextureSpec& spec, Rng& rng) {
  const double alpha = sample(spec.exponent, rng);
  const int waves = 64;
  std::fill(g.begin(), g.end(), 0.0);
  for (int k = 0; k < waves; ++k) {
    const double f = rng.uniform(1.0, static_cast<double>(size) / 4.0);
    const double theta = rng.uniform(0, 2 * kPi);
    const double phase = rng.uniform(0, 2 * kPi);
    const double amp = std::pow(f, -alpha);
    const double kx = std::cos(theta) * 2 * kPi * f / static_cast<double>(size);
    const double ky = std::sin(theta) * 2 * kPi * f / static_cast<double>(size);
    for (Index y = 0; y < size; ++y)
      for (Index x = 0; x < size; ++x)
        g[static_cast<std::size_t>(y * size + x)] +=
            amp * std::cos(kx * static_cast<double>(x) + ky * static_cast<double>(y) + phase);
  }
  const auto [mn, mx] = std::minmax_element(g.begin(), g.end());
  const double span = std::max(*mx - *mn, 1e-9);
  for (double& v : g) v = (v - *mn) / span;
}

void gen_blob_field(std::vector<double>& g, Index size, const TextureSpec& spec, Rng& rng) {
  const int blobs = static_cast<int>(std::lround(sample(spec.density, rng)));
  std::fill(g.begin(), g.end(), 0.0);
  for (int k = 0; k < blobs; ++k) {
    const double cx = rng.uniform(0, static_cast<double>(size));
    const double cy = rng.uniform(0, static_cast<double>(size));
    const double r = rng.uniform(3.0, 5.5);
    const double inv = 1.0 / (2 * r * r);
    for (Index y = 0; y < size; ++y)
      for (Index x = 0; x < size; ++x) {
        const double dx = static_cast<double>(x) - cx;
        const double dy = static_cast<double>(y) - cy;
        g[static_cast<std::size_t>(y * size + x)] += std::exp(-(dx * dx + dy * dy) * inv);
      }
  }
  for (double& v : g) v = std::min(v, 1.0);
}

void gen_stripe_jitter(std::vector<double>& g, Index size, const TextureSpec& spec, Rng& rng) {
  const double period = sample(spec.frequency, rng);
  const double offset = rng.uniform(0, period);
  std::vector<double> jitter(static_cast<std::size_t>(size));
  double j = 0;
  for (Index y = 0; y < size; ++y) {
    j += rng.uniform(-1.2, 1.2);
    jitter[static_cast<std::size_t>(y)] = j;
  }
  for (Index y = 0; y < size; ++y)
    for (Index x = 0; x < size; ++x) {
      const double u = (static_cast<double>(x) + jitter[static_cast<std::size_t>(y)] + offset) / period;
      const double frac = u - std::floor(u);
      g[static_cast<std::size_t>(y * size + x)] = frac < 0.5 ? 0.9 : 0.1;
    }
}

void gen_pattern(std::vector<double>& g, Index size, const TextureSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case TextureKind::OrientedGrating: gen_grating(g, size, spec, rng); return;
    case TextureKind::Checkerboard: gen_checkerboard(g, size, spec, rng); return;
    case TextureKind::FilteredNoise: gen_filtered_noise(g, size, spec, rng); return;
    case TextureKind::BlobField: gen_blob_field(g, size, spec, rng); return;
    case TextureKind::StripeJitter: gen_stripe_jitter(g, size, spec, rng); return;
    case TextureKind::Composite: {
      std::vector<double> a(g.size()), b(g.size());
      gen_grating(a, size, spec, rng);
      gen_checkerboard(b, size, spec, rng);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.5 * (a[i] + b[i]);
      return;
    }
  }
}

Tensor render(const TextureSpec& spec, Index size, Rng rng, double noise) {
  std::vector<double> g(static_cast<std::size_t>(size * size));
  Rng pattern_rng = rng.stream(1);
  gen_pattern(g, size, spec, pattern_rng);
  // tint drawn from the same range for every class: color is uninformative
  Rng tint_rng = rng.stream(2);
  double tint[3];
  for (double& t : tint) t = tint_rng.uniform(0.55, 1.0);
  Rng noise_rng = rng.stream(3);
  Tensor img({3, size, size});
  for (Index c = 0; c < 3; ++c)
    for (Index i = 0; i < size * size; ++i) {
      double v = g[static_cast<std::size_t>(i)] * tint[c];
      if (noise > 0) v += noise * noise_rng.normal();
      img.data()[c * size * size + i] = std::clamp(v, 0.0, 1.0);
    }
  return img;
}

}  // namespace

TextureKind texture_kind_from_string(const std::string& s) {
  if (s == "grating") return TextureKind::OrientedGrating;
  if (s == "checkerboard") return TextureKind::Checkerboard;
  if (s == "noise") return TextureKind::FilteredNoise;
  if (s == "blobs") return TextureKind::BlobField;
  if (s == "stripes") return TextureKind::StripeJitter;
  if (s == "composite") return TextureKind::Composite;
  throw ConfigError("unknown texture kind '" + s + "'");
}

std::string to_string(TextureKind k) {
  switch (k) {
    case TextureKind::OrientedGrating: return "grating";
    case TextureKind::Checkerboard: return "checkerboard";
    case TextureKind::FilteredNoise: return "noise";
    case TextureKind::BlobField: return "blobs";
    case TextureKind::StripeJitter: return "stripes";
    case TextureKind::Composite: return "composite";
  }
  return "?";
}

std::vector<TextureSpec> default_specs() {
  std::vector<TextureSpec> specs(6);
  specs[0] = {0, "grating", TextureKind::OrientedGrating, {6, 10}, {0, kPi}, {1, 1}, {0, 0}};
  specs[1] = {1, "checkerboard", TextureKind::Checkerboard, {6, 10}, {0, 0}, {1, 1}, {0, 0}};
  specs[2] = {2, "stripes", TextureKind::StripeJitter, {8, 12}, {0, 0}, {1, 1}, {0, 0}};
  specs[3] = {3, "noise_rough", TextureKind::FilteredNoise, {0, 0}, {0, 0}, {0.8, 1.4}, {0, 0}};
  specs[4] = {4, "noise_smooth", TextureKind::FilteredNoise, {0, 0}, {0, 0}, {2.4, 3.2}, {0, 0}};
  specs[5] = {5, "blobs", TextureKind::BlobField, {0, 0}, {0, 0}, {1, 1}, {8, 16}};
  return specs;
}

GeneratedDataset generate(const std::vector<TextureSpec>& specs, int per_class, int size,
                          std::uint64_t seed, double noise) {
  if (per_class < 1) throw ParameterError("generate: per-class count must be >= 1");
  if (size < 8) throw ParameterError("generate: image size must be >= 8");
  std::set<int> ids;
  for (const TextureSpec& s : specs)
    if (!ids.insert(s.class_id).second)
      throw ParameterError("generate: duplicate class id " + std::to_string(s.class_id));

  GeneratedDataset out;
  for (const TextureSpec& s : specs) {
    out.train.classes.push_back(s.name);
    out.test.classes.push_back(s.name);
  }

  const int n_test = static_cast<int>(std::lround(0.2 * per_class));
  const int n_train = per_class - n_test;
  Rng root(seed);
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const TextureSpec& spec = specs[c];
    Rng class_rng = root.stream(static_cast<std::uint64_t>(spec.class_id));
    for (int split = 0; split < 2; ++split) {
      const int count = split == 0 ? n_train : n_test;
      const char* split_name = split == 0 ? "train" : "test";
      Rng split_rng = class_rng.stream(static_cast<std::uint64_t>(split));
      SampleSet& set = split == 0 ? out.train : out.test;
      for (int i = 0; i < count; ++i) {
        LabeledImage item;
        char idx[8];
        std::snprintf(idx, sizeof(idx), "%04d", i);
        item.id = std::string(split_name) + "/" + spec.name + "/" + idx;
        item.label = static_cast<int>(c);
        item.image = render(spec, size, split_rng.stream(static_cast<std::uint64_t>(i)), noise);
        set.items.push_back(std::move(item));
      }
    }
  }

  nlohmann::ordered_json manifest;
  manifest["seed"] = seed;
  manifest["size"] = size;
  manifest["per_class"] = per_class;
  manifest["noise"] = noise;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const TextureSpec& s : specs) {
    classes.push_back({{"id", s.class_id},
                       {"name", s.name},
                       {"kind", to_string(s.kind)},
                       {"frequency", {s.frequency.lo, s.frequency.hi}},
                       {"orientation", {s.orientation.lo, s.orientation.hi}},
                       {"exponent", {s.exponent.lo, s.exponent.hi}},
                       {"density", {s.density.lo, s.density.hi}}});
  }
  manifest["classes"] = std::move(classes);
  manifest["counts"] = {{"train", n_train}, {"test", n_test}};
  out.manifest_json = manifest.dump(2);
  return out;
}

}  // namespace dep
