#include "dep/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dep/image.hpp"

namespace dep {

void TrainConfig::validate() const {
  if (lr <= 0 || momentum < 0 || batch < 1 || decay <= 0 || decay_period < 1 || epochs < 1 ||
      new_layer_mult <= 0 || crop < 1 || input < 1)
    throw ConfigError("train: all schedule parameters must be positive");
  if (decay_period > epochs) throw ConfigError("train: decay period must be <= total epochs");
  if (scales.empty()) throw ParameterError("train: scale list must not be empty");
}

double lr_at(double base, double decay, int period, int epoch) {
  return base * std::pow(decay, static_cast<double>(epoch / period));
}

std::vector<Tensor> multiscale_expand(const Tensor& image, const std::vector<int>& scales, int crop) {
  if (scales.empty()) throw ParameterError("multiscale_expand: empty scale list");
  if (crop < 1) throw ParameterError("multiscale_expand: crop must be >= 1");
  std::vector<Tensor> patches;
  patches.reserve(scales.size());
  for (int s : scales) {
    if (s < 1) throw ParameterError("multiscale_expand: scales must be >= 1");
    patches.push_back(center_crop_pad(resize_bilinear(image, s, s), crop));
  }
  return patches;
}

std::vector<LabeledImage> multiscale_expand_set(const SampleSet& set, const std::vector<int>& scales,
                                                int crop) {
  std::vector<LabeledImage> out;
  out.reserve(set.items.size() * scales.size());
  for (const LabeledImage& item : set.items) {
    std::vector<Tensor> patches = multiscale_expand(item.image, scales, crop);
    for (std::size_t p = 0; p < patches.size(); ++p)
      out.push_back(LabeledImage{item.id + "#s" + std::to_string(scales[p]), item.label,
                                 std::move(patches[p])});
  }
  return out;
}

ChannelStats compute_channel_stats(const std::vector<LabeledImage>& items) {
  ChannelStats stats;
  if (items.empty()) return stats;
  std::array<double, 3> sum{0, 0, 0};
  std::array<double, 3> sumsq{0, 0, 0};
  std::array<double, 3> count{0, 0, 0};
  for (const LabeledImage& item : items) {
    const Tensor& img = item.image;
    const Index HW = img.dim(1) * img.dim(2);
    for (Index c = 0; c < 3; ++c) {
      const double* p = img.data() + c * HW;
      for (Index i = 0; i < HW; ++i) {
        sum[static_cast<std::size_t>(c)] += p[i];
        sumsq[static_cast<std::size_t>(c)] += p[i] * p[i];
      }
      count[static_cast<std::size_t>(c)] += static_cast<double>(HW);
    }
  }
  for (std::size_t c = 0; c < 3; ++c) {
    stats.mean[c] = sum[c] / count[c];
    const double var = sumsq[c] / count[c] - stats.mean[c] * stats.mean[c];
    stats.stddev[c] = std::sqrt(std::max(var, 1e-12));
  }
  return stats;
}

Tensor standardize(const Tensor& img, const ChannelStats& stats) {
  Tensor out = img;
  const Index HW = img.dim(1) * img.dim(2);
  for (Index c = 0; c < 3; ++c) {
    double* p = out.data() + c * HW;
    const double m = stats.mean[static_cast<std::size_t>(c)];
    const double s = stats.stddev[static_cast<std::size_t>(c)];
    for (Index i = 0; i < HW; ++i) p[i] = (p[i] - m) / s;
  }
  return out;
}

Tensor augment(const Tensor& patch, int out_size, const ChannelStats& stats, Rng rng) {
  const Index H = patch.dim(1), W = patch.dim(2);
  const double area = static_cast<double>(H * W);
  Index ch = 0, cw = 0;
  bool found = false;
  for (int attempt = 0; attempt < 10 && !found; ++attempt) {
    const double target_area = area * rng.uniform(0.8, 1.0);
    const double aspect = rng.uniform(3.0 / 4.0, 4.0 / 3.0);
    const Index w = static_cast<Index>(std::lround(std::sqrt(target_area * aspect)));
    const Index h = static_cast<Index>(std::lround(std::sqrt(target_area / aspect)));
    if (w >= 1 && h >= 1 && w <= W && h <= H) {
      ch = h;
      cw = w;
      found = true;
    }
  }
  Tensor cropped;
  if (found) {
    const Index top = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(H - ch + 1)));
    const Index left = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(W - cw + 1)));
    cropped = crop(patch, top, left, ch, cw);
  } else {
    const Index side = std::min(H, W);
    cropped = crop(patch, (H - side) / 2, (W - side) / 2, side, side);
  }
  Tensor resized = resize_bilinear(cropped, out_size, out_size);
  if (rng.uniform() < 0.5) resized = hflip(resized);
  return standardize(resized, stats);
}

Tensor eval_preprocess(const Tensor& image, const TrainConfig& cfg, const ChannelStats& stats) {
  const int scale = cfg.eval_scale > 0 ? cfg.eval_scale : cfg.crop;
  Tensor resized = cfg.resize_mode == ResizeMode::Square ? resize_bilinear(image, scale, scale)
                                                         : resize_short_edge(image, scale);
  return standardize(center_crop_pad(resized, cfg.crop), stats);
}

void SgdOptimizer::step(const std::vector<std::pair<Parameter*, const Tensor*>>& grads,
                        const std::vector<double>& lrs) {
  if (grads.size() != lrs.size()) throw ContractError("sgd: grads and lrs length mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    Parameter& p = *grads[i].first;
    const Tensor& g = *grads[i].second;
    if (!g.same_shape(p.value))
      throw DimensionError("sgd: gradient shape " + shape_str(g.shape()) + " vs parameter '" +
                           p.name + "' " + shape_str(p.value.shape()));
    if (!g.all_finite())
      throw NumericError("sgd: non-finite gradient for parameter '" + p.name + "'");
    auto it = velocity_.find(p.name);
    if (it == velocity_.end()) it = velocity_.emplace(p.name, Tensor::zeros(p.value.shape())).first;
    Tensor& v = it->second;
    v.vec() = momentum_ * v.vec() - lrs[i] * g.vec();
    p.value.vec() += v.vec();
  }
}

ConfusionMatrix ConfusionMatrix::zero(std::vector<std::string> classes) {
  ConfusionMatrix cm;
  const std::size_t k = classes.size();
  cm.classes = std::move(classes);
  cm.counts.assign(k * k, 0);
  return cm;
}

void ConfusionMatrix::add(int truth, int predicted) {
  const int k = static_cast<int>(classes.size());
  if (truth < 0 || truth >= k || predicted < 0 || predicted >= k)
    throw DataError("confusion: class id out of range");
  counts[static_cast<std::size_t>(truth * k + predicted)]++;
}

std::int64_t ConfusionMatrix::at(int truth, int predicted) const {
  return counts[static_cast<std::size_t>(truth * static_cast<int>(classes.size()) + predicted)];
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) t += counts[i * classes.size() + i];
  return t;
}

double ConfusionMatrix::accuracy() const {
  const std::int64_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

namespace {

Tensor stack_images(const std::vector<Tensor>& images) {
  const Index C = images[0].dim(0), H = images[0].dim(1), W = images[0].dim(2);
  Tensor batch({static_cast<Index>(images.size()), C, H, W});
  for (std::size_t i = 0; i < images.size(); ++i)
    std::copy(images[i].data(), images[i].data() + images[i].size(),
              batch.data() + static_cast<Index>(i) * C * H * W);
  return batch;
}

}  // namespace

EvalResult evaluate(TextureModel& model, const SampleSet& eval_set, const ChannelStats& stats,
                    const TrainConfig& cfg) {
  if (eval_set.items.empty()) throw DataError("evaluate: empty dataset");
  const int k = static_cast<int>(eval_set.classes.size());
  for (const LabeledImage& item : eval_set.items)
    if (item.label < 0 || item.label >= k)
      throw DataError("evaluate: label " + std::to_string(item.label) + " out of range for " +
                      std::to_string(k) + " classes (sample " + item.id + ")");
  EvalResult result;
  result.cm = ConfusionMatrix::zero(eval_set.classes);
  const std::size_t n = eval_set.items.size();
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch)) {
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch));
    std::vector<Tensor> images;
    images.reserve(end - start);
    for (std::size_t i = start; i < end; ++i)
      images.push_back(eval_preprocess(eval_set.items[i].image, cfg, stats));
    Graph g;
    Binder bind(g);
    Var logits = model.forward(g, bind, g.leaf(stack_images(images)), Mode::Eval).logits;
    const Tensor& L = logits.value();
    for (std::size_t i = start; i < end; ++i) {
      const double* row = L.data() + static_cast<Index>(i - start) * L.dim(1);
      int arg = 0;
      for (Index c = 1; c < L.dim(1); ++c)
        if (row[c] > row[arg]) arg = static_cast<int>(c);
      result.cm.add(eval_set.items[i].label, arg);
    }
  }
  result.accuracy = result.cm.accuracy();
  return result;
}

TrainResult train_model(TextureModel& model, SgdOptimizer& opt, const SampleSet& train_set,
                        const SampleSet& test_set, const TrainConfig& cfg, int start_epoch,
                        const TrainHooks& hooks) {
  cfg.validate();
  if (train_set.items.empty()) throw DataError("train: empty training set");
  std::vector<LabeledImage> patches = multiscale_expand_set(train_set, cfg.scales, cfg.crop);
  const ChannelStats stats = compute_channel_stats(patches);

  std::vector<Parameter*> params = model.parameters();
  TrainResult result;
  result.stats = stats;
  const std::size_t n = patches.size();
  std::vector<std::size_t> order(n);

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(cfg, epoch);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = Rng(cfg.seed).stream(0x5u).stream(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle.uniform_int(i))]);

    double loss_sum = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch));
      std::vector<Tensor> images;
      std::vector<int> labels;
      images.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const LabeledImage& item = patches[order[i]];
        Rng r = Rng(cfg.seed)
                    .stream(0xAu)
                    .stream(static_cast<std::uint64_t>(epoch))
                    .stream(static_cast<std::uint64_t>(order[i]));
        images.push_back(augment(item.image, cfg.input, stats, r));
        labels.push_back(item.label);
      }
      Graph g;
      Binder bind(g);
      Var logits = model.forward(g, bind, g.leaf(stack_images(images)), Mode::Train).logits;
      Var loss = cross_entropy_loss(logits, labels);
      g.backward(loss);
      loss_sum += loss.value()[0] * static_cast<double>(end - start);

      std::vector<std::pair<Parameter*, const Tensor*>> grads;
      std::vector<double> lrs;
      for (const auto& [param, var] : bind.bound()) {
        grads.emplace_back(param, &g.grad(var.id));
        lrs.push_back(lr * (param->group == 0 ? 1.0 : cfg.new_layer_mult));
      }
      opt.step(grads, lrs);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr;
    m.train_loss = loss_sum / static_cast<double>(n);
    const bool last = epoch + 1 == cfg.epochs;
    if (!test_set.items.empty() && (last || (cfg.eval_every > 0 && (epoch + 1) % cfg.eval_every == 0))) {
      EvalResult ev = evaluate(model, test_set, stats, cfg);
      m.eval_acc = ev.accuracy;
      if (last) result.final_eval = std::move(ev);
    }
    result.metrics.push_back(m);
    if (hooks.on_epoch) hooks.on_epoch(m);
    if (hooks.at_checkpoint && (last || (cfg.save_every > 0 && (epoch + 1) % cfg.save_every == 0)))
      hooks.at_checkpoint(epoch + 1, stats);
  }
  if (test_set.items.empty()) result.final_eval.cm = ConfusionMatrix::zero(train_set.classes);
  return result;
}

}  // namespace dep
