#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dep/dataset.hpp"
#include "dep/model.hpp"
#include "dep/rng.hpp"

namespace dep {

enum class ResizeMode { Square, ShortEdge };

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  int batch = 32;
  double decay = 0.1;
  int decay_period = 10;
  int epochs = 30;
  double new_layer_mult = 10.0;
  std::uint64_t seed = 0;
  std::vector<int> scales = {256, 384, 512};
  int crop = 256;
  int input = 224;
  int eval_scale = 0;  // 0 = crop size
  ResizeMode resize_mode = ResizeMode::Square;
  int eval_every = 1;
  int save_every = 0;

  void validate() const;
};

// Step schedule: base * decay^floor(epoch / period).
double lr_at(double base, double decay, int period, int epoch);
inline double lr_at(const TrainConfig& cfg, int epoch) {
  return lr_at(cfg.lr, cfg.decay, cfg.decay_period, epoch);
}

// For each scale s: square bilinear resize to s x s, then centered crop
// (zero-padded when s < crop).
std::vector<Tensor> multiscale_expand(const Tensor& image, const std::vector<int>& scales, int crop);
std::vector<LabeledImage> multiscale_expand_set(const SampleSet& set, const std::vector<int>& scales,
                                                int crop);

ChannelStats compute_channel_stats(const std::vector<LabeledImage>& items);
Tensor standardize(const Tensor& img, const ChannelStats& stats);

// Random resized crop (area 0.8-1.0, aspect 3/4-4/3), resize to out_size,
// 50% horizontal flip, then per-channel standardization.
Tensor augment(const Tensor& patch, int out_size, const ChannelStats& stats, Rng rng);

// Deterministic eval-time preprocessing: resize (square or short-edge),
// center crop, standardize.
Tensor eval_preprocess(const Tensor& image, const TrainConfig& cfg, const ChannelStats& stats);

// Heavy-ball SGD: v <- momentum*v - lr*g; p <- p + v.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(double momentum) : momentum_(momentum) {}

  void step(const std::vector<std::pair<Parameter*, const Tensor*>>& grads,
            const std::vector<double>& lrs);
  std::map<std::string, Tensor>& velocities() { return velocity_; }
  double momentum() const { return momentum_; }

 private:
  double momentum_;
  std::map<std::string, Tensor> velocity_;
};

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::int64_t> counts;  // K*K row-major, rows = true class

  static ConfusionMatrix zero(std::vector<std::string> classes);
  void add(int truth, int predicted);
  std::int64_t at(int truth, int predicted) const;
  std::int64_t total() const;
  std::int64_t trace() const;
  double accuracy() const;
};

struct EvalResult {
  double accuracy = 0;
  ConfusionMatrix cm;
};

EvalResult evaluate(TextureModel& model, const SampleSet& eval_set, const ChannelStats& stats,
                    const TrainConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;
  double eval_acc = 0;
};

struct TrainHooks {
  std::function<void(const EpochMetrics&)> on_epoch;
  // called per save_every epochs and at the end of training
  std::function<void(int epoch, const ChannelStats&)> at_checkpoint;
};

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  EvalResult final_eval;
  ChannelStats stats;
};

// Full training run over multiscale-expanded patches. Deterministic for a
// fixed seed: shuffles and augmentation draws depend only on
// (seed, epoch, index).
TrainResult train_model(TextureModel& model, SgdOptimizer& opt, const SampleSet& train_set,
                        const SampleSet& test_set, const TrainConfig& cfg, int start_epoch = 0,
                        const TrainHooks& hooks = {});

}  // namespace dep
