#pragma once

#include <cstdint>
#include <vector>

#include "dep/layers.hpp"
#include "dep/tsne.hpp"

namespace dep {

struct RegressorConfig {
  Index input_dim = 128;
  std::vector<Index> hidden = {500, 500, 2000};
  Index output_dim = 2;
  int batch = 2048;
  double lr = 0.01;
  double momentum = 0.9;
  double decay = 0.1;
  int decay_period = 30;
  int epochs = 80;
  std::uint64_t seed = 0;

  void validate() const;
};

// Feed-forward regressor from feature vectors to 2-D manifold coordinates.
// Raw features enter a linear layer; every later layer is preceded by
// batchnorm and ReLU; the final linear output has no activation.
class ManifoldModel {
 public:
  ManifoldModel() = default;
  ManifoldModel(const RegressorConfig& cfg, std::uint64_t seed);

  Var forward(Graph& g, Binder& bind, Var x, Mode mode);
  std::vector<Parameter*> parameters();
  const RegressorConfig& config() const { return cfg_; }

 private:
  RegressorConfig cfg_;
  std::vector<LinearLayer> linears_;
  std::vector<BatchNormLayer> norms_;  // norms_[i] precedes linears_[i+1]
};

struct RegressorTrainResult {
  std::vector<double> epoch_loss;  // train-mode mean batch loss per epoch
  double initial_mse = 0;          // eval-mode MSE over the training set, before training
  double final_mse = 0;            // same measurement after training
};

// L2 regression onto t-SNE target coordinates, matched by sample id.
RegressorTrainResult train_regressor(ManifoldModel& model, const Tensor& features,
                                     const std::vector<std::string>& feature_ids,
                                     const EmbeddedDistribution& targets,
                                     const RegressorConfig& cfg);

// Eval-mode embedding; processes samples one at a time so batch composition
// can never change a sample's output.
Tensor embed(ManifoldModel& model, const Tensor& features);

}  // namespace dep
