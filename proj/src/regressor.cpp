#include "dep/regressor.hpp"

#include <algorithm>
#include <numeric>

#include "dep/trainer.hpp"

namespace dep {

void RegressorConfig::validate() const {
  if (input_dim < 1 || output_dim < 1 || batch < 1 || lr <= 0 || momentum < 0 || decay <= 0 ||
      decay_period < 1 || epochs < 1)
    throw ConfigError("regressor: all parameters must be positive");
  for (Index h : hidden)
    if (h < 1) throw ConfigError("regressor: hidden widths must be >= 1");
}

ManifoldModel::ManifoldModel(const RegressorConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  std::vector<Index> dims;
  dims.push_back(cfg_.input_dim);
  dims.insert(dims.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  dims.push_back(cfg_.output_dim);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    linears_.push_back(LinearLayer::make("reg.fc" + std::to_string(i), dims[i], dims[i + 1],
                                         rng.stream(i), 0, WeightInit::XavierUniform));
    if (i + 2 < dims.size())
      norms_.push_back(BatchNormLayer::make("reg.bn" + std::to_string(i + 1), dims[i + 1], 1.0, 0));
  }
}

Var ManifoldModel::forward(Graph& g, Binder& bind, Var x, Mode mode) {
  (void)g;
  const Tensor& X = x.value();
  if (X.rank() != 2 || X.dim(1) != cfg_.input_dim)
    throw DimensionError("regressor: expected [b," + std::to_string(cfg_.input_dim) +
                         "] features, got " + shape_str(X.shape()));
  Var y = linears_[0].forward(bind, x);
  for (std::size_t i = 0; i < norms_.size(); ++i) {
    y = relu(norms_[i].forward(bind, y, mode));
    y = linears_[i + 1].forward(bind, y);
  }
  return y;
}

std::vector<Parameter*> ManifoldModel::parameters() {
  std::vector<Parameter*> out;
  for (LinearLayer& l : linears_) l.collect(out);
  for (BatchNormLayer& n : norms_) n.collect(out);
  return out;
}

namespace {

double eval_mse(ManifoldModel& model, const Tensor& features, const Tensor& targets) {
  const Tensor pred = embed(model, features);
  return (pred.vec() - targets.vec()).squaredNorm() / static_cast<double>(targets.size());
}

}  // namespace

RegressorTrainResult train_regressor(ManifoldModel& model, const Tensor& features,
                                     const std::vector<std::string>& feature_ids,
                                     const EmbeddedDistribution& targets,
                                     const RegressorConfig& cfg) {
  cfg.validate();
  if (features.rank() != 2)
    throw DimensionError("train_regressor: features must be rank 2, got " +
                         shape_str(features.shape()));
  const Index n = features.dim(0);
  if (static_cast<Index>(feature_ids.size()) != n)
    throw DataError("train_regressor: feature ids do not match feature rows");

  // Align target coordinates to feature order by id.
  std::map<std::string, Eigen::Index> target_row;
  for (std::size_t i = 0; i < targets.ids.size(); ++i)
    target_row[targets.ids[i]] = static_cast<Eigen::Index>(i);
  std::vector<std::string> missing;
  Tensor Y({n, static_cast<Index>(targets.coords.cols())});
  for (Index i = 0; i < n; ++i) {
    auto it = target_row.find(feature_ids[static_cast<std::size_t>(i)]);
    if (it == target_row.end()) {
      missing.push_back(feature_ids[static_cast<std::size_t>(i)]);
      continue;
    }
    for (Eigen::Index d = 0; d < targets.coords.cols(); ++d)
      Y.at(i, d) = targets.coords(it->second, d);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 8; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 8) list += ", ...";
    throw DataError("train_regressor: " + std::to_string(missing.size()) +
                    " feature ids have no embedding target: " + list);
  }

  RegressorTrainResult result;
  result.initial_mse = eval_mse(model, features, Y);

  SgdOptimizer opt(cfg.momentum);
  const std::size_t count = static_cast<std::size_t>(n);
  std::vector<std::size_t> order(count);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(cfg.lr, cfg.decay, cfg.decay_period, epoch);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = Rng(cfg.seed).stream(0x6u).stream(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = count; i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle.uniform_int(i))]);

    double loss_sum = 0;
    for (std::size_t start = 0; start < count; start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(count, start + static_cast<std::size_t>(cfg.batch));
      const Index bs = static_cast<Index>(end - start);
      Tensor xb({bs, features.dim(1)});
      Tensor yb({bs, Y.dim(1)});
      for (std::size_t i = start; i < end; ++i) {
        const Index row = static_cast<Index>(order[i]);
        const Index out_row = static_cast<Index>(i - start);
        std::copy(features.data() + row * features.dim(1),
                  features.data() + (row + 1) * features.dim(1),
                  xb.data() + out_row * features.dim(1));
        std::copy(Y.data() + row * Y.dim(1), Y.data() + (row + 1) * Y.dim(1),
                  yb.data() + out_row * Y.dim(1));
      }
      Graph g;
      Binder bind(g);
      Var pred = model.forward(g, bind, g.leaf(std::move(xb)), Mode::Train);
      Var loss = mse_loss(pred, g.leaf(std::move(yb)));
      g.backward(loss);
      loss_sum += loss.value()[0] * static_cast<double>(end - start);

      std::vector<std::pair<Parameter*, const Tensor*>> grads;
      std::vector<double> lrs;
      for (const auto& [param, var] : bind.bound()) {
        grads.emplace_back(param, &g.grad(var.id));
        lrs.push_back(lr);
      }
      opt.step(grads, lrs);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(count));
  }
  result.final_mse = eval_mse(model, features, Y);
  return result;
}

Tensor embed(ManifoldModel& model, const Tensor& features) {
  if (features.rank() != 2)
    throw DimensionError("embed: features must be rank 2, got " + shape_str(features.shape()));
  const Index n = features.dim(0), d = features.dim(1);
  Tensor out({n, model.config().output_dim});
  for (Index i = 0; i < n; ++i) {
    Tensor row({1, d});
    std::copy(features.data() + i * d, features.data() + (i + 1) * d, row.data());
    Graph g;
    Binder bind(g);
    Var y = model.forward(g, bind, g.leaf(std::move(row)), Mode::Eval);
    std::copy(y.value().data(), y.value().data() + y.value().size(),
              out.data() + i * model.config().output_dim);
  }
  return out;
}

}  // namespace dep
