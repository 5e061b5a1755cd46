#include "dep/layers.hpp"

#include <cmath>

namespace dep {

Tensor init_xavier(Index fan_in, Index fan_out, Rng& rng) {
  if (fan_in < 1 || fan_out < 1) throw ParameterError("init_xavier: fans must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

Tensor init_kaiming(Shape shape, Index fan_in, Rng& rng) {
  if (fan_in < 1) throw ParameterError("init_kaiming: fan_in must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

LinearLayer LinearLayer::make(const std::string& name, Index in, Index out, Rng rng, int group,
                              WeightInit init) {
  LinearLayer l;
  Rng wr = rng.stream(1);
  Tensor w = init == WeightInit::XavierUniform ? init_xavier(in, out, wr)
                                               : init_kaiming({in, out}, in, wr);
  l.weight = Parameter{name + ".weight", std::move(w), group};
  l.bias = Parameter{name + ".bias", Tensor({out}), group};
  return l;
}

Var LinearLayer::forward(Binder& bind, Var x) {
  return add_rowwise(matmul(x, bind(weight)), bind(bias));
}

void LinearLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Conv2dLayer Conv2dLayer::make(const std::string& name, Index in, Index out, int k, int stride,
                              int pad, bool with_bias, Rng rng, int group) {
  Conv2dLayer c;
  Rng wr = rng.stream(1);
  c.kernel = Parameter{name + ".kernel", init_kaiming({out, in, k, k}, in * k * k, wr), group};
  if (with_bias) c.bias = Parameter{name + ".bias", Tensor({out}), group};
  c.stride = stride;
  c.pad = pad;
  return c;
}

Var Conv2dLayer::forward(Binder& bind, Var x) {
  Var y = conv2d(x, bind(kernel), stride, pad);
  if (bias) y = add_channelwise(y, bind(*bias));
  return y;
}

void Conv2dLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&kernel);
  if (bias) out.push_back(&*bias);
}

BatchNormLayer BatchNormLayer::make(const std::string& name, Index features, double gamma_init,
                                    int group) {
  BatchNormLayer bn;
  bn.gamma = Parameter{name + ".gamma", Tensor::full({features}, gamma_init), group};
  bn.beta = Parameter{name + ".beta", Tensor({features}), group};
  bn.state.running_mean = Tensor::zeros({features});
  bn.state.running_var = Tensor::ones({features});
  return bn;
}

Var BatchNormLayer::forward(Binder& bind, Var x, Mode mode) {
  return batchnorm(x, bind(gamma), bind(beta), &state, eps, momentum, mode);
}

void BatchNormLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

}  // namespace dep
