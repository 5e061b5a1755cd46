#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dep/ops.hpp"
#include "dep/rng.hpp"

namespace dep {

enum class WeightInit { KaimingUniform, XavierUniform };

// Uniform in +/- sqrt(6 / (fan_in + fan_out)).
Tensor init_xavier(Index fan_in, Index fan_out, Rng& rng);
// Uniform in +/- sqrt(6 / fan_in).
Tensor init_kaiming(Shape shape, Index fan_in, Rng& rng);

struct LinearLayer {
  Parameter weight;  // [in, out]
  Parameter bias;    // [out]

  static LinearLayer make(const std::string& name, Index in, Index out, Rng rng, int group,
                          WeightInit init = WeightInit::XavierUniform);
  Var forward(Binder& bind, Var x);
  void collect(std::vector<Parameter*>& out);
  Index in_dim() const { return weight.value.dim(0); }
  Index out_dim() const { return weight.value.dim(1); }
};

struct Conv2dLayer {
  Parameter kernel;  // [out, in, k, k]
  std::optional<Parameter> bias;
  int stride = 1;
  int pad = 0;

  static Conv2dLayer make(const std::string& name, Index in, Index out, int k, int stride, int pad,
                          bool with_bias, Rng rng, int group);
  Var forward(Binder& bind, Var x);
  void collect(std::vector<Parameter*>& out);
};

struct BatchNormLayer {
  Parameter gamma;
  Parameter beta;
  BatchNormState state;
  double eps = 1e-5;
  double momentum = 0.1;

  static BatchNormLayer make(const std::string& name, Index features, double gamma_init, int group);
  Var forward(Binder& bind, Var x, Mode mode);
  void collect(std::vector<Parameter*>& out);
};

}  // namespace dep
