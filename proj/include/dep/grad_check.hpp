#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dep/ops.hpp"

namespace dep {

struct GradReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  Index worst_index = -1;
};

// Central finite differences against the tape's analytic gradient, every
// element of every listed tensor. `build` must return a scalar; relative
// error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) and the
// max over all elements is reported.
double grad_check(const std::function<Var(Graph&, const std::vector<Var>&)>& build,
                  const std::vector<Tensor*>& params, double step = 1e-6);

// Same check for model-style code that binds named Parameters through a
// Binder.
GradReport grad_check_params(const std::function<Var(Graph&, Binder&)>& build,
                             const std::vector<Parameter*>& params, double step = 1e-6);

}  // namespace dep
