#include "dep/grad_check.hpp"

#include <cmath>

namespace dep {

double grad_check(const std::function<Var(Graph&, const std::vector<Var>&)>& build,
                  const std::vector<Tensor*>& params, double step) {
  if (step <= 0) throw ParameterError("grad_check: step must be > 0");
  std::vector<Tensor> analytic;
  {
    Graph g;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (Tensor* p : params) vars.push_back(g.leaf(*p, true));
    Var loss = build(g, vars);
    if (loss.value().size() != 1) throw ContractError("grad_check: objective must be a scalar");
    g.backward(loss);
    for (Var v : vars) {
      const Graph::Node& n = g.node(v.id);
      analytic.push_back(n.grad.size() ? n.grad : Tensor::zeros(n.value.shape()));
    }
  }
  auto eval = [&]() {
    Graph g;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (Tensor* p : params) vars.push_back(g.leaf(*p, false));
    Var loss = build(g, vars);
    if (loss.value().size() != 1) throw ContractError("grad_check: objective must be a scalar");
    return loss.value()[0];
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    for (Index e = 0; e < p.size(); ++e) {
      const double save = p[e];
      p[e] = save + step;
      const double fp = eval();
      p[e] = save - step;
      const double fm = eval();
      p[e] = save;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic[i][e];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

GradReport grad_check_params(const std::function<Var(Graph&, Binder&)>& build,
                             const std::vector<Parameter*>& params, double step) {
  if (step <= 0) throw ParameterError("grad_check: step must be > 0");
  std::vector<Tensor> analytic;
  {
    Graph g;
    Binder bind(g);
    Var loss = build(g, bind);
    if (loss.value().size() != 1) throw ContractError("grad_check: objective must be a scalar");
    g.backward(loss);
    for (Parameter* p : params) {
      Tensor grad = Tensor::zeros(p->value.shape());
      for (const auto& [q, v] : bind.bound())
        if (q == p) {
          const Graph::Node& n = g.node(v.id);
          if (n.grad.size()) grad = n.grad;
        }
      analytic.push_back(std::move(grad));
    }
  }
  auto eval = [&]() {
    Graph g;
    Binder bind(g);
    Var loss = build(g, bind);
    return loss.value()[0];
  };
  GradReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i]->value;
    for (Index e = 0; e < p.size(); ++e) {
      const double save = p[e];
      p[e] = save + step;
      const double fp = eval();
      p[e] = save - step;
      const double fm = eval();
      p[e] = save;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic[i][e];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = params[i]->name;
        report.worst_index = e;
      }
    }
  }
  return report;
}

}  // namespace dep
