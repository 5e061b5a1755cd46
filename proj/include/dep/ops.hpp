#pragma once

#include <vector>

#include "dep/graph.hpp"

namespace dep {

// Running statistics owned by a batchnorm layer. Updated in place during
// train-mode forward passes; read in eval mode.
struct BatchNormState {
  Tensor running_mean;  // [F]
  Tensor running_var;   // [F]
};

// Elementwise and arithmetic.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double c);
Var add_rowwise(Var x, Var bias);      // [R,C] + [C]
Var add_channelwise(Var x, Var bias);  // [B,C,H,W] + [C]

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

// Linear algebra and shape.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);
Var concat_rows(const std::vector<Var>& parts);
Var col_sums(Var m);             // [r,c] -> [c]
Var sum(Var x);                  // -> scalar
Var scale_rows(Var m, Var v);    // y_ij = m_ij * v_i
Var scale_cols(Var m, Var v);    // y_ij = m_ij * v_j
Var pairwise_sqdist(Var x, Var c);  // [m,d],[n,d] -> [m,n]

// Neural network layers.
Var relu(Var x);
Var softmax(Var x, int axis = 1);  // rank-2
Var conv2d(Var x, Var kernel, int stride, int pad);
Var maxpool2d(Var x, int kernel, int stride, int pad);
Var global_avg_pool(Var x);                    // [B,C,H,W] -> [B,C]
Var l2_normalize_rows(Var x, double eps = 1e-12);
Var outer_product(Var a, Var b);               // [B,I],[B,J] -> [B,I*J]
Var batchnorm(Var x, Var gamma, Var beta, BatchNormState* state, double eps, double momentum,
              Mode mode);

// Per-item view of a feature map as a descriptor set: [B,C,H,W] -> [H*W, C].
Var descriptors_of(Var features, Index batch_index);

// Losses (scalar outputs).
Var mse_loss(Var pred, Var target);
Var cross_entropy_loss(Var logits, const std::vector<int>& labels);

}  // namespace dep
