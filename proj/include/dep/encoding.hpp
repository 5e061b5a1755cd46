#pragma once

#include <string>

#include "dep/ops.hpp"
#include "dep/rng.hpp"

namespace dep {

// Learnable dictionary for the texture encoding layer: n codewords of
// dimension d plus one unconstrained smoothing factor per codeword.
struct Codebook {
  Parameter codewords;  // [n, d]
  Parameter smoothing;  // [n]

  Index count() const { return codewords.value.dim(0); }
  Index dim() const { return codewords.value.dim(1); }

  static Codebook init(Index n, Index d, Rng rng, const std::string& prefix, int group);
};

struct SoftAssignment {
  Tensor weights;           // [m, n], rows sum to 1
  Tensor residual_sqnorms;  // [m, n]
};

// Soft-assignment weights: softmax over codewords of -s_j * |x_i - c_j|^2,
// stabilized by max subtraction.
Var assign_weights(Var descriptors, Var codewords, Var smoothing);

// Residual encoding: row j is sum_i w_ij (x_i - c_j), an [n, d] matrix.
Var encode(Var descriptors, Var codewords, Var smoothing);

// Per batch item: reshape [C,H,W] into H*W descriptors of dimension C,
// encode, flatten row-major to n*C, then L2-normalize the flattened vector.
Var encode_batch(Var features, Var codewords, Var smoothing, double l2_eps = 1e-12);

// Value-level entry points for tests and tooling (no gradients retained).
SoftAssignment assign(const Tensor& descriptors, const Codebook& cb);
Tensor encode_values(const Tensor& descriptors, const Codebook& cb);
Tensor encode_batch_values(const Tensor& features, const Codebook& cb);

}  // namespace dep
