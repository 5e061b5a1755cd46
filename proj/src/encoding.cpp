#include "dep/encoding.hpp"

#include <cmath>

namespace dep {

Codebook Codebook::init(Index n, Index d, Rng rng, const std::string& prefix, int group) {
  if (n < 1 || d < 1) throw ParameterError("codebook: need n >= 1 and d >= 1");
  Codebook cb;
  cb.codewords = Parameter{prefix + ".codewords", Tensor({n, d}), group};
  cb.smoothing = Parameter{prefix + ".smoothing", Tensor({n}), group};
  const double bound = 1.0 / std::sqrt(static_cast<double>(n));
  Rng cw = rng.stream(1);
  for (Index i = 0; i < cb.codewords.value.size(); ++i) cb.codewords.value[i] = cw.uniform(-bound, bound);
  Rng sm = rng.stream(2);
  for (Index j = 0; j < n; ++j) cb.smoothing.value[j] = sm.uniform();
  return cb;
}

namespace {

void check_dims(const Tensor& X, const Tensor& C, const Tensor& S) {
  if (X.rank() != 2 || C.rank() != 2)
    throw DimensionError("encoding: descriptors and codewords must be rank 2, got " +
                         shape_str(X.shape()) + " and " + shape_str(C.shape()));
  if (X.dim(1) != C.dim(1))
    throw DimensionError("encoding: descriptor dim " + shape_str(X.shape()) +
                         " does not match codeword dim " + shape_str(C.shape()));
  if (S.rank() != 1 || S.dim(0) != C.dim(0))
    throw DimensionError("encoding: smoothing must be [" + std::to_string(C.dim(0)) + "], got " +
                         shape_str(S.shape()));
}

}  // namespace

Var assign_weights(Var descriptors, Var codewords, Var smoothing) {
  check_dims(descriptors.value(), codewords.value(), smoothing.value());
  Var d2 = pairwise_sqdist(descriptors, codewords);
  return softmax(neg(scale_cols(d2, smoothing)), 1);
}

Var encode(Var descriptors, Var codewords, Var smoothing) {
  check_dims(descriptors.value(), codewords.value(), smoothing.value());
  Var w = assign_weights(descriptors, codewords, smoothing);
  // row j of E: sum_i w_ij x_i - (sum_i w_ij) c_j
  return sub(matmul(transpose(w), descriptors), scale_rows(codewords, col_sums(w)));
}

Var encode_batch(Var features, Var codewords, Var smoothing, double l2_eps) {
  const Tensor& F = features.value();
  if (F.rank() != 4)
    throw DimensionError("encode_batch: expected [B,C,H,W] features, got " + shape_str(F.shape()));
  if (F.dim(1) != codewords.value().dim(1))
    throw DimensionError("encode_batch: feature channels " + shape_str(F.shape()) +
                         " do not match codeword dim " + shape_str(codewords.value().shape()));
  const Index B = F.dim(0);
  const Index n = codewords.value().dim(0);
  const Index d = codewords.value().dim(1);
  std::vector<Var> rows;
  rows.reserve(static_cast<std::size_t>(B));
  for (Index b = 0; b < B; ++b) {
    Var x = descriptors_of(features, b);
    Var e = encode(x, codewords, smoothing);
    rows.push_back(reshape(e, {1, n * d}));
  }
  return l2_normalize_rows(concat_rows(rows), l2_eps);
}

SoftAssignment assign(const Tensor& descriptors, const Codebook& cb) {
  Graph g;
  Var x = g.leaf(descriptors);
  Var c = g.leaf(cb.codewords.value);
  Var s = g.leaf(cb.smoothing.value);
  Var d2 = pairwise_sqdist(x, c);
  Var w = softmax(neg(scale_cols(d2, s)), 1);
  return SoftAssignment{w.value(), d2.value()};
}

Tensor encode_values(const Tensor& descriptors, const Codebook& cb) {
  Graph g;
  Var x = g.leaf(descriptors);
  Var c = g.leaf(cb.codewords.value);
  Var s = g.leaf(cb.smoothing.value);
  return encode(x, c, s).value();
}

Tensor encode_batch_values(const Tensor& features, const Codebook& cb) {
  Graph g;
  Var f = g.leaf(features);
  Var c = g.leaf(cb.codewords.value);
  Var s = g.leaf(cb.smoothing.value);
  return encode_batch(f, c, s).value();
}

}  // namespace dep
