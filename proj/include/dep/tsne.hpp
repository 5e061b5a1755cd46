#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dep/tensor.hpp"

namespace dep {

struct TsneConfig {
  double perplexity = 30;
  int pca_dims = 50;
  int output_dims = 2;
  int iters = 1000;
  double exaggeration = 12;
  int exagg_iters = 250;
  double lr = 200;
  double momentum_start = 0.5;
  double momentum_final = 0.8;
  int momentum_switch = 250;
  std::uint64_t seed = 0;
};

struct EmbeddedDistribution {
  std::vector<std::string> ids;
  MatrixRM coords;  // n x 2
  TsneConfig config;
  double final_kl = 0;
};

// Mean-centered projection onto the top principal directions, descending
// eigenvalue order; per component the largest-magnitude loading is positive.
// Null directions beyond the data rank project to zero.
MatrixRM pca_reduce(const Eigen::Ref<const MatrixRM>& X, int dims);

MatrixRM pairwise_sq_distances(const Eigen::Ref<const MatrixRM>& X);

// Per-row Gaussian bandwidth calibration: binary search sigma_i until
// 2^H(P_i) matches the target perplexity (relative tolerance 1e-5, at most
// 50 iterations). Rows sum to 1 with zero diagonal.
MatrixRM calibrate_perplexity(const Eigen::Ref<const MatrixRM>& sq_distances, double perplexity);

// p_ij = (p_{j|i} + p_{i|j}) / (2n).
MatrixRM symmetrize_affinities(const MatrixRM& conditional);

double tsne_kl(const MatrixRM& P, const MatrixRM& Y);
MatrixRM tsne_gradient(const MatrixRM& P, const MatrixRM& Y);

EmbeddedDistribution tsne_fit(const Eigen::Ref<const MatrixRM>& X, const TsneConfig& cfg,
                              std::vector<std::string> ids);

}  // namespace dep
