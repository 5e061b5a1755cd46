#include "dep/tsne.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "dep/rng.hpp"

namespace dep {

namespace {

constexpr double kProbFloor = 1e-12;

// Flip eigenvector columns so the largest-magnitude entry is positive.
void fix_signs(Eigen::MatrixXd& V) {
  for (Eigen::Index c = 0; c < V.cols(); ++c) {
    Eigen::Index arg = 0;
    V.col(c).cwiseAbs().maxCoeff(&arg);
    if (V(arg, c) < 0) V.col(c) = -V.col(c);
  }
}

}  // namespace

MatrixRM pca_reduce(const Eigen::Ref<const MatrixRM>& X, int dims) {
  const Eigen::Index n = X.rows(), D = X.cols();
  if (n < 2) throw ParameterError("pca: need at least 2 samples");
  if (dims < 1 || dims > std::min<Eigen::Index>(n, D))
    throw ParameterError("pca: dims must be in [1, min(n, D)]");
  MatrixRM centered = X.rowwise() - X.colwise().mean();
  Eigen::MatrixXd V(D, dims);
  if (D <= n) {
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericError("pca: eigensolver failed");
    // eigenvalues ascend; take the top `dims`, largest first
    for (int k = 0; k < dims; ++k) V.col(k) = solver.eigenvectors().col(D - 1 - k);
  } else {
    const Eigen::MatrixXd gram = centered * centered.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw NumericError("pca: eigensolver failed");
    for (int k = 0; k < dims; ++k) {
      const double lambda = solver.eigenvalues()(n - 1 - k);
      if (lambda > 1e-12) {
        V.col(k) = centered.transpose() * solver.eigenvectors().col(n - 1 - k) /
                   std::sqrt(lambda * static_cast<double>(n - 1));
      } else {
        V.col(k).setZero();  // null direction of zero variance
      }
    }
  }
  fix_signs(V);
  return centered * V;
}

MatrixRM pairwise_sq_distances(const Eigen::Ref<const MatrixRM>& X) {
  const Eigen::Index n = X.rows();
  MatrixRM d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (X.row(i) - X.row(j)).squaredNorm();
      d2(i, j) = d;
      d2(j, i) = d;
    }
  }
  return d2;
}

MatrixRM calibrate_perplexity(const Eigen::Ref<const MatrixRM>& sq_distances, double perplexity) {
  const Eigen::Index n = sq_distances.rows();
  if (sq_distances.cols() != n) throw DimensionError("perplexity: distance matrix must be square");
  if (perplexity <= 1) throw ParameterError("perplexity: must be > 1");
  if (static_cast<double>(n) <= perplexity + 1)
    throw ParameterError("perplexity: need n > perplexity + 1, got n = " + std::to_string(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(sq_distances(i, i)) > 1e-12)
      throw ParameterError("perplexity: distance matrix must have zero diagonal");
  }
  const double target_entropy = std::log(perplexity);  // nats
  MatrixRM P = MatrixRM::Zero(n, n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 50; ++iter) {
      // stabilized conditional distribution over j != i
      double min_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) min_d = std::min(min_d, sq_distances(i, j));
      double z = 0, weighted = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
          row(j) = 0;
          continue;
        }
        row(j) = std::exp(-beta * (sq_distances(i, j) - min_d));
        z += row(j);
        weighted += row(j) * sq_distances(i, j);
      }
      row /= z;
      // H = ln z + beta * E[d] (with the min shift already cancelled)
      const double entropy = std::log(z) + beta * (weighted / z - min_d);
      const double achieved = std::exp(entropy);
      if (std::abs(achieved - perplexity) / perplexity < 1e-5) break;
      if (achieved > perplexity) {  // too flat: sharpen
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2 : (beta_lo + beta_hi) / 2;
      } else {
        beta_hi = beta;
        beta = (beta_lo + beta_hi) / 2;
      }
    }
    P.row(i) = row.transpose();
  }
  return P;
}

MatrixRM symmetrize_affinities(const MatrixRM& conditional) {
  const Eigen::Index n = conditional.rows();
  return (conditional + conditional.transpose()) / (2.0 * static_cast<double>(n));
}

double tsne_kl(const MatrixRM& P, const MatrixRM& Y) {
  const Eigen::Index n = P.rows();
  MatrixRM W(n, n);
  double z = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    W(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = 1.0 / (1.0 + (Y.row(i) - Y.row(j)).squaredNorm());
      W(i, j) = w;
      W(j, i) = w;
      z += 2 * w;
    }
  }
  double kl = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || P(i, j) <= 0) continue;
      const double q = std::max(W(i, j) / z, kProbFloor);
      kl += P(i, j) * std::log(std::max(P(i, j), kProbFloor) / q);
    }
  return kl;
}

MatrixRM tsne_gradient(const MatrixRM& P, const MatrixRM& Y) {
  const Eigen::Index n = P.rows();
  MatrixRM W(n, n);
  double z = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    W(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = 1.0 / (1.0 + (Y.row(i) - Y.row(j)).squaredNorm());
      W(i, j) = w;
      W(j, i) = w;
      z += 2 * w;
    }
  }
  MatrixRM grad = MatrixRM::Zero(n, Y.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = W(i, j) / z;
      const double mult = 4.0 * (P(i, j) - q) * W(i, j);
      grad.row(i) += mult * (Y.row(i) - Y.row(j));
    }
  return grad;
}

EmbeddedDistribution tsne_fit(const Eigen::Ref<const MatrixRM>& X, const TsneConfig& cfg,
                              std::vector<std::string> ids) {
  const Eigen::Index n = X.rows();
  if (n < 4) throw ParameterError("tsne: need at least 4 samples");
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != n)
    throw DataError("tsne: ids length does not match sample count");
  if (cfg.perplexity <= 1 || static_cast<double>(n) <= cfg.perplexity + 1)
    throw ParameterError("tsne: perplexity must satisfy 1 < perplexity < n - 1");

  MatrixRM reduced;
  if (cfg.pca_dims > 0 && cfg.pca_dims < X.cols() && cfg.pca_dims <= n)
    reduced = pca_reduce(X, cfg.pca_dims);
  else
    reduced = X;

  const MatrixRM P = symmetrize_affinities(
      calibrate_perplexity(pairwise_sq_distances(reduced), cfg.perplexity));

  Rng rng = Rng(cfg.seed).stream(0x75u);
  MatrixRM Y(n, cfg.output_dims);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < cfg.output_dims; ++d) Y(i, d) = rng.normal() * 1e-2;

  EmbeddedDistribution out;
  out.config = cfg;
  out.ids = std::move(ids);
  const double kl_initial = tsne_kl(P, Y);

  MatrixRM velocity = MatrixRM::Zero(n, cfg.output_dims);
  std::string trace;
  for (int it = 0; it < cfg.iters; ++it) {
    const bool exagg = it < cfg.exagg_iters;
    const MatrixRM grad = exagg ? tsne_gradient((cfg.exaggeration * P).eval(), Y) : tsne_gradient(P, Y);
    const double momentum = it < cfg.momentum_switch ? cfg.momentum_start : cfg.momentum_final;
    velocity = momentum * velocity - cfg.lr * grad;
    Y += velocity;
    Y.rowwise() -= Y.colwise().mean();  // objective is translation invariant
    if (it % 50 == 0 || it + 1 == cfg.iters) {
      const double kl = tsne_kl(P, Y);
      trace += "iter " + std::to_string(it) + ": KL " + std::to_string(kl) + "\n";
      if (!std::isfinite(kl))
        throw NumericError("tsne: diverged (non-finite KL) at iteration " + std::to_string(it) +
                           "\n" + trace);
    }
  }
  out.coords = Y;
  out.final_kl = tsne_kl(P, Y);
  if (out.final_kl > kl_initial)
    throw NumericError("tsne: optimization did not improve KL (" + std::to_string(out.final_kl) +
                       " > " + std::to_string(kl_initial) + ")");
  return out;
}

}  // namespace dep
