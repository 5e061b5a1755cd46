#include "dep/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dep {

namespace {

Graph& same_graph(Var a, Var b) {
  if (a.graph == nullptr || a.graph != b.graph) throw ContractError("ops: operands belong to different graphs");
  return *a.graph;
}

void require_rank(const Tensor& t, Index r, const char* op) {
  if (t.rank() != r)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(r) + " tensor, got " +
                         shape_str(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(op) + ": shape mismatch: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

// Gather one batch item's conv patches: cols is [C*kh*kw, OH*OW], column-major
// so each output position is a contiguous column.
void im2col(const Tensor& x, Index b, Index kh, Index kw, int stride, int pad, Index oh_count,
            Index ow_count, Eigen::MatrixXd& cols) {
  const Index C = x.dim(1), H = x.dim(2), W = x.dim(3);
  cols.setZero();
  for (Index oh = 0; oh < oh_count; ++oh) {
    for (Index ow = 0; ow < ow_count; ++ow) {
      const Index col = oh * ow_count + ow;
      double* dst = cols.data() + col * cols.rows();
      for (Index c = 0; c < C; ++c) {
        for (Index i = 0; i < kh; ++i) {
          const Index y = oh * stride - pad + i;
          if (y < 0 || y >= H) {
            dst += kw;
            continue;
          }
          const double* src = x.data() + ((b * C + c) * H + y) * W;
          for (Index j = 0; j < kw; ++j) {
            const Index xx = ow * stride - pad + j;
            *dst++ = (xx >= 0 && xx < W) ? src[xx] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(Tensor& dx, Index b, Index kh, Index kw, int stride, int pad, Index oh_count,
                Index ow_count, const Eigen::MatrixXd& dcols) {
  const Index C = dx.dim(1), H = dx.dim(2), W = dx.dim(3);
  for (Index oh = 0; oh < oh_count; ++oh) {
    for (Index ow = 0; ow < ow_count; ++ow) {
      const Index col = oh * ow_count + ow;
      const double* src = dcols.data() + col * dcols.rows();
      for (Index c = 0; c < C; ++c) {
        for (Index i = 0; i < kh; ++i) {
          const Index y = oh * stride - pad + i;
          if (y < 0 || y >= H) {
            src += kw;
            continue;
          }
          double* dst = dx.data() + ((b * C + c) * H + y) * W;
          for (Index j = 0; j < kw; ++j) {
            const Index xx = ow * stride - pad + j;
            if (xx >= 0 && xx < W) dst[xx] += src[j];
          }
          src += kw;
        }
      }
    }
  }
}

}  // namespace

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Tensor& A = a.value();
  require_same_shape(A, b.value(), "add");
  Tensor out = A;
  out.vec() += b.value().vec();
  return g.make("add", {a.id, b.id}, std::move(out), [ia = a.id, ib = b.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(ia)) g.grad_acc(ia).vec() += n.grad.vec();
    if (g.wants_grad(ib)) g.grad_acc(ib).vec() += n.grad.vec();
  });
}

Var sub(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Tensor& A = a.value();
  require_same_shape(A, b.value(), "sub");
  Tensor out = A;
  out.vec() -= b.value().vec();
  return g.make("sub", {a.id, b.id}, std::move(out), [ia = a.id, ib = b.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(ia)) g.grad_acc(ia).vec() += n.grad.vec();
    if (g.wants_grad(ib)) g.grad_acc(ib).vec() -= n.grad.vec();
  });
}

Var mul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Tensor& A = a.value();
  require_same_shape(A, b.value(), "mul");
  Tensor out = A;
  out.vec().array() *= b.value().vec().array();
  return g.make("mul", {a.id, b.id}, std::move(out), [ia = a.id, ib = b.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(ia)) g.grad_acc(ia).vec().array() += n.grad.vec().array() * g.value(ib).vec().array();
    if (g.wants_grad(ib)) g.grad_acc(ib).vec().array() += n.grad.vec().array() * g.value(ia).vec().array();
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double c) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  out.vec() *= c;
  return g.make("scale", {a.id}, std::move(out), [ia = a.id, c](Graph& g, Graph::Node& n) {
    if (g.wants_grad(ia)) g.grad_acc(ia).vec() += c * n.grad.vec();
  });
}

Var add_rowwise(Var x, Var bias) {
  Graph& g = same_graph(x, bias);
  const Tensor& X = x.value();
  const Tensor& B = bias.value();
  require_rank(X, 2, "add_rowwise");
  require_rank(B, 1, "add_rowwise");
  if (X.dim(1) != B.dim(0))
    throw DimensionError("add_rowwise: " + shape_str(X.shape()) + " vs bias " + shape_str(B.shape()));
  Tensor out = X;
  out.mat().rowwise() += B.vec().transpose();
  return g.make("add_rowwise", {x.id, bias.id}, std::move(out),
                [ix = x.id, ib = bias.id](Graph& g, Graph::Node& n) {
                  if (g.wants_grad(ix)) g.grad_acc(ix).vec() += n.grad.vec();
                  if (g.wants_grad(ib)) g.grad_acc(ib).vec() += n.grad.mat().colwise().sum().transpose();
                });
}

Var add_channelwise(Var x, Var bias) {
  Graph& g = same_graph(x, bias);
  const Tensor& X = x.value();
  const Tensor& B = bias.value();
  require_rank(X, 4, "add_channelwise");
  require_rank(B, 1, "add_channelwise");
  if (X.dim(1) != B.dim(0))
    throw DimensionError("add_channelwise: " + shape_str(X.shape()) + " vs bias " + shape_str(B.shape()));
  Tensor out = X;
  const Index Bn = X.dim(0), C = X.dim(1), HW = X.dim(2) * X.dim(3);
  for (Index b = 0; b < Bn; ++b)
    for (Index c = 0; c < C; ++c) {
      double* p = out.data() + (b * C + c) * HW;
      for (Index i = 0; i < HW; ++i) p[i] += B[c];
    }
  return g.make("add_channelwise", {x.id, bias.id}, std::move(out),
                [ix = x.id, ib = bias.id, Bn, C, HW](Graph& g, Graph::Node& n) {
                  if (g.wants_grad(ix)) g.grad_acc(ix).vec() += n.grad.vec();
                  if (g.wants_grad(ib)) {
                    Tensor& db = g.grad_acc(ib);
                    for (Index b = 0; b < Bn; ++b)
                      for (Index c = 0; c < C; ++c) {
                        const double* p = n.grad.data() + (b * C + c) * HW;
                        double s = 0;
                        for (Index i = 0; i < HW; ++i) s += p[i];
                        db[c] += s;
                      }
                  }
                });
}

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_rank(A, 2, "matmul");
  require_rank(B, 2, "matmul");
  if (A.dim(1) != B.dim(0))
    throw DimensionError("matmul: inner dimensions disagree: " + shape_str(A.shape()) + " vs " +
                         shape_str(B.shape()));
  Tensor out({A.dim(0), B.dim(1)});
  out.mat().noalias() = A.mat() * B.mat();
  return g.make("matmul", {a.id, b.id}, std::move(out), [ia = a.id, ib = b.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(ia)) g.grad_acc(ia).mat().noalias() += n.grad.mat() * g.value(ib).mat().transpose();
    if (g.wants_grad(ib)) g.grad_acc(ib).mat().noalias() += g.value(ia).mat().transpose() * n.grad.mat();
  });
}

Var transpose(Var a) {
  Graph& g = *a.graph;
  const Tensor& A = a.value();
  require_rank(A, 2, "transpose");
  Tensor out({A.dim(1), A.dim(0)});
  out.mat().noalias() = A.mat().transpose();
  return g.make("transpose", {a.id}, std::move(out), [ia = a.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(ia)) g.grad_acc(ia).mat().noalias() += n.grad.mat().transpose();
  });
}

Var reshape(Var a, Shape shape) {
  Graph& g = *a.graph;
  Tensor out = a.value().reshaped(shape);
  return g.make("reshape", {a.id}, std::move(out), [ia = a.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(ia)) g.grad_acc(ia).vec() += n.grad.vec();
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ParameterError("concat_rows: no inputs");
  Graph& g = *parts[0].graph;
  const Index cols = parts[0].value().dim(1);
  Index rows = 0;
  std::vector<NodeId> ids;
  for (Var p : parts) {
    same_graph(parts[0], p);
    require_rank(p.value(), 2, "concat_rows");
    if (p.value().dim(1) != cols)
      throw DimensionError("concat_rows: column mismatch: " + shape_str(p.value().shape()));
    rows += p.value().dim(0);
    ids.push_back(p.id);
  }
  Tensor out({rows, cols});
  Index r = 0;
  for (Var p : parts) {
    const Tensor& t = p.value();
    std::copy(t.data(), t.data() + t.size(), out.data() + r * cols);
    r += t.dim(0);
  }
  return g.make("concat_rows", std::move(ids), std::move(out), [cols](Graph& g, Graph::Node& n) {
    Index r = 0;
    for (NodeId id : n.inputs) {
      const Index pr = g.value(id).dim(0);
      if (g.wants_grad(id))
        g.grad_acc(id).vec() += ConstMapVec(n.grad.data() + r * cols, pr * cols);
      r += pr;
    }
  });
}

Var col_sums(Var m) {
  Graph& g = *m.graph;
  const Tensor& M = m.value();
  require_rank(M, 2, "col_sums");
  Tensor out({M.dim(1)});
  out.vec() = M.mat().colwise().sum().transpose();
  return g.make("col_sums", {m.id}, std::move(out), [im = m.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(im)) g.grad_acc(im).mat().rowwise() += n.grad.vec().transpose();
  });
}

Var sum(Var x) {
  Graph& g = *x.graph;
  Tensor out = Tensor::scalar(x.value().vec().sum());
  return g.make("sum", {x.id}, std::move(out), [ix = x.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(ix)) g.grad_acc(ix).vec().array() += n.grad[0];
  });
}

Var scale_rows(Var m, Var v) {
  Graph& g = same_graph(m, v);
  const Tensor& M = m.value();
  const Tensor& V = v.value();
  require_rank(M, 2, "scale_rows");
  require_rank(V, 1, "scale_rows");
  if (M.dim(0) != V.dim(0))
    throw DimensionError("scale_rows: " + shape_str(M.shape()) + " vs " + shape_str(V.shape()));
  Tensor out = M;
  out.mat().array().colwise() *= V.vec().array();
  return g.make("scale_rows", {m.id, v.id}, std::move(out), [im = m.id, iv = v.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(im))
      g.grad_acc(im).mat().array() += n.grad.mat().array().colwise() * g.value(iv).vec().array();
    if (g.wants_grad(iv))
      g.grad_acc(iv).vec().array() +=
          (n.grad.mat().array() * g.value(im).mat().array()).rowwise().sum();
  });
}

Var scale_cols(Var m, Var v) {
  Graph& g = same_graph(m, v);
  const Tensor& M = m.value();
  const Tensor& V = v.value();
  require_rank(M, 2, "scale_cols");
  require_rank(V, 1, "scale_cols");
  if (M.dim(1) != V.dim(0))
    throw DimensionError("scale_cols: " + shape_str(M.shape()) + " vs " + shape_str(V.shape()));
  Tensor out = M;
  out.mat().array().rowwise() *= V.vec().transpose().array();
  return g.make("scale_cols", {m.id, v.id}, std::move(out), [im = m.id, iv = v.id](Graph& g, Graph::Node& n) {
    if (g.wants_grad(im))
      g.grad_acc(im).mat().array() += n.grad.mat().array().rowwise() * g.value(iv).vec().transpose().array();
    if (g.wants_grad(iv))
      g.grad_acc(iv).vec().array() +=
          (n.grad.mat().array() * g.value(im).mat().array()).colwise().sum().transpose();
  });
}

Var pairwise_sqdist(Var x, Var c) {
  Graph& g = same_graph(x, c);
  const Tensor& X = x.value();
  const Tensor& C = c.value();
  require_rank(X, 2, "pairwise_sqdist");
  require_rank(C, 2, "pairwise_sqdist");
  if (X.dim(1) != C.dim(1))
    throw DimensionError("pairwise_sqdist: descriptor dim " + shape_str(X.shape()) +
                         " vs codeword dim " + shape_str(C.shape()));
  const Index m = X.dim(0), n = C.dim(0);
  Tensor out({m, n});
  auto Xm = X.mat();
  auto Cm = C.mat();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) out.at(i, j) = (Xm.row(i) - Cm.row(j)).squaredNorm();
  return g.make("pairwise_sqdist", {x.id, c.id}, std::move(out),
                [ix = x.id, ic = c.id, m, n](Graph& g, Graph::Node& n_) {
                  auto Xm = g.value(ix).mat();
                  auto Cm = g.value(ic).mat();
                  const bool wx = g.wants_grad(ix), wc = g.wants_grad(ic);
                  for (Index i = 0; i < m; ++i)
                    for (Index j = 0; j < n; ++j) {
                      const double w = 2.0 * n_.grad.at(i, j);
                      if (w == 0.0) continue;
                      auto diff = (Xm.row(i) - Cm.row(j)).eval();
                      if (wx) g.grad_acc(ix).mat().row(i) += w * diff;
                      if (wc) g.grad_acc(ic).mat().row(j) -= w * diff;
                    }
                });
}

Var relu(Var x) {
  Graph& g = *x.graph;
  Tensor out = x.value();
  for (Index i = 0; i < out.size(); ++i) out[i] = out[i] > 0 ? out[i] : 0.0;
  return g.make("relu", {x.id}, std::move(out), [ix = x.id](Graph& g, Graph::Node& n) {
    if (!g.wants_grad(ix)) return;
    const Tensor& X = g.value(ix);
    Tensor& dx = g.grad_acc(ix);
    for (Index i = 0; i < X.size(); ++i)
      if (X[i] > 0) dx[i] += n.grad[i];
  });
}

static Var softmax_rows(Var x) {
  Graph& g = *x.graph;
  const Tensor& X = x.value();
  require_rank(X, 2, "softmax");
  const Index R = X.dim(0), C = X.dim(1);
  Tensor out({R, C});
  for (Index r = 0; r < R; ++r) {
    const double* src = X.data() + r * C;
    double* dst = out.data() + r * C;
    double m = src[0];
    for (Index j = 1; j < C; ++j) m = std::max(m, src[j]);
    double s = 0;
    for (Index j = 0; j < C; ++j) {
      dst[j] = std::exp(src[j] - m);
      s += dst[j];
    }
    for (Index j = 0; j < C; ++j) dst[j] /= s;
  }
  return g.make("softmax", {x.id}, std::move(out), [ix = x.id, R, C](Graph& g, Graph::Node& n) {
    if (!g.wants_grad(ix)) return;
    Tensor& dx = g.grad_acc(ix);
    for (Index r = 0; r < R; ++r) {
      const double* y = n.value.data() + r * C;
      const double* gy = n.grad.data() + r * C;
      double dot = 0;
      for (Index j = 0; j < C; ++j) dot += gy[j] * y[j];
      double* d = dx.data() + r * C;
      for (Index j = 0; j < C; ++j) d[j] += y[j] * (gy[j] - dot);
    }
  });
}

Var softmax(Var x, int axis) {
  if (axis == 1) return softmax_rows(x);
  if (axis == 0) return transpose(softmax_rows(transpose(x)));
  throw ParameterError("softmax: axis must be 0 or 1");
}

Var conv2d(Var x, Var kernel, int stride, int pad) {
  Graph& g = same_graph(x, kernel);
  const Tensor& X = x.value();
  const Tensor& K = kernel.value();
  require_rank(X, 4, "conv2d");
  require_rank(K, 4, "conv2d");
  if (stride < 1) throw ParameterError("conv2d: stride must be >= 1");
  if (pad < 0) throw ParameterError("conv2d: pad must be >= 0");
  if (X.dim(1) != K.dim(1))
    throw DimensionError("conv2d: input channels " + shape_str(X.shape()) + " vs kernel " +
                         shape_str(K.shape()));
  const Index B = X.dim(0), C = X.dim(1), H = X.dim(2), W = X.dim(3);
  const Index Ko = K.dim(0), kh = K.dim(2), kw = K.dim(3);
  if (kh > H + 2 * pad || kw > W + 2 * pad)
    throw DimensionError("conv2d: kernel " + shape_str(K.shape()) + " larger than padded input " +
                         shape_str(X.shape()));
  const Index OH = (H + 2 * pad - kh) / stride + 1;
  const Index OW = (W + 2 * pad - kw) / stride + 1;
  if (OH < 1 || OW < 1)
    throw DimensionError("conv2d: non-positive output dims for input " + shape_str(X.shape()));
  Tensor out({B, Ko, OH, OW});
  const Index ckk = C * kh * kw;
  {
    Eigen::MatrixXd cols(ckk, OH * OW);
    ConstMapMat M(K.data(), Ko, ckk);
    for (Index b = 0; b < B; ++b) {
      im2col(X, b, kh, kw, stride, pad, OH, OW, cols);
      MapMat Ob(out.data() + b * Ko * OH * OW, Ko, OH * OW);
      Ob.noalias() = M * cols;
    }
  }
  return g.make("conv2d", {x.id, kernel.id}, std::move(out),
                [ix = x.id, ik = kernel.id, stride, pad, B, C, H, W, Ko, kh, kw, OH, OW,
                 ckk](Graph& g, Graph::Node& n) {
                  const Tensor& X = g.value(ix);
                  const Tensor& K = g.value(ik);
                  const bool wx = g.wants_grad(ix), wk = g.wants_grad(ik);
                  if (!wx && !wk) return;
                  Eigen::MatrixXd cols(ckk, OH * OW);
                  Eigen::MatrixXd dcols(ckk, OH * OW);
                  ConstMapMat M(K.data(), Ko, ckk);
                  for (Index b = 0; b < B; ++b) {
                    ConstMapMat Gb(n.grad.data() + b * Ko * OH * OW, Ko, OH * OW);
                    if (wk) {
                      im2col(X, b, kh, kw, stride, pad, OH, OW, cols);
                      MapMat dK(g.grad_acc(ik).data(), Ko, ckk);
                      dK.noalias() += Gb * cols.transpose();
                    }
                    if (wx) {
                      dcols.noalias() = M.transpose() * Gb;
                      col2im_add(g.grad_acc(ix), b, kh, kw, stride, pad, OH, OW, dcols);
                    }
                  }
                });
}

Var maxpool2d(Var x, int kernel, int stride, int pad) {
  Graph& g = *x.graph;
  const Tensor& X = x.value();
  require_rank(X, 4, "maxpool2d");
  if (kernel < 1 || stride < 1 || pad < 0) throw ParameterError("maxpool2d: bad kernel/stride/pad");
  const Index B = X.dim(0), C = X.dim(1), H = X.dim(2), W = X.dim(3);
  const Index OH = (H + 2 * pad - kernel) / stride + 1;
  const Index OW = (W + 2 * pad - kernel) / stride + 1;
  if (OH < 1 || OW < 1)
    throw DimensionError("maxpool2d: non-positive output dims for input " + shape_str(X.shape()));
  Tensor out({B, C, OH, OW});
  std::vector<Index> argmax(static_cast<std::size_t>(B * C * OH * OW));
  Index o = 0;
  for (Index b = 0; b < B; ++b)
    for (Index c = 0; c < C; ++c)
      for (Index oh = 0; oh < OH; ++oh)
        for (Index ow = 0; ow < OW; ++ow, ++o) {
          double best = -std::numeric_limits<double>::infinity();
          Index arg = -1;
          for (Index i = 0; i < kernel; ++i) {
            const Index y = oh * stride - pad + i;
            if (y < 0 || y >= H) continue;
            for (Index j = 0; j < kernel; ++j) {
              const Index xx = ow * stride - pad + j;
              if (xx < 0 || xx >= W) continue;
              const Index idx = ((b * C + c) * H + y) * W + xx;
              if (X[idx] > best) {
                best = X[idx];
                arg = idx;
              }
            }
          }
          out[o] = best;
          argmax[static_cast<std::size_t>(o)] = arg;
        }
  return g.make("maxpool2d", {x.id}, std::move(out),
                [ix = x.id, argmax = std::move(argmax)](Graph& g, Graph::Node& n) {
                  if (!g.wants_grad(ix)) return;
                  Tensor& dx = g.grad_acc(ix);
                  for (Index o = 0; o < n.grad.size(); ++o) dx[argmax[static_cast<std::size_t>(o)]] += n.grad[o];
                });
}

Var global_avg_pool(Var x) {
  Graph& g = *x.graph;
  const Tensor& X = x.value();
  require_rank(X, 4, "global_avg_pool");
  const Index B = X.dim(0), C = X.dim(1), HW = X.dim(2) * X.dim(3);
  Tensor out({B, C});
  for (Index b = 0; b < B; ++b)
    for (Index c = 0; c < C; ++c) {
      const double* p = X.data() + (b * C + c) * HW;
      double s = 0;
      for (Index i = 0; i < HW; ++i) s += p[i];
      out.at(b, c) = s / static_cast<double>(HW);
    }
  return g.make("global_avg_pool", {x.id}, std::move(out), [ix = x.id, B, C, HW](Graph& g, Graph::Node& n) {
    if (!g.wants_grad(ix)) return;
    Tensor& dx = g.grad_acc(ix);
    const double inv = 1.0 / static_cast<double>(HW);
    for (Index b = 0; b < B; ++b)
      for (Index c = 0; c < C; ++c) {
        const double gv = n.grad.at(b, c) * inv;
        double* p = dx.data() + (b * C + c) * HW;
        for (Index i = 0; i < HW; ++i) p[i] += gv;
      }
  });
}

Var l2_normalize_rows(Var x, double eps) {
  Graph& g = *x.graph;
  if (eps <= 0) throw ParameterError("l2_normalize: eps must be > 0");
  const Tensor& X = x.value();
  require_rank(X, 2, "l2_normalize");
  const Index R = X.dim(0), C = X.dim(1);
  Tensor out = X;
  Tensor radius({R});
  Tensor clamped({R});
  for (Index r = 0; r < R; ++r) {
    const double norm = ConstMapVec(X.data() + r * C, C).norm();
    const bool clamp = norm < eps;
    const double rad = clamp ? eps : norm;
    radius[r] = rad;
    clamped[r] = clamp ? 1.0 : 0.0;
    MapVec(out.data() + r * C, C) /= rad;
  }
  return g.make("l2_normalize", {x.id}, std::move(out),
                [ix = x.id, R, C, radius = std::move(radius), clamped = std::move(clamped)](
                    Graph& g, Graph::Node& n) {
                  if (!g.wants_grad(ix)) return;
                  Tensor& dx = g.grad_acc(ix);
                  for (Index r = 0; r < R; ++r) {
                    ConstMapVec gy(n.grad.data() + r * C, C);
                    ConstMapVec y(n.value.data() + r * C, C);
                    MapVec d(dx.data() + r * C, C);
                    if (clamped[r] > 0.5) {
                      d += gy / radius[r];
                    } else {
                      d += (gy - y * gy.dot(y)) / radius[r];
                    }
                  }
                });
}

Var outer_product(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_rank(A, 2, "outer_product");
  require_rank(B, 2, "outer_product");
  if (A.dim(0) != B.dim(0))
    throw DimensionError("outer_product: batch mismatch: " + shape_str(A.shape()) + " vs " +
                         shape_str(B.shape()));
  const Index Bn = A.dim(0), I = A.dim(1), J = B.dim(1);
  Tensor out({Bn, I * J});
  for (Index n = 0; n < Bn; ++n) {
    const double* av = A.data() + n * I;
    const double* bv = B.data() + n * J;
    double* o = out.data() + n * I * J;
    for (Index i = 0; i < I; ++i)
      for (Index j = 0; j < J; ++j) o[i * J + j] = av[i] * bv[j];
  }
  return g.make("outer_product", {a.id, b.id}, std::move(out),
                [ia = a.id, ib = b.id, Bn, I, J](Graph& g, Graph::Node& n_) {
                  const Tensor& A = g.value(ia);
                  const Tensor& B = g.value(ib);
                  const bool wa = g.wants_grad(ia), wb = g.wants_grad(ib);
                  for (Index n = 0; n < Bn; ++n) {
                    const double* gy = n_.grad.data() + n * I * J;
                    const double* av = A.data() + n * I;
                    const double* bv = B.data() + n * J;
                    if (wa) {
                      double* da = g.grad_acc(ia).data() + n * I;
                      for (Index i = 0; i < I; ++i) {
                        double s = 0;
                        for (Index j = 0; j < J; ++j) s += gy[i * J + j] * bv[j];
                        da[i] += s;
                      }
                    }
                    if (wb) {
                      double* db = g.grad_acc(ib).data() + n * J;
                      for (Index j = 0; j < J; ++j) {
                        double s = 0;
                        for (Index i = 0; i < I; ++i) s += gy[i * J + j] * av[i];
                        db[j] += s;
                      }
                    }
                  }
                });
}

namespace {

// Feature index layout shared by the two batchnorm arrangements:
// rank 2 -> feature = column, rank 4 -> feature = channel.
struct BnLayout {
  Index features;
  Index reduce;  // elements per feature
  // iterate feature f of element (outer, inner)
};

}  // namespace

Var batchnorm(Var x, Var gamma, Var beta, BatchNormState* state, double eps, double momentum,
              Mode mode) {
  Graph& g = same_graph(x, gamma);
  same_graph(x, beta);
  if (eps <= 0) throw ParameterError("batchnorm: eps must be > 0");
  const Tensor& X = x.value();
  const Tensor& G = gamma.value();
  const Tensor& Bt = beta.value();
  if (X.rank() != 2 && X.rank() != 4)
    throw DimensionError("batchnorm: expected rank 2 or 4 input, got " + shape_str(X.shape()));
  const Index F = X.dim(1);
  if (G.rank() != 1 || G.dim(0) != F || Bt.rank() != 1 || Bt.dim(0) != F)
    throw DimensionError("batchnorm: gamma/beta must be [" + std::to_string(F) + "], got " +
                         shape_str(G.shape()) + " and " + shape_str(Bt.shape()));
  const bool spatial = X.rank() == 4;
  const Index B = X.dim(0);
  const Index HW = spatial ? X.dim(2) * X.dim(3) : 1;
  const Index N = B * HW;

  Tensor mean({F});
  Tensor var({F});
  if (mode == Mode::Train) {
    for (Index f = 0; f < F; ++f) {
      double s = 0;
      for (Index b = 0; b < B; ++b) {
        const double* p = X.data() + (b * F + f) * HW;
        for (Index i = 0; i < HW; ++i) s += p[i];
      }
      mean[f] = s / static_cast<double>(N);
      double v = 0;
      for (Index b = 0; b < B; ++b) {
        const double* p = X.data() + (b * F + f) * HW;
        for (Index i = 0; i < HW; ++i) {
          const double d = p[i] - mean[f];
          v += d * d;
        }
      }
      var[f] = v / static_cast<double>(N);
    }
    if (state != nullptr) {
      if (state->running_mean.size() != F) {
        state->running_mean = Tensor::zeros({F});
        state->running_var = Tensor::ones({F});
      }
      const double unbias = N > 1 ? static_cast<double>(N) / static_cast<double>(N - 1) : 1.0;
      for (Index f = 0; f < F; ++f) {
        state->running_mean[f] = (1 - momentum) * state->running_mean[f] + momentum * mean[f];
        state->running_var[f] = (1 - momentum) * state->running_var[f] + momentum * var[f] * unbias;
      }
    }
  } else {
    if (state == nullptr || state->running_mean.size() != F)
      throw ParameterError("batchnorm: eval mode requires running statistics");
    mean = state->running_mean;
    var = state->running_var;
  }

  Tensor inv({F});
  for (Index f = 0; f < F; ++f) inv[f] = 1.0 / std::sqrt(var[f] + eps);

  Tensor out(X.shape());
  for (Index b = 0; b < B; ++b)
    for (Index f = 0; f < F; ++f) {
      const double* p = X.data() + (b * F + f) * HW;
      double* q = out.data() + (b * F + f) * HW;
      const double m = mean[f], iv = inv[f], ga = G[f], be = Bt[f];
      for (Index i = 0; i < HW; ++i) q[i] = (p[i] - m) * iv * ga + be;
    }

  const bool train = mode == Mode::Train;
  return g.make(
      "batchnorm", {x.id, gamma.id, beta.id}, std::move(out),
      [ix = x.id, ig = gamma.id, ib = beta.id, mean = std::move(mean), inv = std::move(inv), B, F, HW,
       N, train](Graph& g, Graph::Node& n) {
        const Tensor& X = g.value(ix);
        const Tensor& G = g.value(ig);
        const bool wx = g.wants_grad(ix), wg = g.wants_grad(ig), wb = g.wants_grad(ib);
        if (!wx && !wg && !wb) return;
        // per-feature reductions of gy and gy*xhat
        Tensor s1({F});
        Tensor s2({F});
        for (Index b = 0; b < B; ++b)
          for (Index f = 0; f < F; ++f) {
            const double* gy = n.grad.data() + (b * F + f) * HW;
            const double* xp = X.data() + (b * F + f) * HW;
            const double m = mean[f], iv = inv[f];
            double a1 = 0, a2 = 0;
            for (Index i = 0; i < HW; ++i) {
              a1 += gy[i];
              a2 += gy[i] * (xp[i] - m) * iv;
            }
            s1[f] += a1;
            s2[f] += a2;
          }
        if (wg) g.grad_acc(ig).vec() += s2.vec();
        if (wb) g.grad_acc(ib).vec() += s1.vec();
        if (wx) {
          Tensor& dx = g.grad_acc(ix);
          const double invN = 1.0 / static_cast<double>(N);
          for (Index b = 0; b < B; ++b)
            for (Index f = 0; f < F; ++f) {
              const double* gy = n.grad.data() + (b * F + f) * HW;
              const double* xp = X.data() + (b * F + f) * HW;
              double* d = dx.data() + (b * F + f) * HW;
              const double m = mean[f], iv = inv[f], ga = G[f];
              if (train) {
                for (Index i = 0; i < HW; ++i) {
                  const double xh = (xp[i] - m) * iv;
                  d[i] += ga * iv * (gy[i] - s1[f] * invN - xh * s2[f] * invN);
                }
              } else {
                for (Index i = 0; i < HW; ++i) d[i] += ga * iv * gy[i];
              }
            }
        }
      });
}

Var descriptors_of(Var features, Index batch_index) {
  Graph& g = *features.graph;
  const Tensor& F = features.value();
  require_rank(F, 4, "descriptors_of");
  if (batch_index < 0 || batch_index >= F.dim(0))
    throw DimensionError("descriptors_of: batch index " + std::to_string(batch_index) +
                         " out of range for " + shape_str(F.shape()));
  const Index C = F.dim(1), HW = F.dim(2) * F.dim(3);
  Tensor out({HW, C});
  for (Index c = 0; c < C; ++c) {
    const double* p = F.data() + (batch_index * C + c) * HW;
    for (Index i = 0; i < HW; ++i) out.at(i, c) = p[i];
  }
  return g.make("descriptors_of", {features.id}, std::move(out),
                [ifm = features.id, batch_index, C, HW](Graph& g, Graph::Node& n) {
                  if (!g.wants_grad(ifm)) return;
                  Tensor& dF = g.grad_acc(ifm);
                  for (Index c = 0; c < C; ++c) {
                    double* p = dF.data() + (batch_index * C + c) * HW;
                    for (Index i = 0; i < HW; ++i) p[i] += n.grad.at(i, c);
                  }
                });
}

Var mse_loss(Var pred, Var target) {
  Graph& g = same_graph(pred, target);
  const Tensor& P = pred.value();
  require_same_shape(P, target.value(), "mse_loss");
  const Index N = P.size();
  const double v = (P.vec() - target.value().vec()).squaredNorm() / static_cast<double>(N);
  return g.make("mse_loss", {pred.id, target.id}, Tensor::scalar(v),
                [ip = pred.id, it = target.id, N](Graph& g, Graph::Node& n) {
                  const double c = 2.0 * n.grad[0] / static_cast<double>(N);
                  auto diff = (g.value(ip).vec() - g.value(it).vec()).eval();
                  if (g.wants_grad(ip)) g.grad_acc(ip).vec() += c * diff;
                  if (g.wants_grad(it)) g.grad_acc(it).vec() -= c * diff;
                });
}

Var cross_entropy_loss(Var logits, const std::vector<int>& labels) {
  Graph& g = *logits.graph;
  const Tensor& X = logits.value();
  require_rank(X, 2, "cross_entropy_loss");
  const Index B = X.dim(0), K = X.dim(1);
  if (static_cast<Index>(labels.size()) != B)
    throw DimensionError("cross_entropy_loss: " + std::to_string(labels.size()) + " labels for batch " +
                         std::to_string(B));
  for (int l : labels)
    if (l < 0 || l >= K) throw DataError("cross_entropy_loss: label " + std::to_string(l) + " out of range");
  Tensor probs({B, K});
  double loss = 0;
  for (Index b = 0; b < B; ++b) {
    const double* row = X.data() + b * K;
    double m = row[0];
    for (Index k = 1; k < K; ++k) m = std::max(m, row[k]);
    double s = 0;
    for (Index k = 0; k < K; ++k) {
      probs.at(b, k) = std::exp(row[k] - m);
      s += probs.at(b, k);
    }
    for (Index k = 0; k < K; ++k) probs.at(b, k) /= s;
    loss += m + std::log(s) - row[labels[static_cast<std::size_t>(b)]];
  }
  loss /= static_cast<double>(B);
  return g.make("cross_entropy_loss", {logits.id}, Tensor::scalar(loss),
                [il = logits.id, labels, probs = std::move(probs), B, K](Graph& g, Graph::Node& n) {
                  if (!g.wants_grad(il)) return;
                  Tensor& dx = g.grad_acc(il);
                  const double c = n.grad[0] / static_cast<double>(B);
                  for (Index b = 0; b < B; ++b) {
                    for (Index k = 0; k < K; ++k) dx.at(b, k) += c * probs.at(b, k);
                    dx.at(b, labels[static_cast<std::size_t>(b)]) -= c;
                  }
                });
}

}  // namespace dep
