#include "shgcn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "shgcn/errors.hpp"

namespace shgcn {
namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// d/dx of -ln(sigmoid(x)) = sigmoid(x) - 1, computed without overflow.
double sigmoid_minus_one(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(x));
}

}  // namespace

TapeNode Tape::push(Matrix value, std::function<void()> adjoint) {
  values_.push_back(std::move(value));
  steps_.push_back(std::move(adjoint));
  return TapeNode{static_cast<int>(values_.size()) - 1};
}

void Tape::check_node(TapeNode n, const char* op) const {
  require(n.id >= 0 && n.id < static_cast<int>(values_.size()),
          std::string(op) + ": invalid tape node");
}

const Matrix& Tape::val(TapeNode n) const { return values_[n.id]; }

const Matrix& Tape::value(TapeNode n) const {
  check_node(n, "value");
  return values_[n.id];
}

const Matrix& Tape::grad(TapeNode n) const {
  check_node(n, "grad");
  require(!grads_.empty(), "grad: backward() has not run");
  return grads_[n.id];
}

TapeNode Tape::leaf(Matrix value) {
  if (!value.all_finite()) throw ContractError("leaf: non-finite input");
  return push(std::move(value), nullptr);
}

TapeNode Tape::matmul(TapeNode a, TapeNode b) {
  check_node(a, "matmul");
  check_node(b, "matmul");
  const Matrix& av = val(a);
  const Matrix& bv = val(b);
  require(av.cols() == bv.rows(), "matmul: inner dimensions differ (" +
                                      std::to_string(av.cols()) + " vs " +
                                      std::to_string(bv.rows()) + ")");
  Matrix out(av.rows(), bv.cols());
  gemm_nn(av, bv, out);
  return push(std::move(out), [this, a, b, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    gemm_nt(g, values_[b.id], grads_[a.id], /*accumulate=*/true);
    gemm_tn(values_[a.id], g, grads_[b.id], /*accumulate=*/true);
  });
}

TapeNode Tape::add(TapeNode a, TapeNode b) {
  check_node(a, "add");
  check_node(b, "add");
  const Matrix& av = val(a);
  const Matrix& bv = val(b);
  require(av.same_shape(bv), "add: shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += bv.data()[i];
  return push(std::move(out), [this, a, b, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    for (std::size_t i = 0; i < g.size(); ++i) {
      grads_[a.id].data()[i] += g.data()[i];
      grads_[b.id].data()[i] += g.data()[i];
    }
  });
}

TapeNode Tape::sub(TapeNode a, TapeNode b) {
  check_node(a, "sub");
  check_node(b, "sub");
  const Matrix& av = val(a);
  const Matrix& bv = val(b);
  require(av.same_shape(bv), "sub: shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= bv.data()[i];
  return push(std::move(out), [this, a, b, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    for (std::size_t i = 0; i < g.size(); ++i) {
      grads_[a.id].data()[i] += g.data()[i];
      grads_[b.id].data()[i] -= g.data()[i];
    }
  });
}

TapeNode Tape::add_bias(TapeNode x, TapeNode bias) {
  check_node(x, "add_bias");
  check_node(bias, "add_bias");
  const Matrix& xv = val(x);
  const Matrix& bv = val(bias);
  require(bv.rows() == 1 && bv.cols() == xv.cols(),
          "add_bias: bias must be 1 x cols of x");
  Matrix out = xv;
  for (int r = 0; r < out.rows(); ++r) {
    double* orow = out.row(r);
    for (int c = 0; c < out.cols(); ++c) orow[c] += bv(0, c);
  }
  return push(std::move(out), [this, x, bias, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    Matrix& gx = grads_[x.id];
    Matrix& gb = grads_[bias.id];
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i];
    for (int r = 0; r < g.rows(); ++r) {
      const double* grow = g.row(r);
      for (int c = 0; c < g.cols(); ++c) gb(0, c) += grow[c];
    }
  });
}

TapeNode Tape::leaky_relu(TapeNode x, double negative_slope) {
  check_node(x, "leaky_relu");
  const Matrix& xv = val(x);
  Matrix out = xv;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.data()[i] <= 0.0) out.data()[i] *= negative_slope;
  return push(std::move(out), [this, x, negative_slope, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    const Matrix& xv = values_[x.id];
    Matrix& gx = grads_[x.id];
    for (std::size_t i = 0; i < g.size(); ++i)
      gx.data()[i] += g.data()[i] * (xv.data()[i] > 0.0 ? 1.0 : negative_slope);
  });
}

TapeNode Tape::sigmoid(TapeNode x) {
  check_node(x, "sigmoid");
  Matrix out = val(x);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = stable_sigmoid(out.data()[i]);
  return push(std::move(out), [this, x, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    const Matrix& y = values_[out_id];
    Matrix& gx = grads_[x.id];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = y.data()[i];
      gx.data()[i] += g.data()[i] * s * (1.0 - s);
    }
  });
}

TapeNode Tape::log(TapeNode x) {
  check_node(x, "log");
  Matrix out = val(x);
  for (std::size_t i = 0; i < out.size(); ++i) {
    require(out.data()[i] > 0.0, "log: non-positive input");
    out.data()[i] = std::log(out.data()[i]);
  }
  return push(std::move(out), [this, x, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    const Matrix& xv = values_[x.id];
    Matrix& gx = grads_[x.id];
    for (std::size_t i = 0; i < g.size(); ++i)
      gx.data()[i] += g.data()[i] / xv.data()[i];
  });
}

TapeNode Tape::neg_log_sigmoid(TapeNode x) {
  check_node(x, "neg_log_sigmoid");
  Matrix out = val(x);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = out.data()[i];
    out.data()[i] = v >= 0.0 ? std::log1p(std::exp(-v)) : -v + std::log1p(std::exp(v));
  }
  return push(std::move(out), [this, x, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    const Matrix& xv = values_[x.id];
    Matrix& gx = grads_[x.id];
    for (std::size_t i = 0; i < g.size(); ++i)
      gx.data()[i] += g.data()[i] * sigmoid_minus_one(xv.data()[i]);
  });
}

TapeNode Tape::elementwise_mul(TapeNode a, TapeNode b) {
  check_node(a, "elementwise_mul");
  check_node(b, "elementwise_mul");
  const Matrix& av = val(a);
  const Matrix& bv = val(b);
  require(av.same_shape(bv), "elementwise_mul: shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= bv.data()[i];
  return push(std::move(out), [this, a, b, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    const Matrix& av = values_[a.id];
    const Matrix& bv = values_[b.id];
    for (std::size_t i = 0; i < g.size(); ++i) {
      grads_[a.id].data()[i] += g.data()[i] * bv.data()[i];
      grads_[b.id].data()[i] += g.data()[i] * av.data()[i];
    }
  });
}

TapeNode Tape::scale(TapeNode x, double c) {
  check_node(x, "scale");
  Matrix out = val(x);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= c;
  return push(std::move(out), [this, x, c, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    Matrix& gx = grads_[x.id];
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += c * g.data()[i];
  });
}

TapeNode Tape::row_scale(TapeNode x, std::vector<double> factors) {
  check_node(x, "row_scale");
  const Matrix& xv = val(x);
  require(static_cast<int>(factors.size()) == xv.rows(),
          "row_scale: one factor per row required");
  Matrix out = xv;
  for (int r = 0; r < out.rows(); ++r) {
    double* orow = out.row(r);
    for (int c = 0; c < out.cols(); ++c) orow[c] *= factors[r];
  }
  return push(std::move(out),
              [this, x, f = std::move(factors), out_id = node_count()] {
                const Matrix& g = grads_[out_id];
                Matrix& gx = grads_[x.id];
                for (int r = 0; r < g.rows(); ++r) {
                  const double* grow = g.row(r);
                  double* gxrow = gx.row(r);
                  for (int c = 0; c < g.cols(); ++c) gxrow[c] += f[r] * grow[c];
                }
              });
}

TapeNode Tape::l2_normalize_rows(TapeNode x, double eps) {
  check_node(x, "l2_normalize_rows");
  require(eps > 0.0, "l2_normalize_rows: eps must be positive");
  const Matrix& xv = val(x);
  Matrix out = xv;
  for (int r = 0; r < out.rows(); ++r) {
    double* orow = out.row(r);
    double sumsq = 0.0;
    for (int c = 0; c < out.cols(); ++c) sumsq += orow[c] * orow[c];
    const double inv = 1.0 / std::sqrt(sumsq + eps);
    for (int c = 0; c < out.cols(); ++c) orow[c] *= inv;
  }
  return push(std::move(out), [this, x, eps, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    const Matrix& xv = values_[x.id];
    Matrix& gx = grads_[x.id];
    for (int r = 0; r < g.rows(); ++r) {
      const double* xrow = xv.row(r);
      const double* grow = g.row(r);
      double* gxrow = gx.row(r);
      double sumsq = 0.0, xg = 0.0;
      for (int c = 0; c < g.cols(); ++c) {
        sumsq += xrow[c] * xrow[c];
        xg += xrow[c] * grow[c];
      }
      const double n = std::sqrt(sumsq + eps);
      const double inv = 1.0 / n;
      const double inv3 = inv * inv * inv;
      for (int c = 0; c < g.cols(); ++c)
        gxrow[c] += grow[c] * inv - xrow[c] * xg * inv3;
    }
  });
}

TapeNode Tape::concat_cols(std::span<const TapeNode> xs) {
  require(!xs.empty(), "concat_cols: no inputs");
  int cols = 0;
  const int rows = val(xs.front()).rows();
  for (TapeNode n : xs) {
    check_node(n, "concat_cols");
    require(val(n).rows() == rows, "concat_cols: row counts differ");
    cols += val(n).cols();
  }
  Matrix out(rows, cols);
  int at = 0;
  for (TapeNode n : xs) {
    const Matrix& v = val(n);
    for (int r = 0; r < rows; ++r)
      std::copy(v.row(r), v.row(r) + v.cols(), out.row(r) + at);
    at += v.cols();
  }
  return push(std::move(out),
              [this, inputs = std::vector<TapeNode>(xs.begin(), xs.end()),
               out_id = node_count()] {
                const Matrix& g = grads_[out_id];
                int at = 0;
                for (TapeNode n : inputs) {
                  Matrix& gi = grads_[n.id];
                  for (int r = 0; r < g.rows(); ++r) {
                    const double* grow = g.row(r) + at;
                    double* girow = gi.row(r);
                    for (int c = 0; c < gi.cols(); ++c) girow[c] += grow[c];
                  }
                  at += gi.cols();
                }
              });
}

TapeNode Tape::vstack(TapeNode top, TapeNode bottom) {
  check_node(top, "vstack");
  check_node(bottom, "vstack");
  const Matrix& tv = val(top);
  const Matrix& bv = val(bottom);
  require(tv.cols() == bv.cols(), "vstack: column counts differ");
  Matrix out(tv.rows() + bv.rows(), tv.cols());
  std::copy(tv.data(), tv.data() + tv.size(), out.data());
  std::copy(bv.data(), bv.data() + bv.size(), out.data() + tv.size());
  return push(std::move(out), [this, top, bottom, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    Matrix& gt = grads_[top.id];
    Matrix& gb = grads_[bottom.id];
    for (std::size_t i = 0; i < gt.size(); ++i) gt.data()[i] += g.data()[i];
    const double* lower = g.data() + gt.size();
    for (std::size_t i = 0; i < gb.size(); ++i) gb.data()[i] += lower[i];
  });
}

TapeNode Tape::slice_rows(TapeNode x, int begin, int end) {
  check_node(x, "slice_rows");
  const Matrix& xv = val(x);
  require(0 <= begin && begin <= end && end <= xv.rows(), "slice_rows: bad range");
  Matrix out(end - begin, xv.cols());
  std::copy(xv.row(begin), xv.row(begin) + out.size(), out.data());
  return push(std::move(out), [this, x, begin, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    Matrix& gx = grads_[x.id];
    double* dst = gx.row(begin);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g.data()[i];
  });
}

TapeNode Tape::gather_rows(TapeNode x, std::vector<int> rows) {
  check_node(x, "gather_rows");
  const Matrix& xv = val(x);
  for (int r : rows)
    require(0 <= r && r < xv.rows(), "gather_rows: row index out of range");
  Matrix out(static_cast<int>(rows.size()), xv.cols());
  for (std::size_t k = 0; k < rows.size(); ++k)
    std::copy(xv.row(rows[k]), xv.row(rows[k]) + xv.cols(), out.row(static_cast<int>(k)));
  return push(std::move(out),
              [this, x, rows = std::move(rows), out_id = node_count()] {
                const Matrix& g = grads_[out_id];
                Matrix& gx = grads_[x.id];
                for (std::size_t k = 0; k < rows.size(); ++k) {
                  const double* grow = g.row(static_cast<int>(k));
                  double* gxrow = gx.row(rows[k]);
                  for (int c = 0; c < g.cols(); ++c) gxrow[c] += grow[c];
                }
              });
}

TapeNode Tape::segment_mean_rows(TapeNode x, std::span<const int> offsets,
                                 std::span<const int> indices) {
  check_node(x, "segment_mean_rows");
  const Matrix& xv = val(x);
  require(!offsets.empty(), "segment_mean_rows: offsets empty");
  const int segs = static_cast<int>(offsets.size()) - 1;
  for (int idx : indices)
    require(0 <= idx && idx < xv.rows(), "segment_mean_rows: index out of range");
  Matrix out(segs, xv.cols());
  for (int g = 0; g < segs; ++g) {
    const int lo = offsets[g], hi = offsets[g + 1];
    if (lo == hi) continue;
    double* orow = out.row(g);
    for (int k = lo; k < hi; ++k) {
      const double* xrow = xv.row(indices[k]);
      for (int c = 0; c < xv.cols(); ++c) orow[c] += xrow[c];
    }
    const double inv = 1.0 / static_cast<double>(hi - lo);
    for (int c = 0; c < xv.cols(); ++c) orow[c] *= inv;
  }
  return push(std::move(out), [this, x, offsets, indices, out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    Matrix& gx = grads_[x.id];
    const int segs = static_cast<int>(offsets.size()) - 1;
    for (int s = 0; s < segs; ++s) {
      const int lo = offsets[s], hi = offsets[s + 1];
      if (lo == hi) continue;
      const double inv = 1.0 / static_cast<double>(hi - lo);
      const double* grow = g.row(s);
      for (int k = lo; k < hi; ++k) {
        double* gxrow = gx.row(indices[k]);
        for (int c = 0; c < g.cols(); ++c) gxrow[c] += inv * grow[c];
      }
    }
  });
}

TapeNode Tape::segment_weighted_sum_rows(TapeNode x, TapeNode weights,
                                         std::span<const int> offsets,
                                         std::span<const int> indices) {
  check_node(x, "segment_weighted_sum_rows");
  check_node(weights, "segment_weighted_sum_rows");
  const Matrix& xv = val(x);
  const Matrix& wv = val(weights);
  require(wv.cols() == 1 && wv.rows() == static_cast<int>(indices.size()),
          "segment_weighted_sum_rows: weights must be nnz x 1");
  for (int idx : indices)
    require(0 <= idx && idx < xv.rows(), "segment_weighted_sum_rows: index out of range");
  const int segs = static_cast<int>(offsets.size()) - 1;
  Matrix out(segs, xv.cols());
  for (int g = 0; g < segs; ++g) {
    double* orow = out.row(g);
    for (int k = offsets[g]; k < offsets[g + 1]; ++k) {
      const double w = wv(k, 0);
      const double* xrow = xv.row(indices[k]);
      for (int c = 0; c < xv.cols(); ++c) orow[c] += w * xrow[c];
    }
  }
  return push(std::move(out),
              [this, x, weights, offsets, indices, out_id = node_count()] {
                const Matrix& g = grads_[out_id];
                const Matrix& xv = values_[x.id];
                const Matrix& wv = values_[weights.id];
                Matrix& gx = grads_[x.id];
                Matrix& gw = grads_[weights.id];
                const int segs = static_cast<int>(offsets.size()) - 1;
                for (int s = 0; s < segs; ++s) {
                  const double* grow = g.row(s);
                  for (int k = offsets[s]; k < offsets[s + 1]; ++k) {
                    const double* xrow = xv.row(indices[k]);
                    double* gxrow = gx.row(indices[k]);
                    const double w = wv(k, 0);
                    double acc = 0.0;
                    for (int c = 0; c < g.cols(); ++c) {
                      gxrow[c] += w * grow[c];
                      acc += xrow[c] * grow[c];
                    }
                    gw(k, 0) += acc;
                  }
                }
              });
}

TapeNode Tape::segment_softmax(TapeNode scores, std::span<const int> offsets,
                               std::span<const int> score_rows) {
  check_node(scores, "segment_softmax");
  const Matrix& sv = val(scores);
  require(sv.cols() == 1, "segment_softmax: scores must be S x 1");
  for (int r : score_rows)
    require(0 <= r && r < sv.rows(), "segment_softmax: score row out of range");
  const int segs = static_cast<int>(offsets.size()) - 1;
  const int nnz = static_cast<int>(score_rows.size());
  require(offsets.back() == nnz, "segment_softmax: offsets do not cover slots");
  Matrix out(nnz, 1);
  for (int g = 0; g < segs; ++g) {
    const int lo = offsets[g], hi = offsets[g + 1];
    if (lo == hi) continue;
    double mx = sv(score_rows[lo], 0);
    for (int k = lo + 1; k < hi; ++k) mx = std::max(mx, sv(score_rows[k], 0));
    double denom = 0.0;
    for (int k = lo; k < hi; ++k) {
      out(k, 0) = std::exp(sv(score_rows[k], 0) - mx);
      denom += out(k, 0);
    }
    for (int k = lo; k < hi; ++k) out(k, 0) /= denom;
  }
  return push(std::move(out),
              [this, scores, offsets, score_rows, out_id = node_count()] {
                const Matrix& g = grads_[out_id];
                const Matrix& alpha = values_[out_id];
                Matrix& gs = grads_[scores.id];
                const int segs = static_cast<int>(offsets.size()) - 1;
                for (int s = 0; s < segs; ++s) {
                  const int lo = offsets[s], hi = offsets[s + 1];
                  double dotv = 0.0;
                  for (int k = lo; k < hi; ++k) dotv += alpha(k, 0) * g(k, 0);
                  for (int k = lo; k < hi; ++k)
                    gs(score_rows[k], 0) += alpha(k, 0) * (g(k, 0) - dotv);
                }
              });
}

TapeNode Tape::gather_pair_dot(TapeNode a, std::vector<int> rows_a, TapeNode b,
                               std::vector<int> rows_b) {
  check_node(a, "gather_pair_dot");
  check_node(b, "gather_pair_dot");
  const Matrix& av = val(a);
  const Matrix& bv = val(b);
  require(av.cols() == bv.cols(), "gather_pair_dot: column counts differ");
  require(rows_a.size() == rows_b.size(), "gather_pair_dot: row lists differ in length");
  for (int r : rows_a)
    require(0 <= r && r < av.rows(), "gather_pair_dot: row index out of range");
  for (int r : rows_b)
    require(0 <= r && r < bv.rows(), "gather_pair_dot: row index out of range");
  const int n = static_cast<int>(rows_a.size());
  Matrix out(n, 1);
  for (int k = 0; k < n; ++k) {
    const double* ra = av.row(rows_a[k]);
    const double* rb = bv.row(rows_b[k]);
    double acc = 0.0;
    for (int c = 0; c < av.cols(); ++c) acc += ra[c] * rb[c];
    out(k, 0) = acc;
  }
  return push(std::move(out), [this, a, b, ra = std::move(rows_a),
                               rb = std::move(rows_b), out_id = node_count()] {
    const Matrix& g = grads_[out_id];
    const Matrix& av = values_[a.id];
    const Matrix& bv = values_[b.id];
    Matrix& ga = grads_[a.id];
    Matrix& gb = grads_[b.id];
    for (std::size_t k = 0; k < ra.size(); ++k) {
      const double gk = g(static_cast<int>(k), 0);
      const double* arow = av.row(ra[k]);
      const double* brow = bv.row(rb[k]);
      double* garow = ga.row(ra[k]);
      double* gbrow = gb.row(rb[k]);
      for (int c = 0; c < av.cols(); ++c) {
        garow[c] += gk * brow[c];
        gbrow[c] += gk * arow[c];
      }
    }
  });
}

TapeNode Tape::dot(TapeNode a, TapeNode b) {
  check_node(a, "dot");
  check_node(b, "dot");
  const Matrix& av = val(a);
  const Matrix& bv = val(b);
  require(av.same_shape(bv), "dot: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av.data()[i] * bv.data()[i];
  Matrix out(1, 1);
  out(0, 0) = acc;
  return push(std::move(out), [this, a, b, out_id = node_count()] {
    const double g = grads_[out_id](0, 0);
    const Matrix& av = values_[a.id];
    const Matrix& bv = values_[b.id];
    for (std::size_t i = 0; i < av.size(); ++i) {
      grads_[a.id].data()[i] += g * bv.data()[i];
      grads_[b.id].data()[i] += g * av.data()[i];
    }
  });
}

TapeNode Tape::reduce_sum(TapeNode x) {
  check_node(x, "reduce_sum");
  const Matrix& xv = val(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv.data()[i];
  Matrix out(1, 1);
  out(0, 0) = acc;
  return push(std::move(out), [this, x, out_id = node_count()] {
    const double g = grads_[out_id](0, 0);
    Matrix& gx = grads_[x.id];
    for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] += g;
  });
}

TapeNode Tape::gather_squared_norm(TapeNode x, std::vector<int> rows) {
  check_node(x, "gather_squared_norm");
  const Matrix& xv = val(x);
  for (int r : rows)
    require(0 <= r && r < xv.rows(), "gather_squared_norm: row index out of range");
  double acc = 0.0;
  for (int r : rows) {
    const double* xrow = xv.row(r);
    for (int c = 0; c < xv.cols(); ++c) acc += xrow[c] * xrow[c];
  }
  Matrix out(1, 1);
  out(0, 0) = acc;
  return push(std::move(out),
              [this, x, rows = std::move(rows), out_id = node_count()] {
                const double g = grads_[out_id](0, 0);
                const Matrix& xv = values_[x.id];
                Matrix& gx = grads_[x.id];
                for (int r : rows) {
                  const double* xrow = xv.row(r);
                  double* gxrow = gx.row(r);
                  for (int c = 0; c < xv.cols(); ++c) gxrow[c] += 2.0 * g * xrow[c];
                }
              });
}

void Tape::backward(TapeNode loss) {
  check_node(loss, "backward");
  const Matrix& lv = val(loss);
  require(lv.rows() == 1 && lv.cols() == 1, "backward: loss must be a 1x1 scalar");
  grads_.clear();
  grads_.reserve(values_.size());
  for (const Matrix& v : values_) grads_.emplace_back(v.rows(), v.cols());
  grads_[loss.id](0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (steps_[i]) steps_[i]();
}

FdiffReport finite_difference_check(const std::function<double()>& f,
                                    std::span<Matrix* const> params,
                                    std::span<const Matrix* const> analytic_grads,
                                    std::span<const std::string> names, double step,
                                    double tol) {
  require(step > 0.0, "finite_difference_check: step must be positive");
  require(params.size() == analytic_grads.size() && params.size() == names.size(),
          "finite_difference_check: mismatched spans");
  constexpr double kAbsFloor = 1e-8;
  FdiffReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& param = *params[p];
    const Matrix& analytic = *analytic_grads[p];
    require(param.same_shape(analytic),
            "finite_difference_check: gradient shape mismatch for " + names[p]);
    FdiffEntry entry;
    entry.name = names[p];
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double saved = param.data()[i];
      param.data()[i] = saved + step;
      const double fp = f();
      param.data()[i] = saved - step;
      const double fm = f();
      param.data()[i] = saved;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic.data()[i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), kAbsFloor});
      entry.max_rel_err = std::max(entry.max_rel_err, std::fabs(a - numeric) / denom);
    }
    entry.pass = entry.max_rel_err < tol;
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace shgcn
