#pragma once
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "shgcn/matrix.hpp"

namespace shgcn {

// Handle to a value recorded on a Tape.
struct TapeNode {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode gradient tape over dense matrix operations. Values are
// computed eagerly as operations are recorded; backward() replays the
// adjoints in reverse recording order and accumulates gradients for every
// node, so leaves that the loss never touches report exact zeros.
//
// Index arrays passed as spans (segment offsets/ids) are not copied; they
// must outlive the tape. A tape is confined to one thread and is rebuilt
// for every forward pass. Aggregations always accumulate in ascending slot
// order, which keeps runs bitwise reproducible.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable input. All entries must be finite.
  TapeNode leaf(Matrix value);

  const Matrix& value(TapeNode n) const;
  // Valid after backward(); zero matrix for nodes the loss does not reach.
  const Matrix& grad(TapeNode n) const;
  int node_count() const { return static_cast<int>(values_.size()); }

  TapeNode matmul(TapeNode a, TapeNode b);
  TapeNode add(TapeNode a, TapeNode b);
  TapeNode sub(TapeNode a, TapeNode b);
  // x (n x d) plus a broadcast 1 x d bias row.
  TapeNode add_bias(TapeNode x, TapeNode bias);
  TapeNode leaky_relu(TapeNode x, double negative_slope);
  TapeNode sigmoid(TapeNode x);
  TapeNode log(TapeNode x);
  // Numerically stable -ln(sigmoid(x)), elementwise.
  TapeNode neg_log_sigmoid(TapeNode x);
  TapeNode elementwise_mul(TapeNode a, TapeNode b);
  TapeNode scale(TapeNode x, double c);
  // Multiplies row r by the constant factors[r] (masking, not differentiable
  // with respect to the factors).
  TapeNode row_scale(TapeNode x, std::vector<double> factors);
  // Rows divided by sqrt(|row|^2 + eps); a zero row stays zero.
  TapeNode l2_normalize_rows(TapeNode x, double eps);
  TapeNode concat_cols(std::span<const TapeNode> xs);
  TapeNode vstack(TapeNode top, TapeNode bottom);
  TapeNode slice_rows(TapeNode x, int begin, int end);
  TapeNode gather_rows(TapeNode x, std::vector<int> rows);
  // out[g] = mean of x rows listed in segment g; empty segment -> zero row.
  TapeNode segment_mean_rows(TapeNode x, std::span<const int> offsets,
                             std::span<const int> indices);
  // out[g] = sum_k weights[k] * x[indices[k]] over segment g's slots.
  // weights is an (nnz x 1) node aligned with indices.
  TapeNode segment_weighted_sum_rows(TapeNode x, TapeNode weights,
                                     std::span<const int> offsets,
                                     std::span<const int> indices);
  // Softmax within each segment over logits gathered from scores (S x 1)
  // through score_rows; returns an (nnz x 1) node of weights that sum to 1
  // per nonempty segment.
  TapeNode segment_softmax(TapeNode scores, std::span<const int> offsets,
                           std::span<const int> score_rows);
  // out[k] = <a[rows_a[k]], b[rows_b[k]]>; a and b may be the same node.
  TapeNode gather_pair_dot(TapeNode a, std::vector<int> rows_a, TapeNode b,
                           std::vector<int> rows_b);
  // Full contraction of two same-shape matrices -> 1x1.
  TapeNode dot(TapeNode a, TapeNode b);
  TapeNode reduce_sum(TapeNode x);
  // sum of squared entries of the listed rows -> 1x1. Repeated rows
  // contribute with multiplicity.
  TapeNode gather_squared_norm(TapeNode x, std::vector<int> rows);

  // Runs the adjoint sweep from a scalar (1x1) loss node.
  void backward(TapeNode loss);

 private:
  TapeNode push(Matrix value, std::function<void()> adjoint);
  const Matrix& val(TapeNode n) const;
  void check_node(TapeNode n, const char* op) const;

  std::vector<Matrix> values_;
  std::vector<Matrix> grads_;
  std::vector<std::function<void()>> steps_;  // parallel to values_; may be empty fn
};

// Per-parameter outcome of a finite-difference comparison.
struct FdiffEntry {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = true;
};
struct FdiffReport {
  std::vector<FdiffEntry> entries;
  double max_rel_err = 0.0;
  bool pass = true;
};

// Central finite differences of a deterministic scalar function against a
// precomputed analytic gradient, one parameter matrix at a time. Relative
// error uses an absolute floor of 1e-8 so all-zero parameters do not blow
// up the division.
FdiffReport finite_difference_check(const std::function<double()>& f,
                                    std::span<Matrix* const> params,
                                    std::span<const Matrix* const> analytic_grads,
                                    std::span<const std::string> names, double step,
                                    double tol);

}  // namespace shgcn
