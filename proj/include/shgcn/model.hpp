#pragma once
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shgcn/graph.hpp"
#include "shgcn/matrix.hpp"
#include "shgcn/ranking.hpp"
#include "shgcn/tape.hpp"

namespace shgcn {

struct ModelConfig {
  int dim = 32;
  int layers = 3;
  double leaky_slope = 0.01;
  double norm_eps = 1e-12;
};

// Per-layer transforms: one (W, b) each for the hyperedge, relation, user
// and item updates.
struct LayerParams {
  Matrix w_edge, b_edge;
  Matrix w_rel, b_rel;
  Matrix w_user, b_user;
  Matrix w_item, b_item;
};

// Trainable state: layer-0 embedding table [P; Q] stacked users-first,
// the per-layer transforms, and one two-layer attention MLP (d -> d -> 1)
// shared across layers.
struct ModelState {
  ModelConfig config;
  int num_users = 0;
  int num_items = 0;
  Matrix embeddings;  // (M+N) x d
  std::vector<LayerParams> layers;
  Matrix attn_w_hidden, attn_b_hidden;  // d x d, 1 x d
  Matrix attn_w_out, attn_b_out;        // d x 1, 1 x 1

  // Embeddings and weights ~ N(0, 0.1^2), biases zero.
  static ModelState init(int num_users, int num_items, const ModelConfig& cfg,
                         std::uint64_t seed);

  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;
};

struct ParamCount {
  long long embeddings = 0;
  long long transforms = 0;
  long long attention_mlp = 0;
  long long total = 0;
  // Extra (non-embedding) parameters counted with the per-layer d^2 MLP
  // convention: 2L*d^2 + 4L*d*(d+1). Kept for cross-checking against the
  // exact count above.
  long long extras_per_layer_mlp = 0;
};
ParamCount param_count(long long num_users, long long num_items, long long dim,
                       long long layers);

// Parameter leaves registered on a tape, mirroring ModelState.
struct ShgcnLeaves {
  TapeNode embeddings;
  struct Layer {
    TapeNode w_edge, b_edge, w_rel, b_rel, w_user, b_user, w_item, b_item;
  };
  std::vector<Layer> layers;
  TapeNode attn_w_hidden, attn_b_hidden, attn_w_out, attn_b_out;

  // Flattened in ModelState::parameters() order.
  std::vector<TapeNode> flat() const;
};

ShgcnLeaves register_parameters(Tape& tape, const ModelState& state);

// The four per-layer updates. Each takes the previous layer's inputs and
// returns the taped output described by the propagation rules.
TapeNode hyperedge_embed(Tape& t, TapeNode node_embed, TapeNode w, TapeNode b,
                         const Hypergraph& g, double slope);
TapeNode relation_embed(Tape& t, TapeNode edge_embed, TapeNode w, TapeNode b,
                        const Hypergraph& g, double slope);
// Softmax-normalized attention over each user's neighbor slots; returns an
// (nnz x 1) node aligned with g.neighbor_users().
TapeNode attention_weights(Tape& t, TapeNode rel_embed, TapeNode w_hidden,
                           TapeNode b_hidden, TapeNode w_out, TapeNode b_out,
                           const Hypergraph& g, double slope);
// P_k from the self-loop, the masked hyperedge message and the attention-
// weighted social message; rows L2-normalized. Neighbor messages read the
// previous layer's user embeddings.
TapeNode user_update(Tape& t, TapeNode node_embed_prev, TapeNode edge_embed,
                     TapeNode alpha, TapeNode w, TapeNode b, const Hypergraph& g,
                     double slope, double eps);
TapeNode item_update(Tape& t, TapeNode node_embed_prev, TapeNode edge_embed,
                     TapeNode w, TapeNode b, const Hypergraph& g, double slope,
                     double eps);

// Taped intermediates of a full forward pass, one entry per layer.
struct ForwardTrace {
  TapeNode e_star;                     // (M+N) x d*(L+1)
  std::vector<TapeNode> edge_embed;    // C_k
  std::vector<TapeNode> rel_embed;     // R_k
  std::vector<TapeNode> alpha;         // attention slots
  std::vector<TapeNode> node_embed;    // E_0 .. E_L
};

ForwardTrace build_forward(Tape& t, const ShgcnLeaves& leaves, const Hypergraph& g,
                           const ModelConfig& cfg);

// Convenience forward returning the final concatenated representations.
Matrix forward_representations(const ModelState& state, const Hypergraph& g);

// Inner product of user row i and item row M+j over all d*(L+1) columns.
double score_representations(const Matrix& e_star, int num_users, int num_items,
                             int user, int item);

class ShgcnScorer final : public Scorer {
 public:
  ShgcnScorer(Matrix e_star, int num_users, int num_items)
      : e_star_(std::move(e_star)), num_users_(num_users), num_items_(num_items) {}
  double score(int user, int item) const override {
    return score_representations(e_star_, num_users_, num_items_, user, item);
  }
  const Matrix& representations() const { return e_star_; }

 private:
  Matrix e_star_;
  int num_users_, num_items_;
};

class ShgcnModel final : public RankingModel {
 public:
  ShgcnModel(ModelState state, const Hypergraph& graph);

  ModelState& state() { return state_; }
  const ModelState& state() const { return state_; }
  const Hypergraph& graph() const { return *graph_; }

  std::string kind() const override { return "shgcn"; }
  std::vector<Matrix*> parameters() override { return state_.parameters(); }
  std::vector<std::string> parameter_names() const override {
    return state_.parameter_names();
  }
  LossNodes build_loss(Tape& tape, const BprBatch& batch, double l2_lambda,
                       std::vector<TapeNode>& leaves) override;
  std::unique_ptr<Scorer> make_scorer() const override;

 private:
  ModelState state_;
  const Hypergraph* graph_;
};

}  // namespace shgcn
