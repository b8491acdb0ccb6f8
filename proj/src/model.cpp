#include "shgcn/model.hpp"

#include <algorithm>
#include <random>

#include "shgcn/errors.hpp"

namespace shgcn {
namespace {

void fill_normal(Matrix& m, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

std::vector<double> nonempty_row_mask(std::span<const int> offsets) {
  std::vector<double> mask(offsets.size() - 1);
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i)
    mask[i] = offsets[i + 1] > offsets[i] ? 1.0 : 0.0;
  return mask;
}

}  // namespace

ModelState ModelState::init(int num_users, int num_items, const ModelConfig& cfg,
                            std::uint64_t seed) {
  if (num_users <= 0 || num_items <= 0)
    throw ContractError("ModelState::init: user/item counts must be positive");
  if (cfg.dim <= 0 || cfg.layers < 0)
    throw ContractError("ModelState::init: bad dim/layers");

  ModelState s;
  s.config = cfg;
  s.num_users = num_users;
  s.num_items = num_items;
  std::mt19937_64 rng(seed);
  const double stddev = 0.1;

  s.embeddings = Matrix(num_users + num_items, cfg.dim);
  fill_normal(s.embeddings, rng, stddev);
  s.layers.resize(cfg.layers);
  for (auto& lp : s.layers) {
    for (Matrix* w : {&lp.w_edge, &lp.w_rel, &lp.w_user, &lp.w_item}) {
      *w = Matrix(cfg.dim, cfg.dim);
      fill_normal(*w, rng, stddev);
    }
    for (Matrix* b : {&lp.b_edge, &lp.b_rel, &lp.b_user, &lp.b_item})
      *b = Matrix(1, cfg.dim);
  }
  s.attn_w_hidden = Matrix(cfg.dim, cfg.dim);
  fill_normal(s.attn_w_hidden, rng, stddev);
  s.attn_b_hidden = Matrix(1, cfg.dim);
  s.attn_w_out = Matrix(cfg.dim, 1);
  fill_normal(s.attn_w_out, rng, stddev);
  s.attn_b_out = Matrix(1, 1);
  return s;
}

std::vector<Matrix*> ModelState::parameters() {
  std::vector<Matrix*> out;
  out.push_back(&embeddings);
  for (auto& lp : layers)
    for (Matrix* m : {&lp.w_edge, &lp.b_edge, &lp.w_rel, &lp.b_rel, &lp.w_user,
                      &lp.b_user, &lp.w_item, &lp.b_item})
      out.push_back(m);
  for (Matrix* m : {&attn_w_hidden, &attn_b_hidden, &attn_w_out, &attn_b_out})
    out.push_back(m);
  return out;
}

std::vector<const Matrix*> ModelState::parameters() const {
  auto mut = const_cast<ModelState*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> ModelState::parameter_names() const {
  std::vector<std::string> names{"embeddings"};
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string p = "layer" + std::to_string(k + 1) + ".";
    for (const char* n : {"w_edge", "b_edge", "w_rel", "b_rel", "w_user", "b_user",
                          "w_item", "b_item"})
      names.push_back(p + n);
  }
  for (const char* n : {"attn_w_hidden", "attn_b_hidden", "attn_w_out", "attn_b_out"})
    names.push_back(n);
  return names;
}

ParamCount param_count(long long num_users, long long num_items, long long dim,
                       long long layers) {
  if (num_users <= 0 || num_items <= 0 || dim <= 0 || layers <= 0)
    throw ContractError("param_count: all arguments must be positive");
  ParamCount c;
  c.embeddings = (num_users + num_items) * dim;
  c.transforms = 4 * layers * dim * (dim + 1);
  c.attention_mlp = dim * (dim + 1) + (dim + 1);
  c.total = c.embeddings + c.transforms + c.attention_mlp;
  c.extras_per_layer_mlp = 2 * layers * dim * dim + 4 * layers * dim * (dim + 1);
  return c;
}

std::vector<TapeNode> ShgcnLeaves::flat() const {
  std::vector<TapeNode> out{embeddings};
  for (const auto& l : layers)
    for (TapeNode n : {l.w_edge, l.b_edge, l.w_rel, l.b_rel, l.w_user, l.b_user,
                       l.w_item, l.b_item})
      out.push_back(n);
  for (TapeNode n : {attn_w_hidden, attn_b_hidden, attn_w_out, attn_b_out})
    out.push_back(n);
  return out;
}

ShgcnLeaves register_parameters(Tape& t, const ModelState& s) {
  ShgcnLeaves l;
  l.embeddings = t.leaf(s.embeddings);
  l.layers.reserve(s.layers.size());
  for (const auto& lp : s.layers)
    l.layers.push_back({t.leaf(lp.w_edge), t.leaf(lp.b_edge), t.leaf(lp.w_rel),
                        t.leaf(lp.b_rel), t.leaf(lp.w_user), t.leaf(lp.b_user),
                        t.leaf(lp.w_item), t.leaf(lp.b_item)});
  l.attn_w_hidden = t.leaf(s.attn_w_hidden);
  l.attn_b_hidden = t.leaf(s.attn_b_hidden);
  l.attn_w_out = t.leaf(s.attn_w_out);
  l.attn_b_out = t.leaf(s.attn_b_out);
  return l;
}

TapeNode hyperedge_embed(Tape& t, TapeNode node_embed, TapeNode w, TapeNode b,
                         const Hypergraph& g, double slope) {
  TapeNode agg =
      t.segment_mean_rows(node_embed, g.edge_member_offsets(), g.edge_member_nodes());
  return t.leaky_relu(t.add_bias(t.matmul(agg, w), b), slope);
}

TapeNode relation_embed(Tape& t, TapeNode edge_embed, TapeNode w, TapeNode b,
                        const Hypergraph& g, double slope) {
  TapeNode agg =
      t.segment_mean_rows(edge_embed, g.relation_edge_offsets(), g.relation_edge_ids());
  return t.leaky_relu(t.add_bias(t.matmul(agg, w), b), slope);
}

TapeNode attention_weights(Tape& t, TapeNode rel_embed, TapeNode w_hidden,
                           TapeNode b_hidden, TapeNode w_out, TapeNode b_out,
                           const Hypergraph& g, double slope) {
  TapeNode hidden = t.leaky_relu(t.add_bias(t.matmul(rel_embed, w_hidden), b_hidden), slope);
  TapeNode logits = t.add_bias(t.matmul(hidden, w_out), b_out);
  return t.segment_softmax(logits, g.neighbor_offsets(), g.neighbor_relations());
}

TapeNode user_update(Tape& t, TapeNode node_embed_prev, TapeNode edge_embed,
                     TapeNode alpha, TapeNode w, TapeNode b, const Hypergraph& g,
                     double slope, double eps) {
  const int m = g.num_users();
  TapeNode self = t.slice_rows(node_embed_prev, 0, m);
  TapeNode agg = t.segment_mean_rows(edge_embed, g.user_edge_offsets(), g.node_edge_ids());
  TapeNode hyper = t.leaky_relu(t.add_bias(t.matmul(agg, w), b), slope);
  // Users in no hyperedge get no message at all, bias included.
  hyper = t.row_scale(hyper, nonempty_row_mask(g.user_edge_offsets()));
  TapeNode social = t.segment_weighted_sum_rows(node_embed_prev, alpha,
                                                g.neighbor_offsets(), g.neighbor_users());
  TapeNode social_msg = t.leaky_relu(social, slope);
  return t.l2_normalize_rows(t.add(t.add(self, hyper), social_msg), eps);
}

TapeNode item_update(Tape& t, TapeNode node_embed_prev, TapeNode edge_embed,
                     TapeNode w, TapeNode b, const Hypergraph& g, double slope,
                     double eps) {
  const int m = g.num_users();
  const int n = g.num_items();
  TapeNode self = t.slice_rows(node_embed_prev, m, m + n);
  TapeNode agg = t.segment_mean_rows(edge_embed, g.item_edge_offsets(), g.node_edge_ids());
  TapeNode hyper = t.leaky_relu(t.add_bias(t.matmul(agg, w), b), slope);
  hyper = t.row_scale(hyper, nonempty_row_mask(g.item_edge_offsets()));
  return t.l2_normalize_rows(t.add(self, hyper), eps);
}

ForwardTrace build_forward(Tape& t, const ShgcnLeaves& leaves, const Hypergraph& g,
                           const ModelConfig& cfg) {
  if (static_cast<int>(leaves.layers.size()) != cfg.layers)
    throw ContractError("build_forward: leaves do not match configured layer count");

  ForwardTrace tr;
  TapeNode e_prev = leaves.embeddings;
  tr.node_embed.push_back(e_prev);
  for (int k = 0; k < cfg.layers; ++k) {
    const auto& lp = leaves.layers[k];
    TapeNode c = hyperedge_embed(t, e_prev, lp.w_edge, lp.b_edge, g, cfg.leaky_slope);
    TapeNode r = relation_embed(t, c, lp.w_rel, lp.b_rel, g, cfg.leaky_slope);
    TapeNode a = attention_weights(t, r, leaves.attn_w_hidden, leaves.attn_b_hidden,
                                   leaves.attn_w_out, leaves.attn_b_out, g,
                                   cfg.leaky_slope);
    TapeNode p = user_update(t, e_prev, c, a, lp.w_user, lp.b_user, g, cfg.leaky_slope,
                             cfg.norm_eps);
    TapeNode q = item_update(t, e_prev, c, lp.w_item, lp.b_item, g, cfg.leaky_slope,
                             cfg.norm_eps);
    e_prev = t.vstack(p, q);
    tr.edge_embed.push_back(c);
    tr.rel_embed.push_back(r);
    tr.alpha.push_back(a);
    tr.node_embed.push_back(e_prev);
  }
  tr.e_star = t.concat_cols(tr.node_embed);
  return tr;
}

Matrix forward_representations(const ModelState& state, const Hypergraph& g) {
  if (state.num_users != g.num_users() || state.num_items != g.num_items())
    throw ContractError("forward_representations: model/graph dimension mismatch");
  Tape t;
  ShgcnLeaves leaves = register_parameters(t, state);
  ForwardTrace tr = build_forward(t, leaves, g, state.config);
  return t.value(tr.e_star);
}

double score_representations(const Matrix& e_star, int num_users, int num_items,
                             int user, int item) {
  if (user < 0 || user >= num_users)
    throw ContractError("score: user id out of range");
  if (item < 0 || item >= num_items)
    throw ContractError("score: item id out of range");
  const double* u = e_star.row(user);
  const double* v = e_star.row(num_users + item);
  double acc = 0.0;
  for (int c = 0; c < e_star.cols(); ++c) acc += u[c] * v[c];
  return acc;
}

ShgcnModel::ShgcnModel(ModelState state, const Hypergraph& graph)
    : state_(std::move(state)), graph_(&graph) {
  if (state_.num_users != graph.num_users() || state_.num_items != graph.num_items())
    throw ContractError("ShgcnModel: model/graph dimension mismatch");
}

LossNodes ShgcnModel::build_loss(Tape& tape, const BprBatch& batch, double l2_lambda,
                                 std::vector<TapeNode>& leaves) {
  if (batch.size() == 0) throw ContractError("build_loss: empty batch");
  if (batch.pos_items.size() != batch.size() || batch.neg_items.size() != batch.size())
    throw ContractError("build_loss: ragged batch");

  ShgcnLeaves lv = register_parameters(tape, state_);
  for (TapeNode n : lv.flat()) leaves.push_back(n);
  ForwardTrace tr = build_forward(tape, lv, *graph_, state_.config);

  const int m = state_.num_users;
  std::vector<int> pos_rows(batch.size()), neg_rows(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    pos_rows[k] = m + batch.pos_items[k];
    neg_rows[k] = m + batch.neg_items[k];
  }
  TapeNode s_pos = tape.gather_pair_dot(tr.e_star, batch.users, tr.e_star, pos_rows);
  TapeNode s_neg = tape.gather_pair_dot(tr.e_star, batch.users, tr.e_star, neg_rows);
  TapeNode terms = tape.neg_log_sigmoid(tape.sub(s_pos, s_neg));

  LossNodes out;
  out.pair_sum = tape.reduce_sum(terms);
  out.num_pairs = static_cast<int>(batch.size());
  out.total = out.pair_sum;
  if (l2_lambda > 0.0) {
    std::vector<int> touched = batch.users;
    touched.insert(touched.end(), pos_rows.begin(), pos_rows.end());
    touched.insert(touched.end(), neg_rows.begin(), neg_rows.end());
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    TapeNode reg = tape.gather_squared_norm(lv.embeddings, std::move(touched));
    out.total = tape.add(out.pair_sum, tape.scale(reg, l2_lambda));
  }
  return out;
}

std::unique_ptr<Scorer> ShgcnModel::make_scorer() const {
  return std::make_unique<ShgcnScorer>(forward_representations(state_, *graph_),
                                       state_.num_users, state_.num_items);
}

}  // namespace shgcn
