#include "shgcn/baseline.hpp"

#include <algorithm>
#include <random>

#include "shgcn/errors.hpp"

namespace shgcn {

MfState MfState::init(int num_users, int num_items, int dim, std::uint64_t seed) {
  if (num_users <= 0 || num_items <= 0 || dim <= 0)
    throw ContractError("MfState::init: all dimensions must be positive");
  MfState s;
  s.num_users = num_users;
  s.num_items = num_items;
  s.dim = dim;
  s.user_factors = Matrix(num_users, dim);
  s.item_factors = Matrix(num_items, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.1);
  for (std::size_t i = 0; i < s.user_factors.size(); ++i)
    s.user_factors.data()[i] = dist(rng);
  for (std::size_t i = 0; i < s.item_factors.size(); ++i)
    s.item_factors.data()[i] = dist(rng);
  return s;
}

std::vector<Matrix*> MfState::parameters() { return {&user_factors, &item_factors}; }

std::vector<std::string> MfState::parameter_names() const {
  return {"user_factors", "item_factors"};
}

double mf_score(const MfState& state, int user, int item) {
  if (user < 0 || user >= state.num_users)
    throw ContractError("mf_score: user id out of range");
  if (item < 0 || item >= state.num_items)
    throw ContractError("mf_score: item id out of range");
  const double* p = state.user_factors.row(user);
  const double* q = state.item_factors.row(item);
  double acc = 0.0;
  for (int c = 0; c < state.dim; ++c) acc += p[c] * q[c];
  return acc;
}

double MfScorer::score(int user, int item) const {
  if (user < 0 || user >= p_.rows()) throw ContractError("score: user id out of range");
  if (item < 0 || item >= q_.rows()) throw ContractError("score: item id out of range");
  const double* p = p_.row(user);
  const double* q = q_.row(item);
  double acc = 0.0;
  for (int c = 0; c < p_.cols(); ++c) acc += p[c] * q[c];
  return acc;
}

LossNodes MfModel::build_loss(Tape& tape, const BprBatch& batch, double l2_lambda,
                              std::vector<TapeNode>& leaves) {
  if (batch.size() == 0) throw ContractError("build_loss: empty batch");
  if (batch.pos_items.size() != batch.size() || batch.neg_items.size() != batch.size())
    throw ContractError("build_loss: ragged batch");

  TapeNode p = tape.leaf(state_.user_factors);
  TapeNode q = tape.leaf(state_.item_factors);
  leaves.push_back(p);
  leaves.push_back(q);

  TapeNode s_pos = tape.gather_pair_dot(p, batch.users, q, batch.pos_items);
  TapeNode s_neg = tape.gather_pair_dot(p, batch.users, q, batch.neg_items);
  TapeNode terms = tape.neg_log_sigmoid(tape.sub(s_pos, s_neg));

  LossNodes out;
  out.pair_sum = tape.reduce_sum(terms);
  out.num_pairs = static_cast<int>(batch.size());
  out.total = out.pair_sum;
  if (l2_lambda > 0.0) {
    auto uniq = [](std::vector<int> v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    };
    std::vector<int> items = batch.pos_items;
    items.insert(items.end(), batch.neg_items.begin(), batch.neg_items.end());
    TapeNode reg_u = tape.gather_squared_norm(p, uniq(batch.users));
    TapeNode reg_i = tape.gather_squared_norm(q, uniq(std::move(items)));
    out.total = tape.add(out.pair_sum, tape.scale(tape.add(reg_u, reg_i), l2_lambda));
  }
  return out;
}

std::unique_ptr<Scorer> MfModel::make_scorer() const {
  return std::make_unique<MfScorer>(state_.user_factors, state_.item_factors);
}

}  // namespace shgcn
