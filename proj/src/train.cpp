#include "shgcn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "shgcn/errors.hpp"

namespace shgcn {
namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ContractError("config: learning_rate must be positive");
  if (l2_lambda < 0.0) throw ContractError("config: l2_lambda must be non-negative");
  if (batch_size <= 0) throw ContractError("config: batch_size must be positive");
  if (negatives_per_positive <= 0)
    throw ContractError("config: negatives_per_positive must be positive");
  if (epochs <= 0) throw ContractError("config: epochs must be positive");
  if (patience < 0) throw ContractError("config: patience must be non-negative");
  if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 || adam_beta2 >= 1.0)
    throw ContractError("config: adam betas must lie in (0,1)");
  if (adam_eps <= 0.0) throw ContractError("config: adam_eps must be positive");
}

AdamState AdamState::init(std::span<Matrix* const> params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Matrix* p : params) {
    s.m.emplace_back(p->rows(), p->cols());
    s.v.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(std::span<Matrix* const> params,
               std::span<const Matrix* const> grads, AdamState& state,
               const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ContractError("adam_step: parameter/gradient/state counts differ");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p]->same_shape(*grads[p]))
      throw ContractError("adam_step: gradient shape mismatch at parameter " +
                          std::to_string(p));
    if (!grads[p]->all_finite())
      throw NumericError("adam_step: non-finite gradient at parameter index " +
                         std::to_string(p));
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& param = *params[p];
    const Matrix& g = *grads[p];
    Matrix& m = state.m[p];
    Matrix& v = state.v[p];
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double gi = g.data()[i];
      m.data()[i] = cfg.adam_beta1 * m.data()[i] + (1.0 - cfg.adam_beta1) * gi;
      v.data()[i] = cfg.adam_beta2 * v.data()[i] + (1.0 - cfg.adam_beta2) * gi * gi;
      const double mhat = m.data()[i] / bc1;
      const double vhat = v.data()[i] / bc2;
      param.data()[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

NegativeSampler::NegativeSampler(int num_users, int num_items,
                                 std::span<const std::pair<int, int>> train)
    : num_items_(num_items) {
  if (num_users <= 0 || num_items <= 0)
    throw ContractError("NegativeSampler: counts must be positive");
  offsets_.assign(num_users + 1, 0);
  for (const auto& [u, j] : train) {
    (void)j;
    if (u < 0 || u >= num_users) throw ContractError("NegativeSampler: user out of range");
    ++offsets_[u + 1];
  }
  for (int u = 0; u < num_users; ++u) offsets_[u + 1] += offsets_[u];
  items_.resize(train.size());
  std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, j] : train) items_[cursor[u]++] = j;
  for (int u = 0; u < num_users; ++u)
    std::sort(items_.begin() + offsets_[u], items_.begin() + offsets_[u + 1]);
}

void NegativeSampler::sample(std::mt19937_64& rng, int user, int count,
                             std::vector<int>& out) const {
  if (user < 0 || user + 1 >= static_cast<int>(offsets_.size()))
    throw ContractError("sample: user out of range");
  const int* lo = items_.data() + offsets_[user];
  const int* hi = items_.data() + offsets_[user + 1];
  if (hi - lo >= num_items_)
    throw DataError("sample: user " + std::to_string(user) +
                    " interacted with every item; cannot draw negatives");
  std::uniform_int_distribution<int> pick(0, num_items_ - 1);
  for (int k = 0; k < count; ++k) {
    int j = pick(rng);
    while (std::binary_search(lo, hi, j)) j = pick(rng);
    out.push_back(j);
  }
}

EpochStats train_epoch(RankingModel& model, std::span<const std::pair<int, int>> train,
                       const NegativeSampler& sampler, AdamState& opt,
                       const TrainConfig& cfg, std::mt19937_64& rng) {
  if (train.empty()) throw DataError("train_epoch: no training interactions");
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  auto params = model.parameters();
  double pair_loss_sum = 0.0;
  long long pair_count = 0;
  std::vector<int> negs;

  for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
    const std::size_t end = std::min(order.size(), at + cfg.batch_size);
    BprBatch batch;
    batch.users.reserve((end - at) * cfg.negatives_per_positive);
    batch.pos_items.reserve(batch.users.capacity());
    batch.neg_items.reserve(batch.users.capacity());
    for (std::size_t b = at; b < end; ++b) {
      const auto& [u, j] = train[order[b]];
      negs.clear();
      sampler.sample(rng, u, cfg.negatives_per_positive, negs);
      for (int n : negs) {
        batch.users.push_back(u);
        batch.pos_items.push_back(j);
        batch.neg_items.push_back(n);
      }
    }

    Tape tape;
    std::vector<TapeNode> leaves;
    LossNodes loss = model.build_loss(tape, batch, cfg.l2_lambda, leaves);
    tape.backward(loss.total);

    if (leaves.size() != params.size())
      throw ContractError("train_epoch: model leaves do not match parameters");
    std::vector<const Matrix*> grads;
    grads.reserve(leaves.size());
    for (TapeNode n : leaves) grads.push_back(&tape.grad(n));
    adam_step(params, grads, opt, cfg);

    pair_loss_sum += tape.value(loss.pair_sum)(0, 0);
    pair_count += loss.num_pairs;
  }

  EpochStats stats;
  stats.mean_pair_loss = pair_loss_sum / static_cast<double>(pair_count);
  stats.seconds = elapsed_seconds(start);
  return stats;
}

FitResult fit(RankingModel& model, const EvalSplit& split, const TrainConfig& cfg,
              const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  NegativeSampler sampler(split.num_users, split.num_items, split.train);
  std::mt19937_64 rng(cfg.seed);
  AdamState opt = AdamState::init(model.parameters());

  bool has_val = false;
  for (int v : split.val_item)
    if (v >= 0) {
      has_val = true;
      break;
    }

  FitResult result;
  std::vector<Matrix> best_params;
  int epochs_since_improvement = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochStats stats = train_epoch(model, split.train, sampler, opt, cfg, rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = stats.mean_pair_loss;
    if (has_val) {
      auto scorer = model.make_scorer();
      rec.val_ndcg10 = *validation_ndcg10(*scorer, split);
      rec.has_val = true;
    }
    rec.seconds = elapsed_seconds(start);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (has_val) {
      if (result.history.size() == 1 || rec.val_ndcg10 > result.best_val_ndcg10) {
        result.best_val_ndcg10 = rec.val_ndcg10;
        result.best_epoch = epoch;
        best_params.clear();
        for (Matrix* p : model.parameters()) best_params.push_back(*p);
        epochs_since_improvement = 0;
      } else {
        ++epochs_since_improvement;
        if (epochs_since_improvement > cfg.patience) break;
      }
    } else {
      result.best_epoch = epoch;
    }
  }

  if (has_val && !best_params.empty()) {
    auto params = model.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) *params[p] = best_params[p];
  }
  return result;
}

}  // namespace shgcn
