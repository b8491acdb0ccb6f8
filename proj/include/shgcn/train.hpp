#pragma once
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "shgcn/eval.hpp"
#include "shgcn/ranking.hpp"

namespace shgcn {

struct TrainConfig {
  double learning_rate = 1e-3;  // tuning grid: {3e-4, 1e-3, 3e-3}
  double l2_lambda = 1e-6;      // tuning grid: 1e-8 .. 1e-3 by decades
  int batch_size = 4096;        // positives per batch; grid {256,...,4096}
  int negatives_per_positive = 8;
  int epochs = 100;
  int patience = 10;  // epochs tolerated without validation improvement
  std::uint64_t seed = 42;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

inline const std::vector<double>& learning_rate_grid() {
  static const std::vector<double> g{3e-4, 1e-3, 3e-3};
  return g;
}
inline const std::vector<double>& l2_lambda_grid() {
  static const std::vector<double> g{1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
  return g;
}
inline const std::vector<int>& batch_size_grid() {
  static const std::vector<int> g{256, 512, 1024, 2048, 4096};
  return g;
}

// First/second moment accumulators mirroring the parameter list.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long long step = 0;

  static AdamState init(std::span<Matrix* const> params);
};

// One bias-corrected Adam update over all parameters. Throws NumericError
// naming the parameter if a gradient is non-finite.
void adam_step(std::span<Matrix* const> params,
               std::span<const Matrix* const> grads, AdamState& state,
               const TrainConfig& cfg);

// Uniform negatives with replacement across draws; every draw rejects items
// the user has in the training set and redraws.
class NegativeSampler {
 public:
  NegativeSampler(int num_users, int num_items,
                  std::span<const std::pair<int, int>> train);

  // Appends count sampled item ids. Throws DataError if the user has
  // interacted with every item.
  void sample(std::mt19937_64& rng, int user, int count, std::vector<int>& out) const;
  int train_count(int user) const { return offsets_[user + 1] - offsets_[user]; }

 private:
  int num_items_;
  std::vector<int> offsets_;
  std::vector<int> items_;  // per-user sorted train items
};

struct EpochStats {
  double mean_pair_loss = 0.0;
  double seconds = 0.0;
};

// One pass over the shuffled positives: sample negatives, tape the loss,
// backprop, apply Adam. The forward runs over the full graph each batch.
EpochStats train_epoch(RankingModel& model, std::span<const std::pair<int, int>> train,
                       const NegativeSampler& sampler, AdamState& opt,
                       const TrainConfig& cfg, std::mt19937_64& rng);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double val_ndcg10 = 0.0;
  bool has_val = false;
  double seconds = 0.0;
};

struct FitResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_ndcg10 = 0.0;
};

// Trains up to cfg.epochs, evaluating validation NDCG@10 each epoch; keeps
// the best parameters and stops once patience is exhausted. On return the
// model holds the best parameters. Without validation items every epoch
// runs and the final parameters are kept.
FitResult fit(RankingModel& model, const EvalSplit& split, const TrainConfig& cfg,
              const std::function<void(const EpochRecord&)>& on_epoch = nullptr);

}  // namespace shgcn
