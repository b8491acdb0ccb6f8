#pragma once
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shgcn/matrix.hpp"
#include "shgcn/ranking.hpp"

namespace shgcn {

// Free user/item embeddings scored by inner product. Trained by the same
// BPR trainer as the hypergraph model so comparisons isolate the model.
struct MfState {
  int num_users = 0;
  int num_items = 0;
  int dim = 0;
  Matrix user_factors;  // M x d
  Matrix item_factors;  // N x d

  static MfState init(int num_users, int num_items, int dim, std::uint64_t seed);
  std::vector<Matrix*> parameters();
  std::vector<std::string> parameter_names() const;
};

double mf_score(const MfState& state, int user, int item);

class MfScorer final : public Scorer {
 public:
  MfScorer(Matrix user_factors, Matrix item_factors)
      : p_(std::move(user_factors)), q_(std::move(item_factors)) {}
  double score(int user, int item) const override;

 private:
  Matrix p_, q_;
};

class MfModel final : public RankingModel {
 public:
  explicit MfModel(MfState state) : state_(std::move(state)) {}

  MfState& state() { return state_; }
  const MfState& state() const { return state_; }

  std::string kind() const override { return "mf"; }
  std::vector<Matrix*> parameters() override { return state_.parameters(); }
  std::vector<std::string> parameter_names() const override {
    return state_.parameter_names();
  }
  LossNodes build_loss(Tape& tape, const BprBatch& batch, double l2_lambda,
                       std::vector<TapeNode>& leaves) override;
  std::unique_ptr<Scorer> make_scorer() const override;

 private:
  MfState state_;
};

}  // namespace shgcn
