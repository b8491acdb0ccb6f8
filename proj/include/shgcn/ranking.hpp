#pragma once
#include <memory>
#include <string>
#include <vector>

#include "shgcn/matrix.hpp"
#include "shgcn/scoring.hpp"
#include "shgcn/tape.hpp"

namespace shgcn {

// One entry per (user, positive, negative) pair.
struct BprBatch {
  std::vector<int> users;
  std::vector<int> pos_items;
  std::vector<int> neg_items;
  std::size_t size() const { return users.size(); }
};

// Nodes handed back from a loss build: the full objective plus the plain
// sum of pairwise terms so epoch stats can report a mean per-pair loss.
struct LossNodes {
  TapeNode total;
  TapeNode pair_sum;
  int num_pairs = 0;
};

// What the trainer needs from a model: a stable parameter list for the
// optimizer, a freshly taped BPR loss per batch, and scorer snapshots for
// evaluation.
class RankingModel {
 public:
  virtual ~RankingModel() = default;
  virtual std::string kind() const = 0;
  virtual std::vector<Matrix*> parameters() = 0;
  virtual std::vector<std::string> parameter_names() const = 0;
  // Leaves are appended in parameters() order.
  virtual LossNodes build_loss(Tape& tape, const BprBatch& batch, double l2_lambda,
                               std::vector<TapeNode>& leaves) = 0;
  virtual std::unique_ptr<Scorer> make_scorer() const = 0;
};

}  // namespace shgcn
