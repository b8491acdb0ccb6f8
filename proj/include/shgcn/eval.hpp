#pragma once
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "shgcn/graph.hpp"
#include "shgcn/scoring.hpp"

namespace shgcn {

// Per-user leave-one-out assignment. Every held-out item came from the
// user's interactions; candidate lists are sampled once at split time and
// frozen, so every model ranks identical candidates. Triplets are context,
// not prediction targets, and always stay in train.
struct EvalSplit {
  int num_users = 0;
  int num_items = 0;
  std::vector<std::pair<int, int>> train;
  std::vector<int> val_item;   // per user, -1 if none
  std::vector<int> test_item;  // per user, -1 if none
  // target item first, then num_candidates sampled negatives that the user
  // never interacted with (train, val or test).
  std::vector<std::vector<int>> test_candidates;
  std::vector<std::vector<int>> val_candidates;
};

// Users with >= 3 interactions give one test + one validation item; users
// with exactly 2 give one test item; single-interaction users stay train
// only. Throws DataError when an evaluated user has fewer than
// num_candidates non-interacted items to sample from.
EvalSplit leave_one_out_split(const Dataset& d, std::mt19937_64& rng,
                              int num_candidates = 100);

// 1-based rank of target among candidates, ties broken by ascending item
// id. The target must appear exactly once.
int rank_candidates(const Scorer& scorer, int user, std::span<const int> candidates,
                    int target);

double recall_at_k(int rank, int k);
// Single-relevant-item form: 1/log2(rank+1) inside the cut, 0 outside.
double ndcg_at_k(int rank, int k);

struct MetricReport {
  std::vector<int> k_values;
  std::vector<double> recall;
  std::vector<double> ndcg;
  int users_evaluated = 0;
};

inline const std::vector<int>& default_k_values() {
  static const std::vector<int> ks{1, 3, 5, 10};
  return ks;
}

// Mean metrics over all users holding a test item; throws DataError when no
// user is evaluable.
MetricReport evaluate(const Scorer& scorer, const EvalSplit& split,
                      std::span<const int> k_values);
MetricReport evaluate(const Scorer& scorer, const EvalSplit& split);

// Mean NDCG@10 over validation items; nullopt when the split has none.
std::optional<double> validation_ndcg10(const Scorer& scorer, const EvalSplit& split);

struct SparsityBuckets {
  struct Bucket {
    int min_count = 0;
    int max_count = -1;  // -1 = unbounded
    int population = 0;
    std::optional<MetricReport> metrics;  // empty bucket -> nullopt
  };
  std::vector<Bucket> buckets;
};

// Users grouped by their training-interaction count. Edges must be strictly
// increasing; edges {a,b} produce buckets [0,a), [a,b), [b,inf).
SparsityBuckets sparsity_buckets(const Scorer& scorer, const EvalSplit& split,
                                 std::span<const int> bucket_edges,
                                 std::span<const int> k_values);

}  // namespace shgcn
