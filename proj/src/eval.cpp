#include "shgcn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "shgcn/errors.hpp"

namespace shgcn {
namespace {

std::vector<int> sample_candidates(std::mt19937_64& rng, int target, int num_items,
                                   const std::unordered_set<int>& interacted,
                                   int num_candidates, int user) {
  const int pool = num_items - static_cast<int>(interacted.size());
  if (pool < num_candidates)
    throw DataError("split: user " + std::to_string(user) + " has only " +
                    std::to_string(pool) + " non-interacted items, need " +
                    std::to_string(num_candidates) + " candidates");
  std::vector<int> cands;
  cands.reserve(num_candidates + 1);
  cands.push_back(target);
  std::unordered_set<int> chosen;
  chosen.reserve(num_candidates * 2);
  std::uniform_int_distribution<int> pick(0, num_items - 1);
  while (static_cast<int>(cands.size()) < num_candidates + 1) {
    const int j = pick(rng);
    if (interacted.count(j) || !chosen.insert(j).second) continue;
    cands.push_back(j);
  }
  return cands;
}

}  // namespace

EvalSplit leave_one_out_split(const Dataset& d, std::mt19937_64& rng,
                              int num_candidates) {
  if (num_candidates < 0) throw ContractError("split: negative candidate count");
  validate_dataset(d);

  EvalSplit s;
  s.num_users = d.num_users;
  s.num_items = d.num_items;
  s.val_item.assign(d.num_users, -1);
  s.test_item.assign(d.num_users, -1);
  s.test_candidates.resize(d.num_users);
  s.val_candidates.resize(d.num_users);

  std::vector<std::vector<int>> items_of(d.num_users);
  for (const auto& [u, j] : d.interactions) items_of[u].push_back(j);

  for (int u = 0; u < d.num_users; ++u) {
    auto& items = items_of[u];
    if (items.size() >= 2) {
      std::uniform_int_distribution<std::size_t> pick_test(0, items.size() - 1);
      const std::size_t ti = pick_test(rng);
      s.test_item[u] = items[ti];
      items.erase(items.begin() + ti);
      if (items.size() >= 2) {
        std::uniform_int_distribution<std::size_t> pick_val(0, items.size() - 1);
        const std::size_t vi = pick_val(rng);
        s.val_item[u] = items[vi];
        items.erase(items.begin() + vi);
      }
    }
    for (int j : items) s.train.emplace_back(u, j);

    if (s.test_item[u] >= 0) {
      std::unordered_set<int> interacted(items.begin(), items.end());
      interacted.insert(s.test_item[u]);
      if (s.val_item[u] >= 0) interacted.insert(s.val_item[u]);
      s.test_candidates[u] = sample_candidates(rng, s.test_item[u], d.num_items,
                                               interacted, num_candidates, u);
      if (s.val_item[u] >= 0)
        s.val_candidates[u] = sample_candidates(rng, s.val_item[u], d.num_items,
                                                interacted, num_candidates, u);
    }
  }
  return s;
}

int rank_candidates(const Scorer& scorer, int user, std::span<const int> candidates,
                    int target) {
  const auto hits = std::count(candidates.begin(), candidates.end(), target);
  if (hits != 1)
    throw ContractError("rank_candidates: target item must appear exactly once, found " +
                        std::to_string(hits));
  const double target_score = scorer.score(user, target);
  int rank = 1;
  for (int c : candidates) {
    if (c == target) continue;
    const double sc = scorer.score(user, c);
    if (sc > target_score || (sc == target_score && c < target)) ++rank;
  }
  return rank;
}

double recall_at_k(int rank, int k) {
  if (rank < 1 || k < 1) throw ContractError("recall_at_k: rank and k must be >= 1");
  return rank <= k ? 1.0 : 0.0;
}

double ndcg_at_k(int rank, int k) {
  if (rank < 1 || k < 1) throw ContractError("ndcg_at_k: rank and k must be >= 1");
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

MetricReport evaluate(const Scorer& scorer, const EvalSplit& split,
                      std::span<const int> k_values) {
  MetricReport r;
  r.k_values.assign(k_values.begin(), k_values.end());
  r.recall.assign(k_values.size(), 0.0);
  r.ndcg.assign(k_values.size(), 0.0);
  for (int u = 0; u < split.num_users; ++u) {
    if (split.test_item[u] < 0) continue;
    const int rank = rank_candidates(scorer, u, split.test_candidates[u],
                                     split.test_item[u]);
    for (std::size_t i = 0; i < k_values.size(); ++i) {
      r.recall[i] += recall_at_k(rank, k_values[i]);
      r.ndcg[i] += ndcg_at_k(rank, k_values[i]);
    }
    ++r.users_evaluated;
  }
  if (r.users_evaluated == 0) throw DataError("evaluate: no users hold a test item");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    r.recall[i] /= r.users_evaluated;
    r.ndcg[i] /= r.users_evaluated;
  }
  return r;
}

MetricReport evaluate(const Scorer& scorer, const EvalSplit& split) {
  return evaluate(scorer, split, default_k_values());
}

std::optional<double> validation_ndcg10(const Scorer& scorer, const EvalSplit& split) {
  double acc = 0.0;
  int n = 0;
  for (int u = 0; u < split.num_users; ++u) {
    if (split.val_item[u] < 0) continue;
    const int rank = rank_candidates(scorer, u, split.val_candidates[u],
                                     split.val_item[u]);
    acc += ndcg_at_k(rank, 10);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return acc / n;
}

SparsityBuckets sparsity_buckets(const Scorer& scorer, const EvalSplit& split,
                                 std::span<const int> bucket_edges,
                                 std::span<const int> k_values) {
  for (std::size_t i = 1; i < bucket_edges.size(); ++i)
    if (bucket_edges[i] <= bucket_edges[i - 1])
      throw ContractError("sparsity_buckets: edges must be strictly increasing");

  std::vector<int> train_count(split.num_users, 0);
  for (const auto& [u, j] : split.train) {
    (void)j;
    ++train_count[u];
  }

  SparsityBuckets out;
  out.buckets.resize(bucket_edges.size() + 1);
  for (std::size_t b = 0; b < out.buckets.size(); ++b) {
    out.buckets[b].min_count = b == 0 ? 0 : bucket_edges[b - 1];
    out.buckets[b].max_count = b < bucket_edges.size() ? bucket_edges[b] : -1;
  }

  auto bucket_of = [&](int count) {
    std::size_t b = 0;
    while (b < bucket_edges.size() && count >= bucket_edges[b]) ++b;
    return b;
  };

  struct Acc {
    std::vector<double> recall, ndcg;
    int n = 0;
  };
  std::vector<Acc> accs(out.buckets.size());
  for (auto& a : accs) {
    a.recall.assign(k_values.size(), 0.0);
    a.ndcg.assign(k_values.size(), 0.0);
  }

  for (int u = 0; u < split.num_users; ++u) {
    if (split.test_item[u] < 0) continue;
    const int rank = rank_candidates(scorer, u, split.test_candidates[u],
                                     split.test_item[u]);
    Acc& a = accs[bucket_of(train_count[u])];
    for (std::size_t i = 0; i < k_values.size(); ++i) {
      a.recall[i] += recall_at_k(rank, k_values[i]);
      a.ndcg[i] += ndcg_at_k(rank, k_values[i]);
    }
    ++a.n;
  }

  for (std::size_t b = 0; b < out.buckets.size(); ++b) {
    out.buckets[b].population = accs[b].n;
    if (accs[b].n == 0) continue;
    MetricReport r;
    r.k_values.assign(k_values.begin(), k_values.end());
    r.users_evaluated = accs[b].n;
    for (std::size_t i = 0; i < k_values.size(); ++i) {
      r.recall.push_back(accs[b].recall[i] / accs[b].n);
      r.ndcg.push_back(accs[b].ndcg[i] / accs[b].n);
    }
    out.buckets[b].metrics = std::move(r);
  }
  return out;
}

}  // namespace shgcn
