#pragma once
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "shgcn/graph.hpp"

namespace shgcn {

// Planted-structure generator: items are partitioned into topics, each
// friend pair shares exactly one topic, triplet items come from the pair's
// shared topic (up to noise) and a user's interactions come from the topics
// they share with friends. The triplet context is therefore predictive of
// held-out items, which a model without triplet access cannot exploit.
struct SynthConfig {
  int num_users = 500;
  int num_items = 200;
  int num_topics = 8;
  double friend_pairs_per_user = 2.0;  // pair density; total pairs ~ M*density/2
  int interactions_per_user = 6;
  int triplets_per_pair = 3;
  double noise_rate = 0.1;  // probability a draw ignores the planted topic
  std::uint64_t seed = 1;
};

struct SynthData {
  Dataset dataset;
  std::vector<int> item_topic;                    // per item
  std::vector<std::vector<int>> user_topics;      // shared topics per user
  std::vector<std::pair<int, int>> friend_pairs;  // canonical (min,max)
  std::vector<int> pair_topic;                    // per friend pair
};

// Throws DataError on infeasible configs (more topics than items, densities
// that cannot be satisfied, noise outside [0,1]).
SynthData generate(const SynthConfig& cfg);

}  // namespace shgcn
