#include "shgcn/synth.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

#include "shgcn/errors.hpp"

namespace shgcn {
namespace {

constexpr int kMaxRejects = 10000;

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

SynthData generate(const SynthConfig& cfg) {
  if (cfg.num_users < 2 || cfg.num_items < 1 || cfg.num_topics < 1)
    throw DataError("synth: need at least 2 users, 1 item, 1 topic");
  if (cfg.num_topics > cfg.num_items)
    throw DataError("synth: more topics than items");
  if (cfg.noise_rate < 0.0 || cfg.noise_rate > 1.0)
    throw DataError("synth: noise_rate outside [0,1]");
  if (cfg.friend_pairs_per_user < 0.0 || cfg.interactions_per_user < 0 ||
      cfg.triplets_per_pair < 0)
    throw DataError("synth: negative density");
  if (cfg.interactions_per_user > cfg.num_items)
    throw DataError("synth: more interactions per user than items");

  std::mt19937_64 rng(cfg.seed);
  SynthData out;
  out.dataset.num_users = cfg.num_users;
  out.dataset.num_items = cfg.num_items;

  // Topics round-robin over items so every topic is populated.
  out.item_topic.resize(cfg.num_items);
  std::vector<std::vector<int>> topic_items(cfg.num_topics);
  for (int j = 0; j < cfg.num_items; ++j) {
    out.item_topic[j] = j % cfg.num_topics;
    topic_items[j % cfg.num_topics].push_back(j);
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_user(0, cfg.num_users - 1);
  std::uniform_int_distribution<int> any_item(0, cfg.num_items - 1);
  std::uniform_int_distribution<int> any_topic(0, cfg.num_topics - 1);

  // Distinct friend pairs, one shared topic each.
  const long long want_pairs = std::llround(cfg.num_users * cfg.friend_pairs_per_user / 2.0);
  const long long max_pairs =
      static_cast<long long>(cfg.num_users) * (cfg.num_users - 1) / 2;
  if (want_pairs > max_pairs) throw DataError("synth: friend pair density infeasible");
  std::unordered_set<std::uint64_t> pair_seen;
  int rejects = 0;
  while (static_cast<long long>(out.friend_pairs.size()) < want_pairs) {
    int a = any_user(rng), b = any_user(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!pair_seen.insert(pair_key(a, b)).second) {
      if (++rejects > kMaxRejects) throw DataError("synth: friend pair sampling stalled");
      continue;
    }
    out.friend_pairs.emplace_back(a, b);
    out.pair_topic.push_back(any_topic(rng));
  }

  out.user_topics.resize(cfg.num_users);
  for (std::size_t p = 0; p < out.friend_pairs.size(); ++p) {
    out.user_topics[out.friend_pairs[p].first].push_back(out.pair_topic[p]);
    out.user_topics[out.friend_pairs[p].second].push_back(out.pair_topic[p]);
  }
  // Friendless users fall back to a private topic.
  std::vector<int> fallback_topic(cfg.num_users);
  for (int u = 0; u < cfg.num_users; ++u) fallback_topic[u] = any_topic(rng);

  // Triplets: item from the pair's shared topic unless a noise draw hits.
  std::unordered_set<std::uint64_t> triplet_seen;
  auto triplet_key = [&](int p, int j) {
    return static_cast<std::uint64_t>(p) * (cfg.num_items + 1ull) + j;
  };
  for (std::size_t p = 0; p < out.friend_pairs.size(); ++p) {
    rejects = 0;
    int made = 0;
    while (made < cfg.triplets_per_pair) {
      int j;
      if (unit(rng) < cfg.noise_rate) {
        j = any_item(rng);
      } else {
        const auto& pool = topic_items[out.pair_topic[p]];
        j = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      }
      if (!triplet_seen.insert(triplet_key(static_cast<int>(p), j)).second) {
        if (++rejects > kMaxRejects)
          throw DataError("synth: triplet sampling stalled (topic too small?)");
        continue;
      }
      out.dataset.triplets.push_back(
          {out.friend_pairs[p].first, out.friend_pairs[p].second, j});
      ++made;
    }
  }

  // Interactions from the user's shared-topic mix.
  std::unordered_set<std::uint64_t> inter_seen;
  for (int u = 0; u < cfg.num_users; ++u) {
    rejects = 0;
    int made = 0;
    while (made < cfg.interactions_per_user) {
      int j;
      if (unit(rng) < cfg.noise_rate) {
        j = any_item(rng);
      } else {
        const int t = out.user_topics[u].empty()
                          ? fallback_topic[u]
                          : out.user_topics[u][std::uniform_int_distribution<std::size_t>(
                                0, out.user_topics[u].size() - 1)(rng)];
        const auto& pool = topic_items[t];
        j = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      }
      if (!inter_seen.insert(pair_key(u, j)).second) {
        if (++rejects > kMaxRejects)
          throw DataError("synth: interaction sampling stalled");
        continue;
      }
      out.dataset.interactions.emplace_back(u, j);
      ++made;
    }
  }

  validate_dataset(out.dataset);
  return out;
}

}  // namespace shgcn
