#include "shgcn/graph.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "shgcn/errors.hpp"

namespace shgcn {
namespace {

std::string record_str(const std::pair<int, int>& p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}
std::string record_str(const std::array<int, 3>& t) {
  return "(" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," +
         std::to_string(t[2]) + ")";
}

void append_listing(std::string& msg, std::size_t shown, std::size_t total) {
  if (total > shown)
    msg += " and " + std::to_string(total - shown) + " more";
}

}  // namespace

void validate_dataset(const Dataset& d) {
  if (d.num_users < 0 || d.num_items < 0)
    throw DataError("dataset: negative user/item count");

  for (const auto& p : d.interactions) {
    if (p.first < 0 || p.first >= d.num_users)
      throw DataError("dataset: interaction " + record_str(p) +
                      " has user id outside [0," + std::to_string(d.num_users) + ")");
    if (p.second < 0 || p.second >= d.num_items)
      throw DataError("dataset: interaction " + record_str(p) +
                      " has item id outside [0," + std::to_string(d.num_items) + ")");
  }
  for (const auto& t : d.triplets) {
    if (t[0] < 0 || t[0] >= d.num_users || t[1] < 0 || t[1] >= d.num_users)
      throw DataError("dataset: triplet " + record_str(t) +
                      " has user id outside [0," + std::to_string(d.num_users) + ")");
    if (t[2] < 0 || t[2] >= d.num_items)
      throw DataError("dataset: triplet " + record_str(t) +
                      " has item id outside [0," + std::to_string(d.num_items) + ")");
    if (t[0] == t[1])
      throw DataError("dataset: triplet " + record_str(t) + " pairs a user with itself");
  }

  {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(d.interactions.size() * 2);
    std::vector<std::pair<int, int>> dups;
    for (const auto& p : d.interactions) {
      std::uint64_t key = (static_cast<std::uint64_t>(p.first) << 32) |
                          static_cast<std::uint32_t>(p.second);
      if (!seen.insert(key).second) dups.push_back(p);
    }
    if (!dups.empty()) {
      std::string msg = "dataset: duplicate interactions:";
      for (std::size_t i = 0; i < dups.size() && i < 5; ++i) msg += " " + record_str(dups[i]);
      append_listing(msg, 5, dups.size());
      throw DataError(msg);
    }
  }
  {
    struct Key {
      int a, b, j;
      bool operator==(const Key&) const = default;
    };
    struct KeyHash {
      std::size_t operator()(const Key& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (int v : {k.a, k.b, k.j}) {
          h ^= static_cast<std::uint64_t>(v);
          h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
      }
    };
    std::unordered_set<Key, KeyHash> seen;
    seen.reserve(d.triplets.size() * 2);
    std::vector<std::array<int, 3>> dups;
    for (const auto& t : d.triplets) {
      Key k{std::min(t[0], t[1]), std::max(t[0], t[1]), t[2]};
      if (!seen.insert(k).second) dups.push_back(t);
    }
    if (!dups.empty()) {
      std::string msg = "dataset: duplicate triplets (user pair canonicalized):";
      for (std::size_t i = 0; i < dups.size() && i < 5; ++i) msg += " " + record_str(dups[i]);
      append_listing(msg, 5, dups.size());
      throw DataError(msg);
    }
  }
}

std::uint64_t Hypergraph::pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

Hypergraph Hypergraph::build(const Dataset& d) {
  validate_dataset(d);

  Hypergraph g;
  g.num_users_ = d.num_users;
  g.num_items_ = d.num_items;
  g.pair_edges_ = d.interactions;

  const int num_edges = static_cast<int>(d.triplets.size());
  const int num_nodes = d.num_users + d.num_items;

  // Hyperedge members, sorted within each edge. Edge ids follow input order.
  g.edge_offsets_.resize(num_edges + 1);
  g.edge_nodes_.resize(static_cast<std::size_t>(num_edges) * 3);
  for (int e = 0; e < num_edges; ++e) {
    const auto& t = d.triplets[e];
    std::array<int, 3> members{t[0], t[1], g.num_users_ + t[2]};
    std::sort(members.begin(), members.end());
    g.edge_offsets_[e] = 3 * e;
    std::copy(members.begin(), members.end(), g.edge_nodes_.begin() + 3 * e);
  }
  g.edge_offsets_[num_edges] = 3 * num_edges;

  // Relations: dense ids in first-encounter order over the triplet list.
  g.relation_index_.reserve(static_cast<std::size_t>(num_edges) * 2);
  std::vector<int> edge_relation(num_edges);
  for (int e = 0; e < num_edges; ++e) {
    const auto& t = d.triplets[e];
    const std::uint64_t key = pair_key(t[0], t[1]);
    auto [it, inserted] = g.relation_index_.emplace(key, static_cast<int>(g.rel_pairs_.size()));
    if (inserted) g.rel_pairs_.emplace_back(std::min(t[0], t[1]), std::max(t[0], t[1]));
    edge_relation[e] = it->second;
  }
  const int num_rel = static_cast<int>(g.rel_pairs_.size());

  // Node -> hyperedges (counting sort keeps lists sorted by edge id).
  g.node_offsets_.assign(num_nodes + 1, 0);
  for (int w : g.edge_nodes_) ++g.node_offsets_[w + 1];
  for (int w = 0; w < num_nodes; ++w) g.node_offsets_[w + 1] += g.node_offsets_[w];
  g.node_edges_.resize(g.edge_nodes_.size());
  {
    std::vector<int> cursor(g.node_offsets_.begin(), g.node_offsets_.end() - 1);
    for (int e = 0; e < num_edges; ++e)
      for (int k = g.edge_offsets_[e]; k < g.edge_offsets_[e + 1]; ++k)
        g.node_edges_[cursor[g.edge_nodes_[k]]++] = e;
  }

  // Relation -> hyperedges.
  g.rel_offsets_.assign(num_rel + 1, 0);
  for (int e = 0; e < num_edges; ++e) ++g.rel_offsets_[edge_relation[e] + 1];
  for (int t = 0; t < num_rel; ++t) g.rel_offsets_[t + 1] += g.rel_offsets_[t];
  g.rel_edges_.resize(num_edges);
  {
    std::vector<int> cursor(g.rel_offsets_.begin(), g.rel_offsets_.end() - 1);
    for (int e = 0; e < num_edges; ++e) g.rel_edges_[cursor[edge_relation[e]]++] = e;
  }

  // Social neighbor slots per user, sorted by neighbor id, with the
  // relation id carried alongside.
  std::vector<std::vector<std::pair<int, int>>> nbr(d.num_users);
  for (int t = 0; t < num_rel; ++t) {
    auto [a, b] = g.rel_pairs_[t];
    nbr[a].emplace_back(b, t);
    nbr[b].emplace_back(a, t);
  }
  g.nbr_offsets_.assign(d.num_users + 1, 0);
  for (int i = 0; i < d.num_users; ++i) {
    std::sort(nbr[i].begin(), nbr[i].end());
    g.nbr_offsets_[i + 1] = g.nbr_offsets_[i] + static_cast<int>(nbr[i].size());
  }
  g.nbr_users_.resize(g.nbr_offsets_.back());
  g.nbr_relations_.resize(g.nbr_offsets_.back());
  for (int i = 0; i < d.num_users; ++i) {
    int pos = g.nbr_offsets_[i];
    for (auto [w, t] : nbr[i]) {
      g.nbr_users_[pos] = w;
      g.nbr_relations_[pos] = t;
      ++pos;
    }
  }

  return g;
}

std::span<const int> Hypergraph::nodes_of(int edge) const {
  if (edge < 0 || edge >= hyperedge_count())
    throw ContractError("nodes_of: hyperedge id " + std::to_string(edge) + " out of range");
  return {edge_nodes_.data() + edge_offsets_[edge],
          static_cast<std::size_t>(edge_offsets_[edge + 1] - edge_offsets_[edge])};
}

std::span<const int> Hypergraph::edges_of(int node) const {
  if (node < 0 || node >= node_count())
    throw ContractError("edges_of: node id " + std::to_string(node) + " out of range");
  return {node_edges_.data() + node_offsets_[node],
          static_cast<std::size_t>(node_offsets_[node + 1] - node_offsets_[node])};
}

std::span<const int> Hypergraph::neighbors(int user) const {
  if (user < 0 || user >= num_users_)
    throw ContractError("neighbors: user id " + std::to_string(user) + " out of range");
  return {nbr_users_.data() + nbr_offsets_[user],
          static_cast<std::size_t>(nbr_offsets_[user + 1] - nbr_offsets_[user])};
}

bool Hypergraph::connected(int user1, int user2) const {
  if (user1 < 0 || user1 >= num_users_ || user2 < 0 || user2 >= num_users_)
    throw ContractError("connected: user id out of range");
  return relation_index_.count(pair_key(user1, user2)) > 0;
}

int Hypergraph::relation_of(int user1, int user2) const {
  if (user1 < 0 || user1 >= num_users_ || user2 < 0 || user2 >= num_users_)
    throw ContractError("relation_of: user id out of range");
  auto it = relation_index_.find(pair_key(user1, user2));
  if (it == relation_index_.end())
    throw ContractError("relation_of: users " + std::to_string(user1) + " and " +
                        std::to_string(user2) + " are not socially connected");
  return it->second;
}

std::span<const int> Hypergraph::shared_edges(int user1, int user2) const {
  return relation_edges(relation_of(user1, user2));
}

std::pair<int, int> Hypergraph::relation_pair(int t) const {
  if (t < 0 || t >= relation_count())
    throw ContractError("relation_pair: relation id " + std::to_string(t) + " out of range");
  return rel_pairs_[t];
}

std::span<const int> Hypergraph::relation_edges(int t) const {
  if (t < 0 || t >= relation_count())
    throw ContractError("relation_edges: relation id " + std::to_string(t) + " out of range");
  return {rel_edges_.data() + rel_offsets_[t],
          static_cast<std::size_t>(rel_offsets_[t + 1] - rel_offsets_[t])};
}

std::span<const int> Hypergraph::user_edge_offsets() const {
  return {node_offsets_.data(), static_cast<std::size_t>(num_users_) + 1};
}

std::span<const int> Hypergraph::item_edge_offsets() const {
  return {node_offsets_.data() + num_users_, static_cast<std::size_t>(num_items_) + 1};
}

}  // namespace shgcn
