#pragma once
#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace shgcn {

// Raw input: user-item interactions plus (user, user, item) triplets.
// Users are ids in [0, num_users), items in [0, num_items).
struct Dataset {
  int num_users = 0;
  int num_items = 0;
  std::vector<std::pair<int, int>> interactions;  // (user, item)
  std::vector<std::array<int, 3>> triplets;       // (user1, user2, item)
};

// Throws DataError naming the offending record when an id is out of range,
// a triplet pairs a user with itself, or duplicates exist. Triplets compare
// equal after canonicalizing the user pair to (min, max).
void validate_dataset(const Dataset& d);

// Immutable incidence structure over global node ids: users occupy
// [0, M), items [M, M+N). One hyperedge per input triplet, one social
// relation per distinct canonicalized user pair. All adjacency lists are
// stored sorted in compressed offsets+array form; hyperedge ids follow
// input order and relation ids follow first-encounter order, so the build
// is deterministic. Safe for concurrent reads once built.
class Hypergraph {
 public:
  static Hypergraph build(const Dataset& d);

  int num_users() const { return num_users_; }
  int num_items() const { return num_items_; }
  int node_count() const { return num_users_ + num_items_; }
  int hyperedge_count() const { return static_cast<int>(edge_offsets_.size()) - 1; }
  int relation_count() const { return static_cast<int>(rel_offsets_.size()) - 1; }

  int user_node(int user) const { return user; }
  int item_node(int item) const { return num_users_ + item; }

  // K(e): member node ids of hyperedge e, sorted ascending.
  std::span<const int> nodes_of(int edge) const;
  // Z(w): hyperedges incident to global node w, sorted ascending.
  std::span<const int> edges_of(int node) const;
  // N(i): social neighbors of user i, sorted ascending.
  std::span<const int> neighbors(int user) const;
  // N(i1,i2): hyperedges containing both users; throws ContractError if the
  // pair is not socially connected.
  std::span<const int> shared_edges(int user1, int user2) const;
  // eta(i1,i2): relation id; throws ContractError if not connected.
  int relation_of(int user1, int user2) const;
  bool connected(int user1, int user2) const;
  // Canonical (min,max) user pair of relation t.
  std::pair<int, int> relation_pair(int t) const;
  std::span<const int> relation_edges(int t) const;

  // Plain user-item edges from the interaction set, kept separate from the
  // hyperedge structure.
  const std::vector<std::pair<int, int>>& pair_edges() const { return pair_edges_; }

  // Flat CSR views for the propagation kernels.
  std::span<const int> edge_member_offsets() const { return edge_offsets_; }
  std::span<const int> edge_member_nodes() const { return edge_nodes_; }
  std::span<const int> relation_edge_offsets() const { return rel_offsets_; }
  std::span<const int> relation_edge_ids() const { return rel_edges_; }
  std::span<const int> node_edge_offsets() const { return node_offsets_; }
  std::span<const int> node_edge_ids() const { return node_edges_; }
  // Offsets restricted to user rows [0, M] / item rows [M, M+N]; both index
  // into node_edge_ids().
  std::span<const int> user_edge_offsets() const;
  std::span<const int> item_edge_offsets() const;
  // Neighbor slots per user: offsets (size M+1) into parallel arrays of
  // neighbor user ids and relation ids.
  std::span<const int> neighbor_offsets() const { return nbr_offsets_; }
  std::span<const int> neighbor_users() const { return nbr_users_; }
  std::span<const int> neighbor_relations() const { return nbr_relations_; }

 private:
  Hypergraph() = default;
  static std::uint64_t pair_key(int a, int b);

  int num_users_ = 0;
  int num_items_ = 0;
  std::vector<int> edge_offsets_, edge_nodes_;
  std::vector<int> node_offsets_, node_edges_;
  std::vector<int> nbr_offsets_, nbr_users_, nbr_relations_;
  std::vector<int> rel_offsets_, rel_edges_;
  std::vector<std::pair<int, int>> rel_pairs_;
  std::unordered_map<std::uint64_t, int> relation_index_;
  std::vector<std::pair<int, int>> pair_edges_;
};

}  // namespace shgcn
