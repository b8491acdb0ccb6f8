#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "shgcn/graph.hpp"

namespace shgcn {

// Random small-but-valid dataset for gradient and oracle checks: up to
// max_users users, max_items items and max_edges triplets, at least one
// interaction, and every user short of at least one item.
Dataset random_toy_dataset(std::mt19937_64& rng, int max_users, int max_items,
                           int max_edges);

struct GradCheckCase {
  int users = 0, items = 0, edges = 0, dim = 0, layers = 0;
  double max_rel_err = 0.0;
  bool pass = true;
  std::string worst_param;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  double max_rel_err = 0.0;
  bool pass = true;
  double seconds = 0.0;
};

// Tapes the full BPR objective (pairwise terms plus L2 on touched rows) on
// random toy instances and compares every parameter gradient against
// central finite differences.
GradCheckReport run_gradient_check_suite(int instances, std::uint64_t seed,
                                         double step = 1e-5, double tol = 1e-4);

}  // namespace shgcn
