#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dsgrl/csr.hpp"
#include "dsgrl/matrix.hpp"

namespace dsgrl {

// Floor applied to weighted degrees before the inverse square root, so rows
// whose (possibly negative) weights cancel out do not produce NaN.
inline constexpr double kDegreeFloor = 1e-12;

struct Graph {
  index_t n = 0;
  std::shared_ptr<const Csr> adjacency;  // n x n
  Matrix features;                       // n x F
  std::vector<index_t> labels;           // length n, -1 = unlabeled; may be empty
};

struct Split {
  std::vector<index_t> train;
  std::vector<index_t> val;
  std::vector<index_t> test;
};

struct GraphBatch {
  index_t num_graphs = 0;
  Graph merged;                       // block-diagonal adjacency, stacked features
  std::vector<index_t> graph_ids;     // node -> source graph, non-decreasing
  std::vector<index_t> graph_labels;  // one per graph; may be empty
  std::vector<index_t> offsets;       // node-id offset per graph, size num_graphs+1
};

// Self-loop + symmetric degree normalization: with T = A + I and weighted
// degrees d_i = sum_j T_ij, entries become T_ij / sqrt(d_i d_j). Computed as
// (v * rsqrt_i) * rsqrt_j to match the dense differentiable route bitwise.
std::shared_ptr<const Csr> normalize_adjacency(const Csr& a);

// (A + A^T) / 2, entrywise.
Csr symmetrize_mean(const Csr& a);

// Random disjoint partition of [0, n). Each part is sorted ascending.
Split make_splits(index_t n, double train_ratio, double val_ratio,
                  double test_ratio, std::uint64_t seed);

// Stochastic block model with one-hot block features plus Gaussian noise;
// labels are block ids.
Graph generate_sbm(const std::vector<index_t>& block_sizes, double p_in,
                   double p_out, double feature_noise, std::uint64_t seed);

// Per node: degree, then min/max/mean/std of the neighbors' degrees.
// Isolated nodes get all zeros. Std is the population form.
Matrix degree_profile_features(const Graph& g);

// Block-diagonal merge; node ids in graph k are shifted by offsets[k].
GraphBatch batch_graphs(const std::vector<Graph>& graphs,
                        std::vector<index_t> graph_labels = {});

}  // namespace dsgrl
