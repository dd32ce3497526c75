#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <variant>

#include "dsgrl/encoder.hpp"
#include "dsgrl/graph.hpp"

namespace dsgrl {

// Two parallel FFNs producing the two feature views. Identical layer shapes
// are required so their weights can be stacked by the model regularizer.
struct FeatureAugmenter {
  FfnStack f1;
  FfnStack f2;
};

// GNN whose output H defines the high-order network via dot-product
// similarity thresholding.
struct TopologyAugmenter {
  GcnStack gnn;
};

enum class Mode { Feature, Topology, Combined };

// One encoder input: an adjacency (shared CSR for the original graph, dense
// tape tensor for the differentiable high-order network) plus features.
struct View {
  std::variant<std::shared_ptr<const Csr>, Tensor> adjacency;
  Tensor features;
};

struct ViewPair {
  View v1;
  View v2;
  // Stored entry count of the thresholded high-order network, -1 when the
  // mode has none.
  index_t aprime_nnz = -1;
};

// (f1(X), f2(X)). No stochastic noise: the views differ only through the
// learned parameters.
std::pair<Tensor, Tensor> augment_features(const Tensor& x,
                                           const FeatureAugmenter& aug);

Tensor high_order_features(std::shared_ptr<const Csr> a_hat, const Tensor& x,
                           const TopologyAugmenter& aug);

double similarity(std::span<const double> a, std::span<const double> b);

// Thresholded similarity network: entry (i,j) keeps h_i . h_j when it
// strictly exceeds the mean of row i's similarities over all nodes
// (self included); ties and everything below drop to zero.
Csr build_high_order_network(const Matrix& h);

// Same rule on the tape: S = H H^T masked by the (constant) selection
// pattern, so gradients flow through kept values only.
Tensor dense_high_order_adjacency(const Tensor& h);

// Symmetrize to (A + A^T)/2, add self-loops, normalize by inverse sqrt of
// the floored weighted degrees. Keeps everything on the tape.
Tensor normalize_dense_adjacency(const Tensor& a);

// Sparse mirror of the dense pipeline (inference/diagnostics path).
std::shared_ptr<const Csr> normalize_high_order(const Csr& aprime);

// Builds both encoder inputs for the given mode:
//   feature:  ((A_hat, f1(X)), (A_hat, f2(X)))
//   topology: ((A_hat, X), (A_hat', X))   [identity augmentor on view 1]
//   combined: ((A_hat, f1(X)), (A_hat', f2(X)))
// `cached_aprime` short-circuits the topology branch with a previously
// computed normalized dense adjacency (treated as constant).
ViewPair make_views(const std::shared_ptr<const Csr>& a_hat, const Tensor& x,
                    Mode mode, const FeatureAugmenter* fa,
                    const TopologyAugmenter* ta,
                    const Matrix* cached_aprime = nullptr);

}  // namespace dsgrl
