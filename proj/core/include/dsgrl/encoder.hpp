#pragma once

#include <memory>
#include <vector>

#include "dsgrl/csr.hpp"
#include "dsgrl/ops.hpp"
#include "dsgrl/rng.hpp"
#include "dsgrl/tensor.hpp"

namespace dsgrl {

// Weight chains with ReLU between layers and a linear final layer. The final
// layer is linear so the variance/covariance penalties can push latent
// dimensions both positive and negative. No bias terms anywhere.
struct FfnStack {
  std::vector<Tensor> weights;
};

struct GcnStack {
  std::vector<Tensor> weights;
};

// Glorot-uniform initialization of a width chain [w0, w1, ..., wL]:
// one (w_{l-1} x w_l) tensor per layer, entries in +-sqrt(6/(fan_in+fan_out)).
std::vector<Tensor> init_weight_chain(const std::vector<index_t>& widths,
                                      Rng& rng);

// Dense layer stack: x W1 -> relu -> ... -> x W_L (linear last).
Tensor ffn_forward(const Tensor& x, const FfnStack& stack);

// Per layer: propagate (adjacency times x), transform (times W), activate.
Tensor gcn_forward(std::shared_ptr<const Csr> a_hat, const Tensor& x,
                   const GcnStack& stack);

// Same with a dense adjacency on the tape, so gradients can flow into it.
Tensor gcn_forward(const Tensor& a_hat, const Tensor& x, const GcnStack& stack);

// Columnwise concatenation [z1 || z2].
Tensor aggregate(const Tensor& z1, const Tensor& z2);

enum class ReadoutMode { Mean, Sum };

// Per-graph pooling of node embeddings; row g of the result aggregates the
// nodes with graph_ids[i] == g. Inference-only (operates on values).
Matrix readout(const Matrix& z, const std::vector<index_t>& graph_ids,
               index_t num_graphs, ReadoutMode mode = ReadoutMode::Mean);

}  // namespace dsgrl
