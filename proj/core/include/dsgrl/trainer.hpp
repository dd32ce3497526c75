#pragma once

#include <vector>

#include "dsgrl/checkpoint.hpp"
#include "dsgrl/graph.hpp"
#include "dsgrl/objective.hpp"
#include "dsgrl/train_config.hpp"

namespace dsgrl {

struct TrainResult {
  Checkpoint checkpoint;
  Matrix embedding;                    // N x 2d (per graph for batch training)
  std::vector<LossBreakdown> history;  // one entry per optimized epoch
  std::vector<index_t> aprime_nnz;     // per epoch; empty without topology path
};

// Joint optimization of augmenter and encoder parameters. Deterministic per
// (graph, config): identical runs produce identical checkpoints/embeddings.
// `untrained` keeps the seeded initialization (zero optimized epochs).
TrainResult train(const Graph& g, const TrainConfig& cfg);

// Graph-level variant: trains on the block-diagonal merge, embedding rows
// are per-graph readouts.
TrainResult train(const GraphBatch& b, const TrainConfig& cfg);

// Forward-only recomputation of the embedding from a checkpoint.
Matrix embed(const Graph& g, const Checkpoint& ckpt);
Matrix embed(const GraphBatch& b, const Checkpoint& ckpt);

}  // namespace dsgrl
