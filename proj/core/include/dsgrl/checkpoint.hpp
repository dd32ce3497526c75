#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dsgrl/matrix.hpp"
#include "dsgrl/objective.hpp"
#include "dsgrl/train_config.hpp"

namespace dsgrl {

// Trained model state. Tensor names follow "<role>.<layer>" with roles
// encoder, f1, f2 and topo.
struct Checkpoint {
  TrainConfig config;
  index_t epoch = 0;
  LossBreakdown final_loss;  // total_tensor left empty
  std::vector<std::pair<std::string, Matrix>> tensors;
};

// Binary container: magic `DSGC`, u32 format version, u64 length-prefixed
// JSON header {config, epoch, final_loss}, u64 tensor count, then per tensor
// u64 name length + name bytes, u64 rows, u64 cols, row-major f64 payload.
// All integers and floats little-endian.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dsgrl
