#include "dsgrl/encoder.hpp"

#include <cmath>
#include <string>

#include "dsgrl/error.hpp"

namespace dsgrl {

namespace {

void check_chain(const std::vector<Tensor>& weights, index_t in_width,
                 const char* what) {
  if (weights.empty())
    throw ConfigError(std::string(what) + ": empty weight stack");
  index_t w = in_width;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != w)
      throw ShapeError(std::string(what) + ": layer " + std::to_string(l) +
                       " expects input width " + std::to_string(weights[l].rows()) +
                       ", got " + std::to_string(w));
    w = weights[l].cols();
  }
}

}  // namespace

std::vector<Tensor> init_weight_chain(const std::vector<index_t>& widths,
                                      Rng& rng) {
  if (widths.size() < 2) throw ConfigError("weight chain needs >= 2 widths");
  std::vector<Tensor> weights;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    index_t fan_in = widths[l], fan_out = widths[l + 1];
    if (fan_in < 1 || fan_out < 1)
      throw ConfigError("weight chain widths must be >= 1");
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (index_t i = 0; i < fan_in; ++i)
      for (index_t j = 0; j < fan_out; ++j)
        w(i, j) = rng.uniform(-bound, bound);
    weights.emplace_back(std::move(w), true);
  }
  return weights;
}

Tensor ffn_forward(const Tensor& x, const FfnStack& stack) {
  check_chain(stack.weights, x.cols(), "ffn");
  Tensor h = x;
  for (std::size_t l = 0; l < stack.weights.size(); ++l) {
    h = matmul(h, stack.weights[l]);
    if (l + 1 < stack.weights.size()) h = relu(h);
  }
  return h;
}

Tensor gcn_forward(std::shared_ptr<const Csr> a_hat, const Tensor& x,
                   const GcnStack& stack) {
  if (!a_hat) throw ConfigError("gcn: missing adjacency");
  check_chain(stack.weights, x.cols(), "gcn");
  Tensor h = x;
  for (std::size_t l = 0; l < stack.weights.size(); ++l) {
    h = spmm(a_hat, h);
    h = matmul(h, stack.weights[l]);
    if (l + 1 < stack.weights.size()) h = relu(h);
  }
  return h;
}

Tensor gcn_forward(const Tensor& a_hat, const Tensor& x, const GcnStack& stack) {
  if (a_hat.rows() != a_hat.cols() || a_hat.rows() != x.rows())
    throw ShapeError("gcn: adjacency/feature shape mismatch");
  check_chain(stack.weights, x.cols(), "gcn");
  Tensor h = x;
  for (std::size_t l = 0; l < stack.weights.size(); ++l) {
    h = matmul(a_hat, h);
    h = matmul(h, stack.weights[l]);
    if (l + 1 < stack.weights.size()) h = relu(h);
  }
  return h;
}

Tensor aggregate(const Tensor& z1, const Tensor& z2) {
  return concat_cols(z1, z2);
}

Matrix readout(const Matrix& z, const std::vector<index_t>& graph_ids,
               index_t num_graphs, ReadoutMode mode) {
  if (static_cast<index_t>(graph_ids.size()) != z.rows())
    throw ShapeError("readout: graph_ids length must match row count");
  if (num_graphs <= 0) throw ConsistencyError("readout: no graphs");
  Matrix out(num_graphs, z.cols());
  std::vector<index_t> counts(static_cast<std::size_t>(num_graphs), 0);
  for (index_t i = 0; i < z.rows(); ++i) {
    index_t g = graph_ids[static_cast<std::size_t>(i)];
    if (g < 0 || g >= num_graphs)
      throw RangeError("readout: graph id " + std::to_string(g) +
                       " outside 0.." + std::to_string(num_graphs - 1));
    for (index_t j = 0; j < z.cols(); ++j) out(g, j) += z(i, j);
    ++counts[static_cast<std::size_t>(g)];
  }
  for (index_t g = 0; g < num_graphs; ++g)
    if (counts[static_cast<std::size_t>(g)] == 0)
      throw ConsistencyError("readout: graph " + std::to_string(g) +
                             " has no nodes");
  if (mode == ReadoutMode::Mean)
    for (index_t g = 0; g < num_graphs; ++g) {
      double inv = 1.0 / static_cast<double>(counts[static_cast<std::size_t>(g)]);
      for (index_t j = 0; j < z.cols(); ++j) out(g, j) *= inv;
    }
  return out;
}

}  // namespace dsgrl
