#include "dsgrl/augment.hpp"

#include <tuple>

#include "dsgrl/error.hpp"

namespace dsgrl {

namespace {

// Selection pattern for the thresholded similarity network: keep (i,j) when
// s_ij strictly exceeds the mean of row i.
Matrix threshold_mask(const Matrix& s, index_t* nnz_out) {
  const index_t n = s.rows();
  Matrix m(n, n);
  index_t nnz = 0;
  for (index_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (index_t j = 0; j < n; ++j) sum += s(i, j);
    double mean = sum / static_cast<double>(n);
    for (index_t j = 0; j < n; ++j)
      if (s(i, j) > mean) {
        m(i, j) = 1.0;
        ++nnz;
      }
  }
  if (nnz_out) *nnz_out = nnz;
  return m;
}

std::pair<Tensor, index_t> topology_adjacency(
    const std::shared_ptr<const Csr>& a_hat, const Tensor& x,
    const TopologyAugmenter& ta, const Matrix* cached) {
  if (cached) {
    index_t nnz = 0;
    for (index_t i = 0; i < cached->size(); ++i)
      if (cached->data()[i] != 0.0) ++nnz;
    return {Tensor(*cached), nnz};
  }
  Tensor h = high_order_features(a_hat, x, ta);
  index_t nnz = 0;
  Tensor s = matmul(h, transpose(h));
  Matrix m = threshold_mask(s.value(), &nnz);
  Tensor aprime = mask(s, m);
  return {normalize_dense_adjacency(aprime), nnz};
}

}  // namespace

std::pair<Tensor, Tensor> augment_features(const Tensor& x,
                                           const FeatureAugmenter& aug) {
  if (aug.f1.weights.size() != aug.f2.weights.size())
    throw ShapeError("feature augmenter: stacks have different depths");
  for (std::size_t l = 0; l < aug.f1.weights.size(); ++l)
    if (!aug.f1.weights[l].value().same_shape(aug.f2.weights[l].value()))
      throw ShapeError("feature augmenter: layer " + std::to_string(l) +
                       " shapes differ between the two stacks");
  return {ffn_forward(x, aug.f1), ffn_forward(x, aug.f2)};
}

Tensor high_order_features(std::shared_ptr<const Csr> a_hat, const Tensor& x,
                           const TopologyAugmenter& aug) {
  return gcn_forward(std::move(a_hat), x, aug.gnn);
}

double similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("similarity: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Csr build_high_order_network(const Matrix& h) {
  // The dense product kernel is reused on purpose: the differentiable route
  // computes the same S, so values agree bitwise between the two paths.
  Matrix s = matmul(h, transposed(h));
  const index_t n = h.rows();
  std::vector<std::tuple<index_t, index_t, double>> entries;
  for (index_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (index_t j = 0; j < n; ++j) sum += s(i, j);
    double mean = sum / static_cast<double>(n);
    for (index_t j = 0; j < n; ++j)
      if (s(i, j) > mean) entries.emplace_back(i, j, s(i, j));
  }
  return csr_from_coo(n, n, std::move(entries), Duplicates::Error);
}

Tensor dense_high_order_adjacency(const Tensor& h) {
  Tensor s = matmul(h, transpose(h));
  Matrix m = threshold_mask(s.value(), nullptr);
  return mask(s, m);
}

Tensor normalize_dense_adjacency(const Tensor& a) {
  if (a.rows() != a.cols())
    throw ShapeError("normalize_dense_adjacency: matrix not square");
  Tensor sym = scale(add(a, transpose(a)), 0.5);
  Tensor with_loops = add(sym, Tensor(Matrix::identity(a.rows())));
  Tensor deg = max_with(row_sum(with_loops), kDegreeFloor);
  Tensor dinv = reciprocal(sqrt(deg));
  return scale_cols(scale_rows(with_loops, dinv), dinv);
}

std::shared_ptr<const Csr> normalize_high_order(const Csr& aprime) {
  return normalize_adjacency(symmetrize_mean(aprime));
}

ViewPair make_views(const std::shared_ptr<const Csr>& a_hat, const Tensor& x,
                    Mode mode, const FeatureAugmenter* fa,
                    const TopologyAugmenter* ta, const Matrix* cached_aprime) {
  if (!a_hat) throw ConfigError("make_views: missing normalized adjacency");
  switch (mode) {
    case Mode::Feature: {
      if (!fa) throw ConfigError("feature mode needs the feature augmenter");
      auto [x1, x2] = augment_features(x, *fa);
      return {View{a_hat, x1}, View{a_hat, x2}, -1};
    }
    case Mode::Topology: {
      if (!ta) throw ConfigError("topology mode needs the topology augmenter");
      auto [ap, nnz] = topology_adjacency(a_hat, x, *ta, cached_aprime);
      return {View{a_hat, x}, View{ap, x}, nnz};
    }
    case Mode::Combined: {
      if (!fa || !ta) throw ConfigError("combined mode needs both augmenters");
      auto [x1, x2] = augment_features(x, *fa);
      auto [ap, nnz] = topology_adjacency(a_hat, x, *ta, cached_aprime);
      return {View{a_hat, x1}, View{ap, x2}, nnz};
    }
  }
  throw ConfigError("make_views: unknown mode");
}

}  // namespace dsgrl
