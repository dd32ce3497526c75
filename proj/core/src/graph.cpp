#include "dsgrl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "dsgrl/error.hpp"
#include "dsgrl/rng.hpp"

namespace dsgrl {

std::shared_ptr<const Csr> normalize_adjacency(const Csr& a) {
  if (a.rows != a.cols) throw ShapeError("normalize_adjacency: matrix not square");
  const index_t n = a.rows;

  // T = A + I, preserving any existing diagonal weight.
  std::vector<std::tuple<index_t, index_t, double>> entries;
  entries.reserve(static_cast<std::size_t>(a.nnz() + n));
  for (index_t i = 0; i < n; ++i) {
    bool diag_seen = false;
    for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      double v = a.vals[p];
      if (a.col_idx[p] == i) {
        v += 1.0;
        diag_seen = true;
      }
      entries.emplace_back(i, a.col_idx[p], v);
    }
    if (!diag_seen) entries.emplace_back(i, i, 1.0);
  }
  Csr t = csr_from_coo(n, n, std::move(entries), Duplicates::Error);

  // Weighted degrees summed in ascending-column order; this matches a dense
  // left-to-right row sum because the skipped entries are exact zeros.
  std::vector<double> rsqrt(static_cast<std::size_t>(n), 0.0);
  for (index_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (index_t p = t.row_ptr[i]; p < t.row_ptr[i + 1]; ++p) d += t.vals[p];
    if (d < kDegreeFloor) d = kDegreeFloor;
    rsqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(d);
  }
  for (index_t i = 0; i < n; ++i)
    for (index_t p = t.row_ptr[i]; p < t.row_ptr[i + 1]; ++p)
      t.vals[p] = (t.vals[p] * rsqrt[static_cast<std::size_t>(i)]) *
                  rsqrt[static_cast<std::size_t>(t.col_idx[p])];
  return std::make_shared<const Csr>(std::move(t));
}

Csr symmetrize_mean(const Csr& a) {
  if (a.rows != a.cols) throw ShapeError("symmetrize_mean: matrix not square");
  // Dense lookup of the transpose value keeps the (v_ij + v_ji) * 0.5 form
  // identical to the dense route.
  Csr at = a.transposed();
  std::vector<std::tuple<index_t, index_t, double>> entries;
  for (index_t i = 0; i < a.rows; ++i) {
    index_t p = a.row_ptr[i], pe = a.row_ptr[i + 1];
    index_t q = at.row_ptr[i], qe = at.row_ptr[i + 1];
    while (p < pe || q < qe) {
      index_t cp = p < pe ? a.col_idx[p] : a.cols;
      index_t cq = q < qe ? at.col_idx[q] : a.cols;
      if (cp == cq) {
        entries.emplace_back(i, cp, (a.vals[p] + at.vals[q]) * 0.5);
        ++p, ++q;
      } else if (cp < cq) {
        entries.emplace_back(i, cp, (a.vals[p] + 0.0) * 0.5);
        ++p;
      } else {
        entries.emplace_back(i, cq, (0.0 + at.vals[q]) * 0.5);
        ++q;
      }
    }
  }
  return csr_from_coo(a.rows, a.cols, std::move(entries), Duplicates::Error);
}

Split make_splits(index_t n, double train_ratio, double val_ratio,
                  double test_ratio, std::uint64_t seed) {
  if (n <= 0) throw ConfigError("make_splits: node count must be positive");
  if (train_ratio <= 0.0 || val_ratio <= 0.0 || test_ratio <= 0.0)
    throw ConfigError("make_splits: ratios must be positive");
  if (train_ratio + val_ratio + test_ratio > 1.0 + 1e-9)
    throw ConfigError("make_splits: ratios sum above 1");

  index_t n_train = std::llround(train_ratio * static_cast<double>(n));
  index_t n_val = std::llround(val_ratio * static_cast<double>(n));
  index_t n_test = std::llround(test_ratio * static_cast<double>(n));
  if (n_train + n_val > n) throw ConfigError("make_splits: train+val exceed n");
  n_test = std::min(n_test, n - n_train - n_val);
  if (n_train <= 0 || n_val <= 0 || n_test <= 0)
    throw ConfigError("make_splits: a split is empty after rounding");

  std::vector<index_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), index_t{0});
  Rng rng(seed);
  rng.shuffle(perm);

  Split s;
  s.train.assign(perm.begin(), perm.begin() + n_train);
  s.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  s.test.assign(perm.begin() + n_train + n_val,
                perm.begin() + n_train + n_val + n_test);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Graph generate_sbm(const std::vector<index_t>& block_sizes, double p_in,
                   double p_out, double feature_noise, std::uint64_t seed) {
  if (block_sizes.empty()) throw ConfigError("sbm: no blocks given");
  for (index_t b : block_sizes)
    if (b <= 0) throw ConfigError("sbm: empty block");
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0))
    throw ConfigError("sbm: need 0 <= p_out < p_in <= 1");
  if (feature_noise < 0.0) throw ConfigError("sbm: negative feature noise");

  const index_t k = static_cast<index_t>(block_sizes.size());
  index_t n = 0;
  std::vector<index_t> block_of;
  for (index_t b = 0; b < k; ++b) {
    n += block_sizes[static_cast<std::size_t>(b)];
    for (index_t i = 0; i < block_sizes[static_cast<std::size_t>(b)]; ++i)
      block_of.push_back(b);
  }

  Rng rng(seed);
  std::vector<std::tuple<index_t, index_t, double>> entries;
  for (index_t i = 0; i < n; ++i) {
    for (index_t j = i + 1; j < n; ++j) {
      double p = block_of[static_cast<std::size_t>(i)] ==
                         block_of[static_cast<std::size_t>(j)]
                     ? p_in
                     : p_out;
      if (rng.bernoulli(p)) {
        entries.emplace_back(i, j, 1.0);
        entries.emplace_back(j, i, 1.0);
      }
    }
  }

  Matrix x(n, k);
  for (index_t i = 0; i < n; ++i)
    x(i, block_of[static_cast<std::size_t>(i)]) = 1.0;
  if (feature_noise > 0.0)
    for (index_t i = 0; i < n; ++i)
      for (index_t j = 0; j < k; ++j)
        x(i, j) += feature_noise * rng.normal();

  Graph g;
  g.n = n;
  g.adjacency = std::make_shared<const Csr>(
      csr_from_coo(n, n, std::move(entries), Duplicates::Error));
  g.features = std::move(x);
  g.labels = std::move(block_of);
  return g;
}

Matrix degree_profile_features(const Graph& g) {
  if (!g.adjacency) throw ConsistencyError("degree profile: graph has no adjacency");
  const Csr& a = *g.adjacency;
  std::vector<index_t> degree(static_cast<std::size_t>(g.n));
  for (index_t i = 0; i < g.n; ++i)
    degree[static_cast<std::size_t>(i)] = a.row_ptr[i + 1] - a.row_ptr[i];

  Matrix f(g.n, 5);
  for (index_t i = 0; i < g.n; ++i) {
    index_t deg = degree[static_cast<std::size_t>(i)];
    if (deg == 0) continue;
    double mn = 0.0, mx = 0.0, sum = 0.0;
    bool first = true;
    for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      double d = static_cast<double>(degree[static_cast<std::size_t>(a.col_idx[p])]);
      if (first) {
        mn = mx = d;
        first = false;
      } else {
        mn = std::min(mn, d);
        mx = std::max(mx, d);
      }
      sum += d;
    }
    double mean = sum / static_cast<double>(deg);
    double sq = 0.0;
    for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      double d = static_cast<double>(degree[static_cast<std::size_t>(a.col_idx[p])]);
      sq += (d - mean) * (d - mean);
    }
    double stdev = std::sqrt(sq / static_cast<double>(deg));
    f(i, 0) = static_cast<double>(deg);
    f(i, 1) = mn;
    f(i, 2) = mx;
    f(i, 3) = mean;
    f(i, 4) = stdev;
  }
  return f;
}

GraphBatch batch_graphs(const std::vector<Graph>& graphs,
                        std::vector<index_t> graph_labels) {
  if (graphs.empty()) throw ConfigError("batch_graphs: no graphs given");
  if (!graph_labels.empty() && graph_labels.size() != graphs.size())
    throw ConsistencyError("batch_graphs: graph label count mismatch");
  const index_t f = graphs.front().features.cols();
  for (const Graph& g : graphs)
    if (g.features.cols() != f)
      throw ConsistencyError("batch_graphs: mixed feature widths " +
                             std::to_string(f) + " vs " +
                             std::to_string(g.features.cols()));

  GraphBatch b;
  b.num_graphs = static_cast<index_t>(graphs.size());
  b.graph_labels = std::move(graph_labels);
  b.offsets.push_back(0);
  index_t total = 0;
  for (const Graph& g : graphs) {
    total += g.n;
    b.offsets.push_back(total);
  }

  Matrix x(total, f);
  std::vector<std::tuple<index_t, index_t, double>> entries;
  bool any_labels = false;
  for (const Graph& g : graphs)
    if (!g.labels.empty()) any_labels = true;
  std::vector<index_t> labels;
  if (any_labels) labels.assign(static_cast<std::size_t>(total), -1);

  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& g = graphs[k];
    const index_t off = b.offsets[k];
    for (index_t i = 0; i < g.n; ++i) {
      for (index_t j = 0; j < f; ++j) x(off + i, j) = g.features(i, j);
      b.graph_ids.push_back(static_cast<index_t>(k));
      if (any_labels && !g.labels.empty())
        labels[static_cast<std::size_t>(off + i)] = g.labels[static_cast<std::size_t>(i)];
    }
    if (g.adjacency) {
      const Csr& a = *g.adjacency;
      for (index_t i = 0; i < g.n; ++i)
        for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
          entries.emplace_back(off + i, off + a.col_idx[p], a.vals[p]);
    }
  }

  b.merged.n = total;
  b.merged.adjacency = std::make_shared<const Csr>(
      csr_from_coo(total, total, std::move(entries), Duplicates::Error));
  b.merged.features = std::move(x);
  b.merged.labels = std::move(labels);
  return b;
}

}  // namespace dsgrl
