#include <cmath>
#include <memory>
#include <vector>

#include <doctest.h>

#include "dsgrl/augment.hpp"
#include "dsgrl/error.hpp"
#include "dsgrl/graph.hpp"
#include "dsgrl/ops.hpp"
#include "dsgrl/rng.hpp"
#include "testutil.hpp"

using namespace dsgrl;

namespace {

FeatureAugmenter identity_augmenter(index_t width) {
  FeatureAugmenter fa;
  fa.f1.weights.push_back(tu::param(Matrix::identity(width)));
  fa.f2.weights.push_back(tu::param(Matrix::identity(width)));
  return fa;
}

// Brute-force reference for the thresholded similarity network, written to
// accumulate exactly like the production kernel: ascending-k dot products
// and an ascending-j row mean divided once at the end.
Csr naive_high_order(const Matrix& h) {
  const index_t n = h.rows();
  Matrix s(n, n);
  for (index_t i = 0; i < n; ++i)
    for (index_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (index_t k = 0; k < h.cols(); ++k) dot += h(i, k) * h(j, k);
      s(i, j) = dot;
    }
  std::vector<std::tuple<index_t, index_t, double>> kept;
  for (index_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (index_t j = 0; j < n; ++j) sum += s(i, j);
    double mean = sum / static_cast<double>(n);
    for (index_t j = 0; j < n; ++j)
      if (s(i, j) > mean) kept.emplace_back(i, j, s(i, j));
  }
  return csr_from_coo(n, n, std::move(kept));
}

}  // namespace

TEST_SUITE("feature views") {
  TEST_CASE("identity augmenters reproduce the input") {
    Tensor x(Matrix::from_rows({{1, -2}, {3, 4}}));
    auto [x1, x2] = augment_features(x, identity_augmenter(2));
    CHECK(tu::bitwise_equal(x1.value(), x.value()));
    CHECK(tu::bitwise_equal(x2.value(), x.value()));
    CHECK(x1.id() != x2.id());
  }

  TEST_CASE("negated single layer flips the view") {
    Rng rng(71);
    Matrix w = tu::random_matrix(rng, 3, 2);
    FeatureAugmenter fa;
    fa.f1.weights.push_back(tu::param(w));
    Matrix neg = w;
    for (index_t i = 0; i < neg.size(); ++i) neg.data()[i] = -neg.data()[i];
    fa.f2.weights.push_back(tu::param(neg));

    Tensor x(tu::random_matrix(rng, 4, 3));
    auto [x1, x2] = augment_features(x, fa);
    // Single layer stacks are linear end to end, so X(-W) = -(XW).
    for (index_t i = 0; i < 4; ++i)
      for (index_t j = 0; j < 2; ++j)
        CHECK(x2.value()(i, j) == doctest::Approx(-x1.value()(i, j)).epsilon(1e-14));
  }

  TEST_CASE("mismatched view shapes rejected") {
    FeatureAugmenter fa;
    fa.f1.weights.push_back(tu::param(Matrix(2, 3)));
    fa.f2.weights.push_back(tu::param(Matrix(2, 4)));
    Tensor x(Matrix(5, 2));
    CHECK_THROWS_AS((void)augment_features(x, fa), ShapeError);

    FeatureAugmenter depth;
    depth.f1.weights.push_back(tu::param(Matrix(2, 3)));
    depth.f2.weights.push_back(tu::param(Matrix(2, 3)));
    depth.f2.weights.push_back(tu::param(Matrix(3, 3)));
    CHECK_THROWS_AS((void)augment_features(x, depth), ShapeError);
  }
}

TEST_SUITE("similarity") {
  TEST_CASE("dot product oracles") {
    std::vector<double> a{1, 2}, b{3, 4}, zero{0, 0};
    CHECK(similarity(a, b) == 11.0);
    CHECK(similarity(a, zero) == 0.0);
    CHECK(similarity(a, a) == 5.0);
  }

  TEST_CASE("length mismatch rejected") {
    std::vector<double> a{1, 2}, b{3};
    CHECK_THROWS_AS((void)similarity(a, b), ShapeError);
  }
}

TEST_SUITE("high order network") {
  TEST_CASE("hand worked threshold") {
    // H rows: e1, e2, e1+e2. S = [[1,0,1],[0,1,1],[1,1,2]].
    // Row means: 2/3, 2/3, 4/3. Kept: (0,0),(0,2),(1,1),(1,2),(2,2).
    Matrix h = Matrix::from_rows({{1, 0}, {0, 1}, {1, 1}});
    Csr a = build_high_order_network(h);
    Matrix d = a.to_dense();
    Matrix want = Matrix::from_rows({{1, 0, 1}, {0, 1, 1}, {0, 0, 2}});
    CHECK(tu::bitwise_equal(d, want));
  }

  TEST_CASE("identical rows keep nothing") {
    // All similarities equal the row mean; strict inequality drops them all.
    Matrix h = Matrix::from_rows({{1, 1}, {1, 1}, {1, 1}});
    CHECK(build_high_order_network(h).nnz() == 0);
  }

  TEST_CASE("orthonormal rows keep the diagonal") {
    Matrix h = Matrix::identity(5);
    Csr a = build_high_order_network(h);
    CHECK(tu::bitwise_equal(a.to_dense(), Matrix::identity(5)));
  }

  TEST_CASE("matches the brute force rule") {
    Rng rng(72);
    for (int t = 0; t < 50; ++t) {
      index_t n = 2 + static_cast<index_t>(rng.below(19));
      index_t d = 1 + static_cast<index_t>(rng.below(8));
      Matrix h = tu::random_matrix(rng, n, d);
      Csr got = build_high_order_network(h);
      Csr want = naive_high_order(h);
      REQUIRE(got.row_ptr == want.row_ptr);
      REQUIRE(got.col_idx == want.col_idx);
      REQUIRE(got.vals == want.vals);
    }
  }

  TEST_CASE("row maximum survives whenever the row is not constant") {
    Rng rng(73);
    for (int t = 0; t < 20; ++t) {
      index_t n = 3 + static_cast<index_t>(rng.below(10));
      Matrix h = tu::random_matrix(rng, n, 4);
      Csr a = build_high_order_network(h);
      Matrix s = matmul(h, transposed(h));
      for (index_t i = 0; i < n; ++i) {
        double mx = s(i, 0), sum = 0.0;
        for (index_t j = 0; j < n; ++j) {
          mx = std::max(mx, s(i, j));
          sum += s(i, j);
        }
        if (mx == sum / static_cast<double>(n)) continue;  // constant row
        bool found = false;
        for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
          if (a.vals[p] == mx) found = true;
        CHECK(found);
      }
    }
  }

  TEST_CASE("dense and sparse construction agree") {
    // Same support, bitwise-identical kept values. Dropped entries are zero
    // on both routes, though the dense multiply may leave a negative zero;
    // every consumer (zero-skipping products, degree sums) treats the two
    // signs identically.
    Rng rng(74);
    for (int t = 0; t < 10; ++t) {
      Matrix h = tu::random_matrix(rng, 8, 3);
      Csr sparse = build_high_order_network(h);
      Matrix dense = dense_high_order_adjacency(Tensor(h)).value();
      REQUIRE(dense.rows() == sparse.rows);
      REQUIRE(dense.cols() == sparse.cols);
      Matrix kept(sparse.rows, sparse.cols);
      for (index_t i = 0; i < sparse.rows; ++i)
        for (index_t p = sparse.row_ptr[i]; p < sparse.row_ptr[i + 1]; ++p)
          kept(i, sparse.col_idx[p]) = 1.0;
      Matrix from_sparse = sparse.to_dense();
      for (index_t i = 0; i < dense.rows(); ++i)
        for (index_t j = 0; j < dense.cols(); ++j) {
          if (kept(i, j) == 1.0) {
            CHECK(dense(i, j) == from_sparse(i, j));
            CHECK(std::signbit(dense(i, j)) == std::signbit(from_sparse(i, j)));
          } else {
            CHECK(dense(i, j) == 0.0);
          }
        }
    }
  }

  TEST_CASE("normalization routes agree bitwise") {
    Rng rng(75);
    for (int t = 0; t < 10; ++t) {
      Matrix h = tu::random_matrix(rng, 7, 3);
      Csr aprime = build_high_order_network(h);
      auto sparse_norm = normalize_high_order(aprime);
      Tensor dense_norm =
          normalize_dense_adjacency(Tensor(aprime.to_dense()));
      CHECK(tu::bitwise_equal(dense_norm.value(), sparse_norm->to_dense()));
    }
  }

  TEST_CASE("gradients flow through kept entries into the gnn") {
    Rng rng(76);
    Graph g = generate_sbm({3, 3}, 0.8, 0.1, 0.2, 31);
    auto a_hat = normalize_adjacency(*g.adjacency);
    for (int t = 0; t < 5; ++t) {
      TopologyAugmenter ta;
      ta.gnn.weights = init_weight_chain({2, 4, 3}, rng);
      Tensor x(g.features);

      // The selection pattern must be stable under the finite-difference
      // probes, so skip draws where any similarity sits near its row mean.
      Matrix h = high_order_features(a_hat, x, ta).value();
      if (tu::similarity_margin(h) < 1e-3) continue;
      Matrix ad = a_hat->to_dense();
      if (!tu::preactivations_clear(
              tu::gcn_preactivations(ad, x.value(), ta.gnn.weights), 1e-3))
        continue;

      auto res = tu::check_gradients(ta.gnn.weights, [&] {
        Tensor hh = high_order_features(a_hat, x, ta);
        Tensor ap = dense_high_order_adjacency(hh);
        return sum_all(square(normalize_dense_adjacency(ap)));
      });
      INFO(res.worst);
      CHECK(res.ok);
    }
  }
}

TEST_SUITE("view assembly") {
  TEST_CASE("feature mode shares the original adjacency") {
    Graph g = generate_sbm({3, 3}, 0.8, 0.1, 0.0, 41);
    auto a_hat = normalize_adjacency(*g.adjacency);
    FeatureAugmenter fa = identity_augmenter(2);
    ViewPair vp = make_views(a_hat, Tensor(g.features), Mode::Feature, &fa,
                             nullptr);
    auto* c1 = std::get_if<std::shared_ptr<const Csr>>(&vp.v1.adjacency);
    auto* c2 = std::get_if<std::shared_ptr<const Csr>>(&vp.v2.adjacency);
    REQUIRE(c1 != nullptr);
    REQUIRE(c2 != nullptr);
    CHECK(c1->get() == a_hat.get());
    CHECK(c2->get() == a_hat.get());
    CHECK(vp.v1.features.id() != vp.v2.features.id());
    CHECK(vp.aprime_nnz == -1);
  }

  TEST_CASE("topology mode shares features and rewires view two") {
    Rng rng(77);
    Graph g = generate_sbm({4, 4}, 0.7, 0.1, 0.3, 42);
    auto a_hat = normalize_adjacency(*g.adjacency);
    TopologyAugmenter ta;
    ta.gnn.weights = init_weight_chain({2, 4, 3}, rng);
    Tensor x(g.features);
    ViewPair vp = make_views(a_hat, x, Mode::Topology, nullptr, &ta);

    CHECK(vp.v1.features.id() == x.id());
    CHECK(vp.v2.features.id() == x.id());
    auto* c1 = std::get_if<std::shared_ptr<const Csr>>(&vp.v1.adjacency);
    REQUIRE(c1 != nullptr);
    CHECK(c1->get() == a_hat.get());
    auto* t2 = std::get_if<Tensor>(&vp.v2.adjacency);
    REQUIRE(t2 != nullptr);
    CHECK(t2->rows() == g.n);
    CHECK(vp.aprime_nnz >= 0);

    // The stored count matches the thresholded network before normalization.
    Matrix h = high_order_features(a_hat, x, ta).value();
    CHECK(vp.aprime_nnz == build_high_order_network(h).nnz());
  }

  TEST_CASE("combined mode augments both sides") {
    Rng rng(78);
    Graph g = generate_sbm({4, 4}, 0.7, 0.1, 0.3, 43);
    auto a_hat = normalize_adjacency(*g.adjacency);
    FeatureAugmenter fa;
    fa.f1.weights = init_weight_chain({2, 2}, rng);
    fa.f2.weights = init_weight_chain({2, 2}, rng);
    TopologyAugmenter ta;
    ta.gnn.weights = init_weight_chain({2, 3}, rng);
    Tensor x(g.features);
    ViewPair vp = make_views(a_hat, x, Mode::Combined, &fa, &ta);

    auto* c1 = std::get_if<std::shared_ptr<const Csr>>(&vp.v1.adjacency);
    REQUIRE(c1 != nullptr);
    CHECK(c1->get() == a_hat.get());
    CHECK(std::holds_alternative<Tensor>(vp.v2.adjacency));
    CHECK(vp.v1.features.id() != x.id());
    CHECK(vp.v2.features.id() != x.id());
    CHECK(vp.aprime_nnz >= 0);
  }

  TEST_CASE("missing augmenters are config errors") {
    Graph g = generate_sbm({3, 3}, 0.8, 0.1, 0.0, 44);
    auto a_hat = normalize_adjacency(*g.adjacency);
    Tensor x(g.features);
    FeatureAugmenter fa = identity_augmenter(2);
    TopologyAugmenter ta;
    Rng rng(79);
    ta.gnn.weights = init_weight_chain({2, 3}, rng);

    CHECK_THROWS_AS((void)make_views(a_hat, x, Mode::Feature, nullptr, nullptr),
                    ConfigError);
    CHECK_THROWS_AS((void)make_views(a_hat, x, Mode::Topology, nullptr, nullptr),
                    ConfigError);
    CHECK_THROWS_AS((void)make_views(a_hat, x, Mode::Combined, &fa, nullptr),
                    ConfigError);
    CHECK_THROWS_AS((void)make_views(a_hat, x, Mode::Combined, nullptr, &ta),
                    ConfigError);
  }

  TEST_CASE("cached network bypasses the gnn") {
    Rng rng(80);
    Graph g = generate_sbm({4, 4}, 0.7, 0.1, 0.3, 45);
    auto a_hat = normalize_adjacency(*g.adjacency);
    TopologyAugmenter ta;
    ta.gnn.weights = init_weight_chain({2, 3}, rng);
    Tensor x(g.features);

    Matrix cached(g.n, g.n);
    for (index_t i = 0; i < g.n; ++i) cached(i, i) = 1.0;
    ViewPair vp = make_views(a_hat, x, Mode::Topology, nullptr, &ta, &cached);
    auto* t2 = std::get_if<Tensor>(&vp.v2.adjacency);
    REQUIRE(t2 != nullptr);
    CHECK(tu::bitwise_equal(t2->value(), cached));
    CHECK(vp.aprime_nnz == g.n);
  }
}
