#include <cmath>
#include <vector>

#include <doctest.h>

#include "dsgrl/augment.hpp"
#include "dsgrl/error.hpp"
#include "dsgrl/objective.hpp"
#include "dsgrl/ops.hpp"
#include "dsgrl/rng.hpp"
#include "testutil.hpp"

using namespace dsgrl;

namespace {

FeatureAugmenter augmenter_with(std::initializer_list<Matrix> f1,
                                std::initializer_list<Matrix> f2) {
  FeatureAugmenter fa;
  for (const Matrix& w : f1) fa.f1.weights.push_back(tu::param(w));
  for (const Matrix& w : f2) fa.f2.weights.push_back(tu::param(w));
  return fa;
}

}  // namespace

TEST_SUITE("invariance term") {
  TEST_CASE("unit difference per row") {
    // Z1 - Z2 = [[1,0],[0,1]]; Frobenius norm sqrt(2), no averaging.
    Tensor z1(Matrix::from_rows({{2, 1}, {0, 2}}));
    Tensor z2(Matrix::from_rows({{1, 1}, {0, 1}}));
    CHECK(tu::eval_scalar([&] { return invariance(z1, z2); }) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("identical views cost nothing") {
    Tensor z(Matrix::from_rows({{1, 2}, {3, 4}}));
    CHECK(tu::eval_scalar([&] { return invariance(z, z); }) == 0.0);
  }

  TEST_CASE("mean squared variant divides by the batch") {
    Tensor z1(Matrix::from_rows({{2, 1}, {0, 2}}));
    Tensor z2(Matrix::from_rows({{1, 1}, {0, 1}}));
    // ||diff||_F^2 = 2, B = 2.
    CHECK(tu::eval_scalar([&] { return invariance_mean_squared(z1, z2); }) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("shape mismatch rejected") {
    Tensor a(Matrix(2, 3)), b(Matrix(2, 4));
    CHECK_THROWS_AS((void)invariance(a, b), ShapeError);
  }
}

TEST_SUITE("variance term") {
  TEST_CASE("frozen oracles") {
    const double eps = 1e-4;
    // Column variances 2 and 0 (unbiased):
    // hinge(2) = max(0, 1-sqrt(2+eps)), negative -> 0; hinge(0) = 1-sqrt(eps).
    Tensor z(Matrix::from_rows({{0, 0}, {2, 0}}));
    double want = 0.5 * (0.0 + (1.0 - std::sqrt(eps)));
    CHECK(tu::eval_scalar([&] { return variance_reg(z, eps); }) ==
          doctest::Approx(want).epsilon(1e-12));
    CHECK(want == doctest::Approx(0.495).epsilon(1e-12));

    // All columns constant: every hinge is 1 - sqrt(eps).
    Tensor c(Matrix::from_rows({{3, -1}, {3, -1}, {3, -1}}));
    CHECK(tu::eval_scalar([&] { return variance_reg(c, eps); }) ==
          doctest::Approx(1.0 - std::sqrt(eps)).epsilon(1e-12));
    CHECK(1.0 - std::sqrt(eps) == doctest::Approx(0.99).epsilon(1e-12));

    // Columns with variance >= 1 pay nothing.
    Tensor u(Matrix::from_rows({{1, 5}, {-1, -5}}));
    CHECK(tu::eval_scalar([&] { return variance_reg(u, eps); }) == 0.0);
  }

  TEST_CASE("single row is degenerate") {
    Tensor z(Matrix::from_rows({{1, 2}}));
    CHECK_THROWS_AS((void)variance_reg(z, 1e-4), DegenerateError);
  }

  TEST_CASE("decreases as columns spread") {
    Rng rng(81);
    Matrix base = tu::random_matrix(rng, 8, 4, -0.1, 0.1);
    Matrix spread = base;
    for (index_t i = 0; i < spread.size(); ++i) spread.data()[i] *= 10.0;
    double small = tu::eval_scalar(
        [&] { return variance_reg(Tensor(base), 1e-4); });
    double large = tu::eval_scalar(
        [&] { return variance_reg(Tensor(spread), 1e-4); });
    CHECK(large < small);
  }
}

TEST_SUITE("covariance term") {
  TEST_CASE("frozen oracles") {
    // Z = [[0,0],[1,2]] -> centered [[-0.5,-1],[0.5,1]];
    // cov12 = (0.5 + 0.5)/(2-1) = 1; both off-diagonal slots squared:
    // 1 + 1 = 2, divided by D = 2 -> 1.
    Tensor z(Matrix::from_rows({{0, 0}, {1, 2}}));
    CHECK(tu::eval_scalar([&] { return covariance_reg(z); }) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // Z = [[0,0],[2,4]] -> centered [[-1,-2],[1,2]]; cov12 = 4;
    // 16 + 16 = 32, /D -> 16.
    Tensor big(Matrix::from_rows({{0, 0}, {2, 4}}));
    CHECK(tu::eval_scalar([&] { return covariance_reg(big); }) ==
          doctest::Approx(16.0).epsilon(1e-12));
  }

  TEST_CASE("decorrelated columns cost nothing") {
    Tensor z(Matrix::from_rows({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}));
    CHECK(tu::eval_scalar([&] { return covariance_reg(z); }) == 0.0);
  }

  TEST_CASE("diagonal variance is ignored") {
    // One column: no off-diagonal entries at all.
    Tensor z(Matrix::from_rows({{5}, {-3}, {9}}));
    CHECK(tu::eval_scalar([&] { return covariance_reg(z); }) == 0.0);
  }

  TEST_CASE("shift invariance") {
    Rng rng(82);
    Matrix z = tu::random_matrix(rng, 6, 3);
    Matrix shifted = z;
    for (index_t i = 0; i < 6; ++i)
      for (index_t j = 0; j < 3; ++j) shifted(i, j) += 10.0 * (j + 1);
    double a = tu::eval_scalar([&] { return covariance_reg(Tensor(z)); });
    double b =
        tu::eval_scalar([&] { return covariance_reg(Tensor(shifted)); });
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }

  TEST_CASE("single row is degenerate") {
    CHECK_THROWS_AS((void)covariance_reg(Tensor(Matrix(1, 3))),
                    DegenerateError);
  }
}

TEST_SUITE("latent composition") {
  TEST_CASE("weights combine the four pieces") {
    Rng rng(83);
    Tensor z1(tu::random_matrix(rng, 5, 3));
    Tensor z2(tu::random_matrix(rng, 5, 3));
    double beta = 0.7, gamma = 2.5, eps = 1e-4;
    double v1 = tu::eval_scalar([&] { return variance_reg(z1, eps); });
    double v2 = tu::eval_scalar([&] { return variance_reg(z2, eps); });
    double c1 = tu::eval_scalar([&] { return covariance_reg(z1); });
    double c2 = tu::eval_scalar([&] { return covariance_reg(z2); });
    double got = tu::eval_scalar(
        [&] { return latent_reg(z1, z2, beta, gamma, eps); });
    CHECK(got ==
          doctest::Approx(beta * (v1 + v2) + gamma * (c1 + c2)).epsilon(1e-12));
  }

  TEST_CASE("frozen oracle") {
    // Both views two constant columns: v = 1 - sqrt(eps) each, c = 0 each.
    // beta=4, gamma=9: 4 * 2 * (1-sqrt(1e-4)) = 8 * 0.99 = 7.92.
    Tensor z(Matrix::from_rows({{1, 1}, {1, 1}}));
    CHECK(tu::eval_scalar([&] { return latent_reg(z, z, 4.0, 9.0); }) ==
          doctest::Approx(7.92).epsilon(1e-12));
  }
}

TEST_SUITE("model regularizer") {
  TEST_CASE("orthonormal stacked rows cost nothing") {
    // W1 = [1,0], W2 = [0,1]: stacked [[1,0],[0,1]] has W W^T = I.
    auto fa = augmenter_with({Matrix::from_rows({{1.0, 0.0}})},
                             {Matrix::from_rows({{0.0, 1.0}})});
    CHECK(tu::eval_scalar([&] { return model_reg(fa.f1, fa.f2); }) == 0.0);
  }

  TEST_CASE("duplicated rows pay the off diagonal") {
    // W1 = W2 = [1,0]: W W^T = [[1,1],[1,1]], minus I leaves four entries
    // of magnitude {0,1,1,0} -> Frobenius sqrt(2).
    auto fa = augmenter_with({Matrix::from_rows({{1.0, 0.0}})},
                             {Matrix::from_rows({{1.0, 0.0}})});
    CHECK(tu::eval_scalar([&] { return model_reg(fa.f1, fa.f2); }) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("layers add up") {
    // Three identical single-row layers, each contributing sqrt(2).
    auto fa = augmenter_with({Matrix::from_rows({{1.0, 0.0}}),
                              Matrix::from_rows({{1.0}, {0.0}}),
                              Matrix::from_rows({{1.0}})},
                             {Matrix::from_rows({{1.0, 0.0}}),
                              Matrix::from_rows({{1.0}, {0.0}}),
                              Matrix::from_rows({{1.0}})});
    // Layer shapes: (1x2),(2x1),(1x1). Stacked: (2x2),(4x1),(2x1).
    // L0: [[1,0],[1,0]] -> WW^T = [[1,1],[1,1]], ||..-I||_F = sqrt(2).
    // L1: [1,0,1,0]^T -> WW^T 4x4 with ones at the four (odd,odd) spots;
    //     minus I: diag (0,-1,0,-1) plus two off-diag ones -> sqrt(2+2) = 2.
    // L2: [1,1]^T -> [[1,1],[1,1]] - I -> sqrt(2).
    double want = std::sqrt(2.0) + 2.0 + std::sqrt(2.0);
    CHECK(tu::eval_scalar([&] { return model_reg(fa.f1, fa.f2); }) ==
          doctest::Approx(want).epsilon(1e-12));
  }

  TEST_CASE("zero weights leave pure identity cost") {
    // Stacked zero matrix: ||0 - I||_F = sqrt(2r) for 2r stacked rows.
    auto fa = augmenter_with({Matrix(3, 4)}, {Matrix(3, 4)});
    CHECK(tu::eval_scalar([&] { return model_reg(fa.f1, fa.f2); }) ==
          doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
  }

  TEST_CASE("small penalty forces near orthogonal view weights") {
    // Train nothing; just verify the property on constructed cases: when the
    // penalty is tiny, every W1 row is near unit and orthogonal to W2 rows.
    Rng rng(84);
    for (int t = 0; t < 20; ++t) {
      // Build a random rotation-ish pair via Gram-Schmidt on 4 vectors in R^8.
      Matrix raw = tu::random_matrix(rng, 4, 8);
      for (index_t i = 0; i < 4; ++i) {
        for (index_t k = 0; k < i; ++k) {
          double dot = 0.0;
          for (index_t j = 0; j < 8; ++j) dot += raw(i, j) * raw(k, j);
          for (index_t j = 0; j < 8; ++j) raw(i, j) -= dot * raw(k, j);
        }
        double norm = 0.0;
        for (index_t j = 0; j < 8; ++j) norm += raw(i, j) * raw(i, j);
        norm = std::sqrt(norm);
        REQUIRE(norm > 1e-8);
        for (index_t j = 0; j < 8; ++j) raw(i, j) /= norm;
      }
      Matrix w1(2, 8), w2(2, 8);
      for (index_t j = 0; j < 8; ++j) {
        w1(0, j) = raw(0, j);
        w1(1, j) = raw(1, j);
        w2(0, j) = raw(2, j);
        w2(1, j) = raw(3, j);
      }
      auto fa = augmenter_with({w1}, {w2});
      double pen = tu::eval_scalar([&] { return model_reg(fa.f1, fa.f2); });
      REQUIRE(pen < 1e-6);
      for (index_t r1 = 0; r1 < 2; ++r1)
        for (index_t r2 = 0; r2 < 2; ++r2) {
          double dot = 0.0;
          for (index_t j = 0; j < 8; ++j) dot += w1(r1, j) * w2(r2, j);
          CHECK(std::abs(dot) < 1e-3);
        }
    }
  }

  TEST_CASE("depth mismatch rejected") {
    auto fa = augmenter_with({Matrix(2, 2)}, {Matrix(2, 2), Matrix(2, 2)});
    CHECK_THROWS_AS((void)model_reg(fa.f1, fa.f2), ShapeError);
  }
}

TEST_SUITE("orthonormality penalty") {
  TEST_CASE("orthogonal rows after normalization cost nothing") {
    Tensor z(Matrix::from_rows({{3, 0}, {0, -7}}));
    CHECK(tu::eval_scalar([&] { return orthonormality_penalty(z); }) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("duplicate unit rows") {
    // Normalized rows identical: Zn Zn^T = [[1,1],[1,1]], minus I -> sqrt(2).
    Tensor z(Matrix::from_rows({{2, 0}, {5, 0}}));
    CHECK(tu::eval_scalar([&] { return orthonormality_penalty(z); }) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("scale invariance through the normalization") {
    Rng rng(85);
    Matrix z = tu::random_matrix(rng, 5, 4);
    Matrix scaled = z;
    for (index_t i = 0; i < scaled.size(); ++i) scaled.data()[i] *= 37.0;
    double a =
        tu::eval_scalar([&] { return orthonormality_penalty(Tensor(z)); });
    double b = tu::eval_scalar(
        [&] { return orthonormality_penalty(Tensor(scaled)); });
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }

  TEST_CASE("zero row rejected") {
    Tensor z(Matrix::from_rows({{1, 2}, {0, 0}}));
    CHECK_THROWS_AS((void)orthonormality_penalty(z), DegenerateError);
  }
}

TEST_SUITE("total objective") {
  TEST_CASE("zero weights give zero loss") {
    Rng rng(86);
    Tensor z1(tu::random_matrix(rng, 4, 3));
    Tensor z2(tu::random_matrix(rng, 4, 3));
    auto fa = augmenter_with({Matrix(3, 3)}, {Matrix(3, 3)});
    LossWeights w;
    w.alpha = w.beta = w.gamma = w.lambda = 0.0;
    Tape tape;
    LossBreakdown b = total_loss(z1, z2, &fa, w);
    CHECK(b.total == 0.0);
    CHECK(b.total_tensor.value()(0, 0) == 0.0);
  }

  TEST_CASE("breakdown reconstructs the total") {
    Rng rng(87);
    Tensor z1(tu::random_matrix(rng, 6, 4));
    Tensor z2(tu::random_matrix(rng, 6, 4));
    FeatureAugmenter fa;
    fa.f1.weights = init_weight_chain({4, 4}, rng);
    fa.f2.weights = init_weight_chain({4, 4}, rng);
    LossWeights w;
    w.alpha = 0.3;
    w.beta = 1.7;
    w.gamma = 0.9;
    w.lambda = 2.2;

    for (InvarianceForm form :
         {InvarianceForm::Frobenius, InvarianceForm::MeanSquared}) {
      Tape tape;
      LossBreakdown b = total_loss(z1, z2, &fa, w, LatentReg::Vic,
                                   Mode::Feature, form);
      double rebuilt = w.alpha * b.inv + w.beta * (b.var1 + b.var2) +
                       w.gamma * (b.cov1 + b.cov2) + w.lambda * b.model_reg;
      CHECK(b.total == doctest::Approx(rebuilt).epsilon(1e-10));
      CHECK(b.total == doctest::Approx(b.total_tensor.value()(0, 0)).epsilon(1e-12));
      double inv_direct = tu::eval_scalar([&] {
        return form == InvarianceForm::Frobenius
                   ? invariance(z1, z2)
                   : invariance_mean_squared(z1, z2);
      });
      CHECK(b.inv == doctest::Approx(inv_direct).epsilon(1e-12));
    }
  }

  TEST_CASE("ortho swaps the latent terms") {
    Rng rng(88);
    Tensor z1(tu::random_matrix(rng, 5, 3));
    Tensor z2(tu::random_matrix(rng, 5, 3));
    auto fa = augmenter_with({Matrix(3, 3)}, {Matrix(3, 3)});
    LossWeights w;
    Tape tape;
    LossBreakdown b =
        total_loss(z1, z2, &fa, w, LatentReg::Ortho, Mode::Feature);
    CHECK(b.var1 == 0.0);
    CHECK(b.var2 == 0.0);
    double o1 =
        tu::eval_scalar([&] { return orthonormality_penalty(z1); });
    double o2 =
        tu::eval_scalar([&] { return orthonormality_penalty(z2); });
    CHECK(b.cov1 == doctest::Approx(o1).epsilon(1e-12));
    CHECK(b.cov2 == doctest::Approx(o2).epsilon(1e-12));
  }

  TEST_CASE("topology mode carries no model term") {
    Rng rng(89);
    Tensor z1(tu::random_matrix(rng, 5, 3));
    Tensor z2(tu::random_matrix(rng, 5, 3));
    LossWeights w;
    Tape tape;
    LossBreakdown b =
        total_loss(z1, z2, nullptr, w, LatentReg::Vic, Mode::Topology);
    CHECK(b.model_reg == 0.0);

    auto fa = augmenter_with({Matrix(3, 3)}, {Matrix(3, 3)});
    CHECK_THROWS_AS(
        (void)total_loss(z1, z2, &fa, w, LatentReg::Vic, Mode::Topology),
        ConfigError);
    CHECK_THROWS_AS(
        (void)total_loss(z1, z2, nullptr, w, LatentReg::Vic, Mode::Feature),
        ConfigError);
    CHECK_THROWS_AS(
        (void)total_loss(z1, z2, nullptr, w, LatentReg::Vic, Mode::Combined),
        ConfigError);
  }

  TEST_CASE("combined mode keeps the model term") {
    Rng rng(90);
    Tensor z1(tu::random_matrix(rng, 5, 3));
    Tensor z2(tu::random_matrix(rng, 5, 3));
    auto fa = augmenter_with({Matrix::from_rows({{1.0, 0.0}})},
                             {Matrix::from_rows({{1.0, 0.0}})});
    LossWeights w;
    Tape tape;
    LossBreakdown b =
        total_loss(z1, z2, &fa, w, LatentReg::Vic, Mode::Combined);
    CHECK(b.model_reg == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("gradient flows through every term") {
    Rng rng(91);
    for (int t = 0; t < 3; ++t) {
      Tensor z1 = tu::param(tu::random_matrix(rng, 6, 3));
      Tensor z2 = tu::param(tu::random_matrix(rng, 6, 3));
      FeatureAugmenter fa;
      fa.f1.weights = init_weight_chain({3, 3}, rng);
      fa.f2.weights = init_weight_chain({3, 3}, rng);
      LossWeights w;
      w.alpha = 0.8;
      w.beta = 1.2;
      w.gamma = 0.6;
      w.lambda = 0.9;

      // The variance hinge has a kink where sqrt(var+eps) = 1; skip draws
      // that sit near it. The invariance norm is kinked at zero distance,
      // which random draws never hit.
      if (tu::variance_hinge_margin(z1.value(), w.epsilon) < 1e-4) continue;
      if (tu::variance_hinge_margin(z2.value(), w.epsilon) < 1e-4) continue;

      std::vector<Tensor> params{z1, z2, fa.f1.weights[0], fa.f2.weights[0]};
      auto res = tu::check_gradients(params, [&] {
        return total_loss(z1, z2, &fa, w).total_tensor;
      });
      INFO(res.worst);
      CHECK(res.ok);
    }
  }

  TEST_CASE("ortho objective gradients") {
    Rng rng(92);
    for (int t = 0; t < 3; ++t) {
      Matrix m1, m2;
      do {
        m1 = tu::random_matrix(rng, 5, 3);
      } while (tu::min_abs(m1) < 0.05);
      do {
        m2 = tu::random_matrix(rng, 5, 3);
      } while (tu::min_abs(m2) < 0.05);
      Tensor z1 = tu::param(m1);
      Tensor z2 = tu::param(m2);
      auto fa = augmenter_with({Matrix(3, 3)}, {Matrix(3, 3)});
      LossWeights w;
      auto res = tu::check_gradients({z1, z2}, [&] {
        return total_loss(z1, z2, &fa, w, LatentReg::Ortho).total_tensor;
      });
      INFO(res.worst);
      CHECK(res.ok);
    }
  }
}
