#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "marketlcp/error.hpp"
#include "marketlcp/kernels.hpp"
#include "marketlcp/matrix_class.hpp"

using namespace marketlcp;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(ClassifyPMatrix, IdentityIsP) {
  for (int n : {1, 4, 12}) {
    const auto r = classify_p_matrix(Matrix::Identity(n, n));
    EXPECT_TRUE(r.is_p_matrix);
    EXPECT_EQ(r.method, ClassMethod::ExactMinors);
    EXPECT_DOUBLE_EQ(r.min_minor, 1.0);
    EXPECT_FALSE(r.witness.has_value());
    EXPECT_EQ(r.minors_checked, (1ull << n) - 1);
  }
}

TEST(ClassifyPMatrix, NegativeTwoByTwoMinorIsWitnessed) {
  const auto r = classify_p_matrix(mat2(1, 3, 2, 1));
  EXPECT_FALSE(r.is_p_matrix);
  EXPECT_DOUBLE_EQ(r.min_minor, -5.0);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(*r.witness, (std::vector<int>{0, 1}));
}

TEST(ClassifyPMatrix, TridiagonalMinimumMinor) {
  const auto r = classify_p_matrix(mat2(2, -1, -1, 2));
  EXPECT_TRUE(r.is_p_matrix);
  EXPECT_NEAR(r.min_minor, 2.0, 1e-12);
}

TEST(ClassifyPMatrix, VertexFormAgreesWithMinors) {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    Matrix m = Matrix::NullaryExpr(5, 5, [&]() { return rng.uniform(-1, 1); });
    ClassifyOptions vertex;
    vertex.vertex_form = true;
    const auto a = classify_p_matrix(m);
    const auto b = classify_p_matrix(m, vertex);
    EXPECT_EQ(b.method, ClassMethod::VertexDeterminants);
    EXPECT_EQ(a.is_p_matrix, b.is_p_matrix);
    EXPECT_NEAR(a.min_minor, b.min_minor, 1e-10 * std::max(1.0, std::abs(a.min_minor)));
  }
}

TEST(ClassifyPMatrix, SampledAboveLimit) {
  Rng rng(22);
  ClassifyOptions opts;
  opts.exact_limit = 4;
  const auto p = classify_p_matrix(fixtures::random_p_matrix(rng, 8), opts);
  EXPECT_EQ(p.method, ClassMethod::SampledMinors);
  EXPECT_TRUE(p.is_p_matrix);
  Matrix m = Matrix::Identity(8, 8);
  m(5, 5) = -1.0;
  const auto r = classify_p_matrix(m, opts);
  EXPECT_FALSE(r.is_p_matrix);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(*r.witness, std::vector<int>{5});
}

TEST(VertexIdentity, DeterminantEqualsPrincipalMinor) {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const int n = rng.integer(1, 6);
    Matrix m = Matrix::NullaryExpr(n, n, [&]() { return rng.uniform(-2, 2); });
    for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
      const double det = kernels::detail::vertex_determinant(m, mask);
      const double minor = kernels::detail::principal_minor(m, mask);
      EXPECT_NEAR(det, minor, 1e-10 * std::max(1.0, std::abs(minor)));
    }
  }
}

TEST(Beta, IdentityIsOne) {
  const auto r = beta_of(Matrix::Identity(3, 3));
  EXPECT_NEAR(r.beta, 1.0, 1e-12);
  EXPECT_FALSE(r.is_lower_bound);
}

TEST(Beta, ScalarTwoIsHalf) {
  Matrix m(1, 1);
  m << 2;
  EXPECT_NEAR(beta_of(m).beta, 0.5, 1e-12);
  EXPECT_NEAR(beta_grid(m, 0.01), 0.5, 1e-12);
}

TEST(Beta, TridiagonalMatchesFineGrid) {
  const Matrix m = mat2(2, -1, -1, 2);
  EXPECT_NEAR(beta_of(m).beta, beta_grid(m, 0.01), 1e-6);
}

TEST(Beta, SingularVertexThrows) {
  try {
    beta_of(mat2(0, 1, -1, 0));
    FAIL() << "expected SingularEncountered";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularEncountered);
  }
}

TEST(Beta, SampledIsFlaggedLowerBound) {
  Rng rng(24);
  const auto m = fixtures::random_p_matrix(rng, 6);
  BetaOptions opts;
  opts.vertex_limit = 3;
  opts.samples = 256;
  const auto sampled = beta_of(m, opts);
  EXPECT_TRUE(sampled.is_lower_bound);
  EXPECT_LE(sampled.beta, beta_of(m).beta + 1e-9);
  EXPECT_GT(sampled.beta, 0.0);
}

TEST(Beta, SampledIsDeterministicForSeed) {
  Rng rng(25);
  const auto m = fixtures::random_p_matrix(rng, 7);
  BetaOptions opts;
  opts.vertex_limit = 0;
  opts.samples = 128;
  EXPECT_EQ(beta_of(m, opts).beta, beta_of(m, opts).beta);
}

TEST(PerturbationBound, ZeroPerturbation) {
  Matrix m(1, 1);
  m << 2;
  const auto inst = LcpInstance::unlabeled(m, Vector::Constant(1, -1));
  const auto b = perturbation_bound(inst, Matrix::Zero(1, 1), Vector::Zero(1));
  EXPECT_EQ(b.epsilon_m, 0.0);
  EXPECT_EQ(b.epsilon_q, 0.0);
  EXPECT_EQ(b.eta, 0.0);
  ASSERT_TRUE(b.mu.has_value());
  EXPECT_EQ(*b.mu, 0.0);
}

TEST(PerturbationBound, ScalarChainIncludesBeta) {
  Matrix m(1, 1);
  m << 2;
  Matrix dm(1, 1);
  dm << 0.2;
  const auto inst = LcpInstance::unlabeled(m, Vector::Constant(1, -1));
  const auto b = perturbation_bound(inst, dm, Vector::Zero(1));
  EXPECT_NEAR(b.epsilon_m, 0.1, 1e-15);
  EXPECT_NEAR(b.beta, 0.5, 1e-15);
  EXPECT_NEAR(b.eta, 0.1, 1e-15);
  EXPECT_NEAR(b.epsilon, 0.2, 1e-15);
  ASSERT_TRUE(b.mu.has_value());
  EXPECT_NEAR(*b.mu, 2.0 * 0.2 / 0.9 * 0.5, 1e-12);
  EXPECT_NEAR(b.eta, b.epsilon_m * b.beta * b.m_norm, 1e-12 * b.eta);
}

TEST(PerturbationBound, EtaAtLeastOneHasNoMu) {
  Matrix m(1, 1);
  m << 2;
  Matrix dm(1, 1);
  dm << 2.5;
  const auto inst = LcpInstance::unlabeled(m, Vector::Constant(1, -1));
  const auto b = perturbation_bound(inst, dm, Vector::Zero(1));
  EXPECT_GE(b.eta, 1.0);
  EXPECT_FALSE(b.mu.has_value());
  try {
    require_bound(b);
    FAIL() << "expected EtaExceedsOne";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EtaExceedsOne);
  }
}

TEST(PerturbationBound, ContainmentOnRandomInstances) {
  Rng rng(26);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = rng.integer(2, 5);
    const auto m = fixtures::random_p_matrix(rng, n);
    Vector q = fixtures::random_vector(rng, n, -3, 1);
    q(0) = -1.0;
    auto nominal = solve_lcp(LcpInstance::unlabeled(m, q));
    ASSERT_EQ(nominal.status, LcpStatus::Solved);
    const double scale = inf_norm(nominal.x);
    if (scale < 1.0) {
      q /= scale;
      nominal = solve_lcp(LcpInstance::unlabeled(m, q));
    }
    const double beta = beta_of(m).beta;
    const double budget = rng.uniform(0.0, 0.9) / (beta * inf_norm(m));
    Matrix dm = Matrix::NullaryExpr(n, n, [&]() { return rng.uniform(-1, 1); });
    dm *= budget * inf_norm(m) / inf_norm(dm);
    const Vector dq = fixtures::random_vector(rng, n, -0.3, 0.3);
    const auto b = perturbation_bound(LcpInstance::unlabeled(m, q), dm, dq);
    ASSERT_TRUE(b.mu.has_value());
    const auto perturbed = solve_lcp(LcpInstance::unlabeled(m + dm, q + dq));
    ASSERT_EQ(perturbed.status, LcpStatus::Solved);
    EXPECT_LE(inf_norm(Vector(nominal.x - perturbed.x)) / inf_norm(nominal.x), *b.mu);
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(Kernels, SerialAndOpenMpAgree) {
  Rng rng(27);
  for (int t = 0; t < 5; ++t) {
    const auto m = fixtures::random_p_matrix(rng, 10);
    const auto q = fixtures::random_vector(rng, 10, -1, 1);
    const auto a = kernels::serial::principal_minors(m);
    const auto b = kernels::omp::principal_minors(m);
    EXPECT_EQ(a.min_value, b.min_value);
    EXPECT_EQ(a.argmin_mask, b.argmin_mask);
    EXPECT_EQ(a.checked, b.checked);
    const auto va = kernels::serial::vertex_determinants(m);
    const auto vb = kernels::omp::vertex_determinants(m);
    EXPECT_EQ(va.min_value, vb.min_value);
    EXPECT_EQ(va.argmin_mask, vb.argmin_mask);
    const auto ba = kernels::serial::beta_vertices(m);
    const auto bb = kernels::omp::beta_vertices(m);
    EXPECT_EQ(ba.value, bb.value);
    EXPECT_EQ(ba.argmax_mask, bb.argmax_mask);
    const auto ca = kernels::serial::complementary_bases(m, q, 1e-9);
    const auto cb = kernels::omp::complementary_bases(m, q, 1e-9);
    EXPECT_EQ(ca.feasible_masks, cb.feasible_masks);
    kernels::SampleParams params;
    params.samples = 256;
    const auto sa = kernels::serial::beta_samples(m, params);
    const auto sb = kernels::omp::beta_samples(m, params);
    EXPECT_EQ(sa.value, sb.value);
    EXPECT_EQ(sa.argmax_d, sb.argmax_d);
  }
}

TEST(Kernels, CoordinateAscentNeverDecreases) {
  Rng rng(28);
  const auto m = fixtures::random_p_matrix(rng, 6);
  std::vector<double> d(6, 0.5);
  const double start = kernels::vertex_norm(m, d);
  kernels::SampleScan stats;
  const double end = kernels::coordinate_ascent(m, d, 3, stats);
  EXPECT_GE(end, start - 1e-12);
  EXPECT_NEAR(end, kernels::vertex_norm(m, d), 1e-9 * std::max(1.0, end));
}
