#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "projsplit/errors.hpp"
#include "projsplit/problems.hpp"
#include "test_support.hpp"

using namespace projsplit;
using projsplit::testing::random_vector;

namespace {

std::vector<ProblemInstance> sample_instances() {
  std::vector<ProblemInstance> out;
  out.push_back(make_lasso(12, 20, 0.3, 1));
  out.push_back(make_lasso(30, 15, 0.8, 2));
  out.push_back(make_strongly_monotone_affine(9, 3, 0.2, 3));
  out.push_back(make_strongly_monotone_affine(5, 4, 0.05, 4,
                                              {SlotKind::kForward, SlotKind::kForward,
                                               SlotKind::kBackward, SlotKind::kForward}));
  out.push_back(make_cocoercive_strong(8, 3, 0.4, 5));
  out.push_back(make_two_set_feasibility(7, 6));
  return out;
}

// Probes |Tu - Tv| <= L |u - v|, <u - v, Tu - Tv> >= mu |u - v|^2 and the cocoercive
// inequality on `samples` random pairs; returns the worst excess (<= 0 when all hold).
double probe_constants(const MonotoneOperator& op, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const OperatorMeta& m = op.meta();
  double worst = -1.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector u = random_vector(rng, op.dim(), 3.0);
    const Vector v = random_vector(rng, op.dim(), 3.0);
    const Vector du = op.apply(u) - op.apply(v);
    const double uv2 = dist_sq(u, v);
    const double inner = dot(u - v, du);
    if (m.lipschitz) worst = std::max(worst, std::sqrt(norm_sq(du)) - *m.lipschitz * std::sqrt(uv2));
    if (m.strong_monotonicity) worst = std::max(worst, *m.strong_monotonicity * uv2 - inner);
    if (m.cocoercivity) worst = std::max(worst, norm_sq(du) / *m.cocoercivity - inner);
  }
  return worst;
}

}  // namespace

TEST(Lasso, ScalarFixedPoint) {
  const ProblemInstance inst = make_lasso_from_data(DenseMatrix(1, 1, 1.0), Vector{1}, 0.5);
  EXPECT_NEAR(inst.meta.oracle->z()[0], 0.5, 1e-12);
  EXPECT_NEAR(*inst.meta.f_star, 0.375, 1e-12);
}

TEST(Lasso, LargePenaltyGivesZero) {
  std::mt19937_64 rng(7);
  const DenseMatrix a = projsplit::testing::random_matrix(rng, 6, 4);
  const Vector b = random_vector(rng, 6);
  const Vector atb = a.apply_transpose(b);
  double inf_norm = 0.0;
  for (double v : atb) inf_norm = std::max(inf_norm, std::abs(v));
  const ProblemInstance inst = make_lasso_from_data(a, b, inf_norm * 1.01);
  EXPECT_EQ(norm(inst.meta.oracle->z()), 0.0);
  EXPECT_NEAR(*inst.meta.f_star, 0.5 * norm_sq(b), 1e-12);
}

TEST(Lasso, ReferenceReachesGapTolerance) {
  const ProblemInstance inst = make_lasso(50, 100, 0.5, 9);
  EXPECT_LE(solution_set_residual(inst.slots, *inst.meta.oracle), 1e-10);
  EXPECT_EQ(inst.meta.kinds[0], SlotKind::kBackward);
  EXPECT_EQ(inst.meta.kinds[1], SlotKind::kForward);
  EXPECT_TRUE(inst.meta.ball_lipschitz[0].has_value());
}

TEST(Lasso, DualityGapVanishesAtOptimum) {
  std::mt19937_64 rng(8);
  const DenseMatrix a = projsplit::testing::random_matrix(rng, 15, 10);
  const Vector b = random_vector(rng, 15);
  const LassoReference ref = solve_lasso_reference(a, b, 0.4);
  EXPECT_LE(ref.duality_gap, 1e-12);
  EXPECT_GE(lasso_duality_gap(a, b, 0.4, Vector(10)), 0.0);
  // any other point has objective >= F*
  for (int t = 0; t < 50; ++t) {
    const Vector z = ref.z + 0.01 * random_vector(rng, 10);
    EXPECT_GE(lasso_objective(a, b, 0.4, z), ref.objective - 1e-12);
  }
}

TEST(Affine, IdentityPair) {
  const ProblemInstance inst = make_affine_instance(
      {DenseMatrix::identity(1), DenseMatrix::identity(1)}, {Vector{1}, Vector{-3}},
      {SlotKind::kBackward, SlotKind::kForward});
  EXPECT_DOUBLE_EQ(inst.meta.oracle->z()[0], 1.0);
  EXPECT_LE(solution_set_residual(inst.slots, *inst.meta.oracle), 1e-12);
}

TEST(Affine, ReportedModulusIsSmallestEigenvalue) {
  // symmetric part of [[2, 1], [-1, 3]] is diag(2, 3)
  const DenseMatrix a1(2, 2, std::vector<double>{2, 1, -1, 3});
  const ProblemInstance inst = make_affine_instance(
      {a1, DenseMatrix::identity(2, 0.5)}, {Vector{1, 0}, Vector{0, 1}},
      {SlotKind::kBackward, SlotKind::kForward}, 0);
  ASSERT_TRUE(inst.meta.mu.has_value());
  EXPECT_NEAR(*inst.meta.mu, 2.0, 1e-12);
  EXPECT_EQ(*inst.meta.strong_index, 0u);
}

TEST(Affine, StronglyMonotoneGeneratorDeclaresExactModulus) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const ProblemInstance inst = make_strongly_monotone_affine(12, 2, 0.3, seed);
    ASSERT_TRUE(inst.meta.mu.has_value());
    EXPECT_NEAR(*inst.meta.mu, 0.3, 1e-10);
    EXPECT_EQ(*inst.meta.strong_index, 1u);
    EXPECT_NEAR(norm(inst.meta.oracle->z()), 1.0, 1e-12);
  }
}

TEST(Cocoercive, IdentityPlusShiftedDouble) {
  const Vector b{0.3, -1.2};
  const ProblemInstance inst = make_affine_instance(
      {DenseMatrix::identity(2), DenseMatrix::identity(2, 2.0)}, {Vector{0, 0}, b},
      {SlotKind::kForward, SlotKind::kForward}, 1);
  EXPECT_NEAR(inst.meta.oracle->z()[0], -0.1, 1e-15);
  EXPECT_NEAR(inst.meta.oracle->z()[1], 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(*inst.meta.cocoercivity[0], 1.0);
  EXPECT_LE(probe_constants(*inst.slots[0].op, 100, 14), 1e-8);
}

TEST(Cocoercive, GeneratorSupportsContractionConstant) {
  ProblemInstance inst = make_cocoercive_strong(10, 3, 0.5, 15);
  for (std::size_t i = 0; i + 1 < inst.n(); ++i) EXPECT_TRUE(inst.meta.cocoercivity[i].has_value());
  SolverConfig cfg = resolve_config(inst.slots, SolverConfig{});
  const RateConstants c = compute_constants(inst.meta, cfg, inst.zero_start(1.0));
  ASSERT_TRUE(c.e5.has_value());
  EXPECT_GT(*c.e5, 0.0);
  EXPECT_LE(*c.e5, 0.25);
}

TEST(Feasibility, OverlappingBoxes) {
  const ProblemInstance inst = make_two_box_feasibility(Vector{0}, Vector{2}, Vector{1}, Vector{3});
  const double z = inst.meta.oracle->z()[0];
  EXPECT_GE(z, 1.0);
  EXPECT_LE(z, 2.0);
  EXPECT_FALSE(inst.meta.single_point_rate_applicable);
  EXPECT_THROW(make_two_box_feasibility(Vector{0}, Vector{1}, Vector{2}, Vector{3}), ConfigError);

  SolverConfig cfg = resolve_config(inst.slots, SolverConfig{});
  const RateConstants c = compute_constants(inst.meta, cfg, inst.zero_start(1.0));
  EXPECT_FALSE(c.e4.has_value());
  EXPECT_THROW(require_certificate_inputs(CertificateKind::kErgodicGapSinglePoint, inst.meta, c),
               ConfigError);
}

TEST(Generators, OracleLiesInSolutionSet) {
  for (const auto& inst : sample_instances()) {
    EXPECT_LE(solution_set_residual(inst.slots, *inst.meta.oracle), 1e-10) << inst.description;
    EXPECT_EQ(inst.meta.n, inst.n());
    EXPECT_EQ(inst.meta.kinds.size(), inst.n());
  }
}

TEST(Generators, DeclaredConstantsSurviveProbe) {
  std::uint64_t seed = 100;
  for (const auto& inst : sample_instances())
    for (const auto& slot : inst.slots) {
      if (slot.op->is_single_valued()) {
        EXPECT_LE(probe_constants(*slot.op, 200, ++seed), 1e-8) << inst.description;
      }
    }
}

TEST(Generators, SolutionResidualDetectsNonSolutions) {
  const ProblemInstance inst = make_strongly_monotone_affine(4, 3, 0.2, 16);
  ProductPoint p = *inst.meta.oracle;
  p.z()[0] += 1e-3;
  EXPECT_GT(solution_set_residual(inst.slots, p), 1e-6);
}

TEST(Generators, DeterministicInSeed) {
  const auto a = sample_instances();
  const auto b = sample_instances();
  std::mt19937_64 rng(17);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(*a[i].meta.oracle, *b[i].meta.oracle);
    EXPECT_EQ(a[i].meta.mu, b[i].meta.mu);
    for (std::size_t s = 0; s < a[i].n(); ++s) {
      const Vector z = random_vector(rng, a[i].dim());
      EXPECT_EQ(a[i].slots[s].op->resolvent(z, 0.7), b[i].slots[s].op->resolvent(z, 0.7));
    }
  }
  EXPECT_NE(*make_lasso(5, 8, 0.3, 1).meta.oracle, *make_lasso(5, 8, 0.3, 2).meta.oracle);
}

TEST(Generators, OrthonormalFactors) {
  const DenseMatrix q = random_orthonormal(9, 4, 18);
  const DenseMatrix g = q.gram();
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(g(r, c), r == c ? 1.0 : 0.0, 1e-14);
  EXPECT_THROW(random_orthonormal(3, 4, 1), DimensionError);
}

TEST(Generators, GammaRescalesOracle) {
  ProblemInstance inst = make_lasso(5, 8, 0.3, 19);
  inst.set_gamma(3.0);
  EXPECT_EQ(inst.meta.oracle->gamma(), 3.0);
  EXPECT_EQ(inst.zero_start(3.0).gamma(), 3.0);
}
