#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "projsplit/errors.hpp"
#include "projsplit/problems.hpp"
#include "projsplit/rates.hpp"
#include "projsplit/solver.hpp"
#include "test_support.hpp"

using namespace projsplit;

namespace {

struct RunResult {
  ProblemInstance inst;
  SolverConfig config;
  RateConstants constants;
  SolveOutcome outcome;

  CertificateInputs inputs() const {
    return CertificateInputs{&outcome.trace, &inst.slots, &inst.meta, &constants, &config};
  }
  Certificate check(CertificateKind kind) const { return run_certificate(kind, inputs()); }
};

RunResult run(ProblemInstance inst, SolverConfig config, std::size_t iters) {
  RunResult r;
  r.inst = std::move(inst);
  r.inst.set_gamma(config.gamma);
  config.max_iters = iters;
  r.config = resolve_config(r.inst.slots, config);
  const ProductPoint start = r.inst.zero_start(r.config.gamma);
  r.constants = compute_constants(r.inst.meta, r.config, start);
  r.outcome = solve(r.inst.slots, r.config, start);
  return r;
}

ProblemMeta single_backward_meta() {
  ProblemMeta m;
  m.n = 1;
  m.kinds = {SlotKind::kBackward};
  m.lipschitz = {std::nullopt};
  m.cocoercivity = {std::nullopt};
  m.ball_lipschitz = {std::nullopt};
  return m;
}

}  // namespace

// ---- constants -----------------------------------------------------------------------------

TEST(Constants, SingleBackwardPlugIn) {
  std::vector<OperatorSlot> slots = {OperatorSlot::backward(make_soft_threshold(1, 1.0))};
  const SolverConfig cfg = resolve_config(slots, SolverConfig{});
  const RateConstants c = compute_constants(single_backward_meta(), cfg);
  EXPECT_DOUBLE_EQ(c.xi1, 6.0);
  EXPECT_DOUBLE_EQ(c.xi2, 1.0);
  EXPECT_DOUBLE_EQ(c.alpha_lb, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(c.tau, 1.0);
  EXPECT_FALSE(c.e3.has_value());
  EXPECT_FALSE(c.e5.has_value());
}

TEST(Constants, MixedPairPlugIn) {
  // backward (rho 1) + forward with L = 2 (rho 0.25), gamma = beta = 1, sigma = delta = 0:
  //   xi1 = 4 (1 + 2 (4 + 16)) = 164, xi2 = min(1, 4 - 2) = 1,
  //   E1 = 2/0.25 (1 + 2 * 1.5) * 164 = 5248,
  //   E2 = 82 (1 + (3 + 2 E1) + 0.25 (2 + E1)) = 968625
  ProblemMeta m;
  m.n = 2;
  m.kinds = {SlotKind::kBackward, SlotKind::kForward};
  m.lipschitz = {std::nullopt, 2.0};
  m.cocoercivity = {std::nullopt, 2.0};
  m.ball_lipschitz = {std::nullopt, std::nullopt};
  SolverConfig cfg;
  cfg.rho = {ParameterRule::constant(1.0), ParameterRule::constant(0.25)};
  const RateConstants c = compute_constants(m, cfg);
  EXPECT_DOUBLE_EQ(c.xi1, 164.0);
  EXPECT_DOUBLE_EQ(c.xi2, 1.0);
  EXPECT_DOUBLE_EQ(c.alpha_lb, 1.0 / 164.0);
  EXPECT_DOUBLE_EQ(c.e1, 5248.0);
  EXPECT_DOUBLE_EQ(c.e2, 968625.0);
  EXPECT_DOUBLE_EQ(c.rho_n, 0.25);
  EXPECT_DOUBLE_EQ(c.l_bar, 2.0);
}

TEST(Constants, RelaxationEntersTau) {
  std::vector<OperatorSlot> slots = {OperatorSlot::backward(make_soft_threshold(1, 1.0))};
  SolverConfig cfg;
  cfg.beta = ParameterRule::sequence(0.5, 1.5, [](std::size_t) { return 1.0; });
  cfg = resolve_config(slots, cfg);
  const RateConstants c = compute_constants(single_backward_meta(), cfg);
  EXPECT_DOUBLE_EQ(c.tau, 1.0 / (0.5 * 0.5));
  EXPECT_DOUBLE_EQ(c.alpha_lb, 0.5 / 6.0);
  EXPECT_DOUBLE_EQ(c.strong_rate_factor, 2.5);
}

TEST(Constants, MonotoneInDelta) {
  const ProblemInstance inst = make_lasso(5, 8, 0.3, 1);
  double prev_xi1 = 0.0, prev_alpha = 1e300;
  for (double delta : {0.0, 0.01, 0.1, 0.5, 1.0, 4.0}) {
    SolverConfig cfg;
    cfg.delta = delta;
    cfg = resolve_config(inst.slots, cfg);
    const RateConstants c = compute_constants(inst.meta, cfg);
    EXPECT_GT(c.xi1, prev_xi1);
    EXPECT_LT(c.alpha_lb, prev_alpha);
    prev_xi1 = c.xi1;
    prev_alpha = c.alpha_lb;
  }
}

TEST(Constants, ForwardStepsizeSweep) {
  // xi2 = min((1 - sigma)/rho_B, 1/rho_F - L): shrinking rho_F lifts the forward
  // term until the backward branch is the minimum.
  const ProblemInstance inst = make_lasso(4, 6, 0.3, 2);
  const double lip = *inst.meta.lipschitz[1];
  const double sigma = 0.2;
  double prev = 0.0;
  for (double frac : {0.99, 0.9, 0.7, 0.5, 0.3, 0.1, 0.01}) {
    SolverConfig cfg;
    cfg.sigma = sigma;
    cfg.rho = {ParameterRule::constant(1.0), ParameterRule::constant(frac / lip)};
    const RateConstants c = compute_constants(inst.meta, resolve_config(inst.slots, cfg));
    EXPECT_GE(c.xi2, prev);
    EXPECT_LE(c.xi2, 1.0 - sigma);
    prev = c.xi2;
  }
  EXPECT_DOUBLE_EQ(prev, 1.0 - sigma);
}

TEST(Constants, ContractionConstantRange) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 4;
    ProblemMeta m;
    m.n = n;
    for (std::size_t i = 0; i < n; ++i) {
      const bool fwd = u(rng) < 0.5;
      m.kinds.push_back(fwd ? SlotKind::kForward : SlotKind::kBackward);
      const double l = 0.1 + 10 * u(rng);
      m.lipschitz.push_back(l);
      m.cocoercivity.push_back(l);
      m.ball_lipschitz.push_back(std::nullopt);
    }
    m.mu = 1e-3 + u(rng);
    m.strong_index = n - 1;
    SolverConfig cfg;
    cfg.gamma = std::exp(4 * u(rng) - 2);
    const double b = 0.1 + 1.8 * u(rng);
    cfg.beta = ParameterRule::constant(b);
    cfg.sigma = 0.9 * u(rng);
    cfg.delta = u(rng);
    for (std::size_t i = 0; i < n; ++i)
      cfg.rho.push_back(ParameterRule::constant(
          m.kinds[i] == SlotKind::kForward ? u(rng) * 0.99 / *m.lipschitz[i] + 1e-6
                                           : 0.1 + 3 * u(rng)));
    const RateConstants c = compute_constants(m, cfg);
    ASSERT_TRUE(c.e5.has_value());
    EXPECT_GT(*c.e5, 0.0);
    EXPECT_LE(*c.e5, 0.25);
    EXPECT_GT(c.xi2, 0.0);
    EXPECT_GT(c.alpha_lb, 0.0);
    // E5 is tiny, so 1 - E5 may round to 1
    EXPECT_LE(*c.contraction_factor, 1.0);
    EXPECT_NEAR(1.0 - *c.contraction_factor, std::min(1.0, 1.0 / c.tau) * *c.e5, 1e-16);
  }
}

TEST(Constants, BoundsAtZeroRadius) {
  // p^1 = p*: Bx^2 = 2 |p*|^2 / gamma
  ProblemInstance inst = make_strongly_monotone_affine(3, 2, 0.5, 3);
  inst.set_gamma(2.0);
  SolverConfig cfg;
  cfg.gamma = 2.0;
  cfg = resolve_config(inst.slots, cfg);
  const RateConstants c = compute_constants(inst.meta, cfg, *inst.meta.oracle);
  EXPECT_EQ(*c.radius, 0.0);
  const double ps2 = gamma_norm_sq(*inst.meta.oracle);
  EXPECT_NEAR(*c.bx * *c.bx, 2.0 * ps2 / 2.0, 1e-12 * ps2);
  const SolveOutcome out = solve(inst.slots, cfg, *inst.meta.oracle);
  EXPECT_EQ(out.status, SolveStatus::kConverged);
  EXPECT_LE(std::sqrt(gamma_dist_sq(out.point, *inst.meta.oracle)), 1e-10);
}

TEST(Constants, MissingMetadata) {
  std::vector<OperatorSlot> slots = {OperatorSlot::backward(make_soft_threshold(1, 1.0))};
  const SolverConfig cfg = resolve_config(slots, SolverConfig{});
  const RateConstants c = compute_constants(single_backward_meta(), cfg);
  try {
    require_certificate_inputs(CertificateKind::kStrongRate, single_backward_meta(), c);
    FAIL() << "expected a metadata error";
  } catch (const MetadataError& e) {
    EXPECT_NE(std::string(e.what()).find("metadata required"), std::string::npos);
  }
  EXPECT_THROW(require_certificate_inputs(CertificateKind::kFejer, single_backward_meta(), c),
               MetadataError);
  EXPECT_NO_THROW(require_certificate_inputs(CertificateKind::kAlphaLB, single_backward_meta(), c));
}

TEST(Certificates, NamesRoundTrip) {
  for (const auto& name : certificate_names()) {
    const auto kind = certificate_kind_from_string(name);
    ASSERT_TRUE(kind.has_value()) << name;
    EXPECT_EQ(to_string(*kind), name);
  }
  EXPECT_FALSE(certificate_kind_from_string("fejér").has_value());
}

// ---- ledger ---------------------------------------------------------------------------------

TEST(Ledger, QuadraticGeometricSum) {
  // f = (x - 1)^2 / 2 from z = 0: steps 2^-k, sum 1/3 < tau R^2 / gamma = 1
  ProblemInstance inst = make_affine_instance({DenseMatrix::identity(1)}, {Vector{-1}},
                                              {SlotKind::kBackward});
  SolverConfig cfg;
  cfg.pi_tolerance = 0.0;
  const RunResult r = run(inst, cfg, 60);
  SummabilityLedger ledger;
  for (const auto& rec : r.outcome.trace) update_ledger(ledger, rec);
  EXPECT_NEAR(ledger.dz, 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(*r.constants.radius, 1.0);
  const LedgerResiduals res = ledger_residuals(ledger, r.outcome.trace.back(), r.constants);
  EXPECT_NEAR(res.dz, 1.0 - 1.0 / 3.0, 1e-15);
  EXPECT_GE(res.worst(), 0.0);
  EXPECT_TRUE(r.check(CertificateKind::kSummability).pass);
  // bounds with room to spare
  const Certificate b = r.check(CertificateKind::kBounds);
  EXPECT_TRUE(b.pass);
  EXPECT_LT(b.violation, 0.0);
}

TEST(Ledger, TerminalRecordLeavesSumsUntouched) {
  ProblemInstance inst = make_affine_instance({DenseMatrix::identity(1), DenseMatrix::identity(1)},
                                              {Vector{1}, Vector{-3}},
                                              {SlotKind::kBackward, SlotKind::kForward});
  SolverConfig cfg = resolve_config(inst.slots, SolverConfig{});
  const RateConstants c = compute_constants(inst.meta, cfg, *inst.meta.oracle);
  const SolveOutcome out = solve(inst.slots, cfg, *inst.meta.oracle);
  ASSERT_EQ(out.trace.size(), 1u);
  ASSERT_TRUE(out.trace[0].terminal);
  SummabilityLedger ledger;
  update_ledger(ledger, out.trace[0]);
  EXPECT_EQ(ledger.steps, 0u);
  const LedgerResiduals res = ledger_residuals(ledger, out.trace[0], c);
  EXPECT_EQ(res.dz, 0.0);
  EXPECT_TRUE(std::isnan(res.zx_step));
  EXPECT_EQ(res.worst(), 0.0);
}

TEST(Ledger, RandomThreeOperatorCaps) {
  for (std::uint64_t seed : {61u, 62u, 63u}) {
    const RunResult r = run(make_strongly_monotone_affine(6, 3, 0.05, seed), SolverConfig{}, 1000);
    const Certificate c = r.check(CertificateKind::kSummability);
    EXPECT_TRUE(c.pass) << c.detail;
    const Certificate b = r.check(CertificateKind::kBounds);
    EXPECT_TRUE(b.pass) << b.detail;
  }
}

// ---- averages ---------------------------------------------------------------------------------

TEST(Averages, Examples) {
  std::vector<IterationRecord> trace(2);
  for (std::size_t t = 0; t < 2; ++t) {
    trace[t].k = t + 1;
    trace[t].p_before = ProductPoint(Vector{0}, {}, 1.0);
  }
  trace[0].alpha = 1.0;
  trace[0].x = {Vector{0}};
  trace[1].alpha = 3.0;
  trace[1].x = {Vector{4}};
  EXPECT_EQ(ergodic_averages(trace, 1)[0], Vector{0});
  EXPECT_EQ(ergodic_averages(trace, 2)[0], Vector{3});
  EXPECT_EQ(uniform_average(trace, 0, 2), Vector{2});
  trace[1].x = {Vector{0}};
  EXPECT_EQ(ergodic_averages(trace, 2)[0], Vector{0});
}

// ---- certificates on runs ----------------------------------------------------------------

TEST(Certificates, HyperplaneFamilyOnRandomInstances) {
  int idx = 0;
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    std::vector<SlotKind> kinds;
    for (std::size_t i = 0; i < n; ++i)
      kinds.push_back((i + idx) % 2 ? SlotKind::kForward : SlotKind::kBackward);
    const RunResult r = run(make_strongly_monotone_affine(7, n, 0.02, 70 + idx, kinds), SolverConfig{}, 800);
    ++idx;
    for (CertificateKind k : {CertificateKind::kFejer, CertificateKind::kSeparation,
                              CertificateKind::kAlphaLB, CertificateKind::kPhiLB,
                              CertificateKind::kGradUB, CertificateKind::kUpdateIdentity}) {
      const Certificate c = r.check(k);
      EXPECT_TRUE(c.pass) << to_string(k) << " n=" << n << ": " << c.detail;
      EXPECT_GT(c.checked, 0u);
    }
  }
}

TEST(Certificates, DetectTamperedTraces) {
  RunResult r = run(make_strongly_monotone_affine(4, 2, 0.1, 80), SolverConfig{}, 50);
  ASSERT_TRUE(r.check(CertificateKind::kFejer).pass);
  ASSERT_TRUE(r.check(CertificateKind::kUpdateIdentity).pass);
  // push one iterate away from the hyperplane projection
  r.outcome.trace[10].p_after.z()[0] += 0.5;
  EXPECT_FALSE(r.check(CertificateKind::kUpdateIdentity).pass);
  EXPECT_FALSE(r.check(CertificateKind::kFejer).pass);
  // a step length below the guaranteed minimum
  RunResult s = run(make_strongly_monotone_affine(4, 2, 0.1, 81), SolverConfig{}, 20);
  s.outcome.trace[3].alpha = 0.5 * s.constants.alpha_lb;
  EXPECT_FALSE(s.check(CertificateKind::kAlphaLB).pass);
  // thinned traces are refused
  s.outcome.trace.erase(s.outcome.trace.begin() + 5);
  EXPECT_THROW(s.check(CertificateKind::kFejer), ConfigError);
}

TEST(Certificates, LassoErgodicGap) {
  const RunResult r = run(make_lasso(20, 40, 0.5, 90), SolverConfig{}, 1000);
  const Certificate c = r.check(CertificateKind::kErgodicGap);
  EXPECT_TRUE(c.pass) << c.detail;
  const Certificate single = r.check(CertificateKind::kErgodicGapSinglePoint);
  EXPECT_TRUE(single.pass) << single.detail;
}

TEST(Certificates, ScalarLassoFiniteTermination) {
  // d = 1, A = 1, b = 1, lambda = 0.5: the run reaches the pi test and every x_j^K is
  // optimal.
  const RunResult r = run(make_lasso_from_data(DenseMatrix(1, 1, 1.0), Vector{1}, 0.5), SolverConfig{}, 10000);
  ASSERT_EQ(r.outcome.status, SolveStatus::kConverged);
  EXPECT_TRUE(r.check(CertificateKind::kErgodicGap).pass);
  for (const Vector& x : r.outcome.trace.back().x) EXPECT_NEAR(x[0], 0.5, 1e-10);
}

TEST(Certificates, StrongRateAndSeparation) {
  const RunResult r = run(make_strongly_monotone_affine(10, 2, 0.3, 91), SolverConfig{}, 2000);
  const Certificate c = r.check(CertificateKind::kStrongRate);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Certificates, StrongRateInnerInequalityAtSolution) {
  // x_l = z*: right side is zero and the separation gap is nonnegative
  ProblemInstance inst = make_strongly_monotone_affine(3, 2, 0.5, 92);
  SolverConfig cfg = resolve_config(inst.slots, SolverConfig{});
  Solver s(inst.slots, cfg, *inst.meta.oracle);
  const IterationRecord rec = s.iterate();
  const double sep = phi_value(rec, rec.p_before) - phi_value(rec, *inst.meta.oracle);
  EXPECT_LE(dist_sq(rec.x[1], inst.meta.oracle->z()), 1e-20);
  EXPECT_GE(sep, -1e-12);
}

TEST(Certificates, StrongRateDecaysLikeOneOverK) {
  SolverConfig cfg;
  cfg.pi_tolerance = 0.0;
  const RunResult r = run(make_strongly_monotone_affine(10, 2, 0.05, 93), cfg, 4000);
  ASSERT_GE(r.outcome.trace.size(), 4000u);
  const ProductPoint& ps = *r.inst.meta.oracle;
  const std::size_t l = *r.inst.meta.strong_index;
  // least-squares slope of log |xavg - z*|^2 against log k over the second half
  Vector sum(ps.dim());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  double worst_c = 0.0;
  for (std::size_t t = 0; t < r.outcome.trace.size(); ++t) {
    sum += r.outcome.trace[t].x[l];
    const double k = static_cast<double>(t + 1);
    const double e = dist_sq((1.0 / k) * sum, ps.z());
    worst_c = std::max(worst_c, k * e);
    if (t + 1 >= 2000 && e > 0) {
      const double lx = std::log(k), ly = std::log(e);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; m += 1;
    }
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  EXPECT_LE(slope, -1.0 + 0.05);
  const double bound = r.constants.strong_rate_factor * r.constants.xi1 * *r.constants.radius *
                       *r.constants.radius / (r.constants.beta_lo * r.constants.xi2 * *r.inst.meta.mu);
  EXPECT_LE(worst_c, bound);
}

TEST(Certificates, LinearContractionOnCocoerciveInstance) {
  const RunResult r = run(make_cocoercive_strong(6, 2, 0.5, 94), SolverConfig{}, 500);
  ASSERT_TRUE(r.constants.e5.has_value());
  EXPECT_GT(*r.constants.e5, 0.0);
  EXPECT_LE(*r.constants.e5, 0.25);
  const Certificate c = r.check(CertificateKind::kLinearContraction);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Certificates, PhiAndGradientVanish) {
  for (std::uint64_t seed : {95u, 96u}) {
    SolverConfig cfg;
    cfg.pi_tolerance = 0.0;
    const RunResult r = run(make_strongly_monotone_affine(20, 3, 0.01, seed), cfg, 2000);
    ASSERT_EQ(r.outcome.trace.size(), 2000u);
    double first_phi = 0, last_phi = 0, first_g = 0, last_g = 0;
    for (std::size_t t = 0; t < 200; ++t) {
      first_phi += r.outcome.trace[t].phi;
      first_g += std::sqrt(r.outcome.trace[t].pi);
      last_phi += r.outcome.trace[1800 + t].phi;
      last_g += std::sqrt(r.outcome.trace[1800 + t].pi);
    }
    EXPECT_LE(last_phi, first_phi / 10.0);
    EXPECT_LE(last_g, first_g / 10.0);
  }
}

TEST(Certificates, TwoSetFeasibility) {
  ProblemInstance inst = make_two_box_feasibility(Vector{0}, Vector{2}, Vector{1}, Vector{3});
  const RunResult r = run(inst, SolverConfig{}, 500);
  const double z = r.outcome.point.z()[0];
  EXPECT_GE(z, 1.0 - 1e-9);
  EXPECT_LE(z, 2.0 + 1e-9);
  EXPECT_THROW(require_certificate_inputs(CertificateKind::kErgodicGapSinglePoint, r.inst.meta,
                                          r.constants),
               ConfigError);
  const Certificate c = r.check(CertificateKind::kErgodicGap);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(TraceMetrics, RowsFollowTheTrace) {
  const RunResult r = run(make_lasso(6, 10, 0.2, 97), SolverConfig{}, 40);
  const auto rows = trace_metrics(r.outcome.trace, r.inst.slots, r.inst.meta, r.constants, true);
  ASSERT_EQ(rows.size(), r.outcome.trace.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].k, i + 1);
    EXPECT_EQ(rows[i].pi, r.outcome.trace[i].pi);
    EXPECT_NEAR(rows[i].norm_grad_gamma * rows[i].norm_grad_gamma, rows[i].pi, 1e-12 * (1 + rows[i].pi));
    ASSERT_TRUE(rows[i].caps.has_value());
    ASSERT_TRUE(rows[i].f_gap.has_value());
    EXPECT_GE(rows[i].caps->worst(), -1e-8);
  }
  EXPECT_NEAR(*rows[0].dist_p_to_pstar_gamma, *r.constants.radius, 1e-14);
  const auto no_ledger = trace_metrics(r.outcome.trace, r.inst.slots, r.inst.meta, r.constants, false);
  EXPECT_FALSE(no_ledger[0].caps.has_value());
}

// Overrelaxed steps (beta > 1) decrease |p - p*|^2 by (2 - beta)/beta |p^{k+1} - p^k|^2,
// which is less than the beta (2 - beta) multiple the recursion certificate asks for.
TEST(Certificates, OverrelaxationBreaksStatedRecursion) {
  SolverConfig cfg;
  cfg.beta = ParameterRule::constant(1.8);
  const RunResult r = run(make_two_set_feasibility(10, 107), cfg, 20);
  EXPECT_FALSE(r.check(CertificateKind::kFejer).pass);

  const ProductPoint& ps = *r.inst.meta.oracle;
  for (const auto& rec : r.outcome.trace) {
    const double step = gamma_dist_sq(rec.p_after, rec.p_before);
    EXPECT_LE(gamma_dist_sq(rec.p_after, ps),
              gamma_dist_sq(rec.p_before, ps) - (2.0 - rec.beta) / rec.beta * step + 1e-9)
        << "k=" << rec.k;
  }

  cfg.beta = ParameterRule::constant(0.6);
  EXPECT_TRUE(run(make_two_set_feasibility(10, 107), cfg, 200).check(CertificateKind::kFejer).pass);
}
