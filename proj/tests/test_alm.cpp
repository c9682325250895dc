#include "pantr/alm.hpp"

#include "support/problems.hpp"

#include <gtest/gtest.h>

using namespace pantr;
using namespace testing_support;

namespace {

vec v1(real_t a) { return vec::Constant(1, a); }
vec v2(real_t a, real_t b) { return (vec(2) << a, b).finished(); }

// min x^2  s.t.  x = 1,  x in [-10, 10]
ConstrainedNlp equality_nlp() {
  ConstrainedNlp nlp;
  nlp.n = 1;
  nlp.m = 1;
  nlp.eval_f = [](crvec x) { return x(0) * x(0); };
  nlp.eval_grad_f = [](crvec x) { return vec(2 * x); };
  nlp.eval_g = [](crvec x) { return vec(x); };
  nlp.eval_g_jvp_t = [](crvec, crvec w) { return vec(w); };
  nlp.C = Box::make(v1(-10), v1(10));
  nlp.D = Box::make(v1(1), v1(1));
  return nlp;
}

// min ||x - (2, 2)||^2  s.t.  x1 + x2 <= 2
ConstrainedNlp halfspace_nlp() {
  ConstrainedNlp nlp;
  nlp.n = 2;
  nlp.m = 1;
  nlp.eval_f = [](crvec x) { return (x - v2(2, 2)).squaredNorm(); };
  nlp.eval_grad_f = [](crvec x) { return vec(2 * (x - v2(2, 2))); };
  nlp.eval_g = [](crvec x) { return v1(x.sum()); };
  nlp.eval_g_jvp_t = [](crvec, crvec w) { return vec(vec::Constant(2, w(0))); };
  nlp.C = Box::unbounded(2);
  nlp.D = Box::make(v1(-inf), v1(2));
  return nlp;
}

// min 1/2 ||x||^2 - <c, x>  s.t.  ||x||^2 <= 1, x in [-2, 2]^3 with exact
// second derivatives available.
ConstrainedNlp ball_nlp(bool exact) {
  const vec c = (vec(3) << 2, -1, 0.5).finished();
  ConstrainedNlp nlp;
  nlp.n = 3;
  nlp.m = 1;
  nlp.eval_f = [c](crvec x) { return 0.5 * x.squaredNorm() - c.dot(x); };
  nlp.eval_grad_f = [c](crvec x) { return vec(x - c); };
  nlp.eval_g = [](crvec x) { return v1(x.squaredNorm()); };
  nlp.eval_g_jvp_t = [](crvec x, crvec w) { return vec(2 * w(0) * x); };
  nlp.C = Box::make(vec::Constant(3, -2), vec::Constant(3, 2));
  nlp.D = Box::make(v1(-inf), v1(1));
  if (exact) {
    nlp.eval_f_hvp = [](crvec, crvec v) { return vec(v); };
    nlp.eval_g_jvp = [](crvec x, crvec v) { return v1(2 * x.dot(v)); };
    nlp.eval_g_hvp = [](crvec, crvec w, crvec v) { return vec(2 * w(0) * v); };
  }
  return nlp;
}

real_t dual_residual(const ConstrainedNlp& nlp, crvec x, crvec y) {
  const vec grad = nlp.eval_grad_f(x) + nlp.eval_g_jvp_t(x, y);
  return (x - nlp.C.project(x - grad)).lpNorm<Eigen::Infinity>();
}

AlmState state(const ConstrainedNlp& nlp, const vec& y, real_t sigma) {
  AlmParams params;
  params.y0 = y;
  params.initial_penalty = sigma;
  params.sigma_max = std::max(sigma, params.sigma_max);
  return initial_alm_state(nlp, params);
}

}  // namespace

TEST(BuildInner, EqualityPenaltyExpansion) {
  ConstrainedNlp nlp = equality_nlp();
  nlp.D = Box::make(v1(0), v1(0));
  const real_t sigma = 7, y = 0.4;
  const CompositeProblem p = build_inner(nlp, state(nlp, v1(y), sigma));
  for (real_t x : {-1.3, 0.0, 0.25, 2.0}) {
    EXPECT_NEAR(p.eval_f(v1(x)), x * x + sigma / 2 * std::pow(x + y / sigma, 2), 1e-12);
    EXPECT_NEAR(p.eval_grad_f(v1(x))(0), 2 * x + sigma * x + y, 1e-12);
  }
  EXPECT_TRUE(std::holds_alternative<Box>(p.nonsmooth));
}

TEST(BuildInner, InteriorConstraintLeavesObjective) {
  const ConstrainedNlp nlp = halfspace_nlp();
  const CompositeProblem p = build_inner(nlp, state(nlp, v1(0), 1e4));
  const vec x = v2(0.2, -0.3);
  EXPECT_EQ(p.eval_f(x), nlp.eval_f(x));
  EXPECT_EQ(p.eval_grad_f(x), nlp.eval_grad_f(x));
}

TEST(BuildInner, FiniteDifferenceHessianOfPenalty) {
  ConstrainedNlp nlp = equality_nlp();
  nlp.eval_f = [](crvec) { return 0.0; };
  nlp.eval_grad_f = [](crvec) { return vec(vec::Zero(1)); };
  nlp.D = Box::make(v1(0), v1(0));
  const real_t sigma = 1e4;
  const CompositeProblem p = build_inner(nlp, state(nlp, v1(3), sigma));
  for (real_t x : {-5.0, 0.1, 8.0}) EXPECT_NEAR(p.eval_hvp(v1(x), v1(1))(0), sigma, 1e-4 * sigma);
  EXPECT_EQ(p.eval_hvp(v1(1), v1(0))(0), 0);
}

TEST(BuildInner, ExactHessianHook) {
  const ConstrainedNlp exact = ball_nlp(true);
  const ConstrainedNlp approx = ball_nlp(false);
  ASSERT_TRUE(exact.has_exact_hessian());
  ASSERT_FALSE(approx.has_exact_hessian());
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const vec y = random_vec(rng, 1);
    const vec x = random_vec(rng, 3);
    const vec v = random_vec(rng, 3);
    const vec he = build_inner(exact, state(exact, y, 10)).eval_hvp(x, v);
    const vec ha = build_inner(approx, state(approx, y, 10)).eval_hvp(x, v);
    EXPECT_LE((he - ha).norm(), 1e-5 * (1 + he.norm()));
  }
}

TEST(BuildInner, GradientMatchesFiniteDifferences) {
  const ConstrainedNlp nlp = ball_nlp(false);
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const CompositeProblem p = build_inner(nlp, state(nlp, random_vec(rng, 1), 3));
    const vec x = random_vec(rng, 3);
    const vec fd = fd_gradient(p.eval_f, x);
    EXPECT_LE((fd - p.eval_grad_f(x)).norm(), 1e-5 * (1 + fd.norm()));
  }
}

TEST(UpdateMultipliers, FeasiblePointKeepsMultiplier) {
  ConstrainedNlp nlp = equality_nlp();
  nlp.D = Box::make(v1(0), v1(0));
  const AlmState next = update_multipliers(nlp, state(nlp, v1(2.5), 10), v1(0));
  EXPECT_DOUBLE_EQ(next.y(0), 2.5);
  EXPECT_EQ(next.violation, 0);
}

TEST(UpdateMultipliers, PenaltyGradientIdentity) {
  ConstrainedNlp nlp = equality_nlp();
  nlp.D = Box::make(v1(0), v1(0));
  const AlmState next = update_multipliers(nlp, state(nlp, v1(0), 10), v1(0.3));
  EXPECT_DOUBLE_EQ(next.y(0), 3);
  EXPECT_DOUBLE_EQ(next.violation, 0.3);
}

TEST(UpdateMultipliers, DeepInteriorGivesZero) {
  const ConstrainedNlp nlp = halfspace_nlp();
  const AlmState next = update_multipliers(nlp, state(nlp, v1(0), 1e4), v2(-5, -5));
  EXPECT_EQ(next.y(0), 0);
  EXPECT_EQ(next.violation, 0);
}

TEST(UpdateMultipliers, LipschitzInX) {
  const ConstrainedNlp nlp = ball_nlp(false);
  std::mt19937_64 rng(53);
  const real_t sigma = 20;
  for (int trial = 0; trial < 100; ++trial) {
    const AlmState st = state(nlp, random_vec(rng, 1), sigma);
    const vec x = random_vec(rng, 3).cwiseMax(-2).cwiseMin(2);
    const vec dx = random_vec(rng, 3, 1e-4);
    const real_t dy = (update_multipliers(nlp, st, x + dx).y - update_multipliers(nlp, st, x).y).norm();
    // Lipschitz constant of g on the segment: 2 max ||x||.
    const real_t Lg = 2 * std::max(x.norm(), (x + dx).norm());
    EXPECT_LE(dy, sigma * Lg * dx.norm() * (1 + 1e-6) + 1e-12);
  }
}

TEST(UpdatePenalty, ProgressKeepsPenalty) {
  const ConstrainedNlp nlp = halfspace_nlp();
  AlmState st = state(nlp, v1(0), 1e4);
  st.inner_tol = 1;
  st.row_violation = v1(0.4);
  const AlmState next = update_penalty(st, v1(1.0), AlmParams{});
  EXPECT_EQ(next.sigma(0), 1e4);
  EXPECT_DOUBLE_EQ(next.inner_tol, 0.1);
}

TEST(UpdatePenalty, StagnationMultipliesByFive) {
  const ConstrainedNlp nlp = halfspace_nlp();
  AlmState st = state(nlp, v1(0), 1e4);
  st.row_violation = v1(0.9);
  EXPECT_EQ(update_penalty(st, v1(1.0), AlmParams{}).sigma(0), 5e4);
}

TEST(UpdatePenalty, SatisfiedRowsUntouched) {
  const ConstrainedNlp nlp = halfspace_nlp();
  AlmState st = state(nlp, v1(0), 1e4);
  st.row_violation = v1(1e-12);
  EXPECT_EQ(update_penalty(st, v1(1e-12), AlmParams{}).sigma(0), 1e4);
}

TEST(UpdatePenalty, ToleranceFloorAndPenaltyCap) {
  const ConstrainedNlp nlp = halfspace_nlp();
  AlmParams params;
  AlmState st = state(nlp, v1(0), params.sigma_max);
  st.inner_tol = 1e-8;
  st.row_violation = v1(1);
  const AlmState next = update_penalty(st, v1(1), params);
  EXPECT_EQ(next.inner_tol, 1e-8);
  EXPECT_EQ(next.sigma(0), params.sigma_max);
}

TEST(AlmSolve, EqualityConstraint) {
  const AlmResult r = alm_solve(equality_nlp(), v1(0));
  EXPECT_EQ(r.stats.status, AlmStatus::converged);
  EXPECT_NEAR(r.x(0), 1, 1e-6);
  EXPECT_NEAR(r.y(0), -2, 1e-5);
}

TEST(AlmSolve, ProjectionOntoHalfspace) {
  const AlmResult r = alm_solve(halfspace_nlp(), v2(0, 0));
  EXPECT_EQ(r.stats.status, AlmStatus::converged);
  EXPECT_LE((r.x - v2(1, 1)).lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_NEAR(r.y(0), 2, 1e-5);
}

TEST(AlmSolve, UnconstrainedDelegatesToInnerSolver) {
  std::mt19937_64 rng(54);
  const mat Q = random_spd(rng, 4, 0.5, 3);
  const vec c = random_vec(rng, 4);
  ConstrainedNlp nlp;
  nlp.n = 4;
  nlp.eval_f = [Q, c](crvec x) { return 0.5 * x.dot(Q * x) + c.dot(x); };
  nlp.eval_grad_f = [Q, c](crvec x) { return vec(Q * x + c); };
  nlp.eval_g = [](crvec) { return vec(0); };
  nlp.eval_g_jvp_t = [](crvec x, crvec) { return vec(vec::Zero(x.size())); };
  nlp.C = Box::make(vec::Constant(4, -0.5), vec::Constant(4, 0.5));
  nlp.D = Box::make(vec(0), vec(0));
  const AlmResult r = alm_solve(nlp, vec::Zero(4));
  PantrParams params;
  params.tol = AlmParams{}.final_tol;
  const SolveResult direct = pantr_solve(build_inner(nlp, initial_alm_state(nlp, {})), vec::Zero(4), params);
  EXPECT_EQ(r.stats.status, AlmStatus::converged);
  EXPECT_EQ(r.x, direct.x);
  EXPECT_EQ(r.stats.inner_iterations, direct.stats.iterations);
  EXPECT_EQ(r.y.size(), 0);
}

TEST(AlmSolve, ExactAndApproximateHessiansAgree) {
  const AlmResult a = alm_solve(ball_nlp(true), vec::Zero(3));
  const AlmResult b = alm_solve(ball_nlp(false), vec::Zero(3));
  ASSERT_EQ(a.stats.status, AlmStatus::converged);
  ASSERT_EQ(b.stats.status, AlmStatus::converged);
  EXPECT_LE((a.x - b.x).norm(), 1e-7);
  const vec c = (vec(3) << 2, -1, 0.5).finished();
  EXPECT_LE((a.x - c.normalized()).norm(), 1e-7);
}

TEST(AlmSolve, ProximalGradientInnerSolver) {
  AlmParams params;
  params.solver = InnerSolver::fbs;
  params.max_inner_iters = 100000;
  const AlmResult r = alm_solve(halfspace_nlp(), v2(0, 0), params);
  EXPECT_EQ(r.stats.status, AlmStatus::converged);
  EXPECT_LE((r.x - v2(1, 1)).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(AlmSolve, InfeasibleProblemIsFlagged) {
  ConstrainedNlp nlp = equality_nlp();
  nlp.C = Box::make(v1(-1), v1(1));
  nlp.D = Box::make(v1(5), v1(inf));
  const AlmResult r = alm_solve(nlp, v1(0));
  EXPECT_EQ(r.stats.status, AlmStatus::infeasible_suspected);
  EXPECT_NEAR(r.x(0), 1, 1e-6);
}

TEST(AlmSolve, OuterIterationLimit) {
  AlmParams params;
  params.max_outer_iters = 2;
  const AlmResult r = alm_solve(equality_nlp(), v1(0), params);
  EXPECT_EQ(r.stats.status, AlmStatus::max_outer_iters);
  EXPECT_EQ(r.stats.outer_iterations, 2u);
}

TEST(AlmSolve, InvalidParameters) {
  AlmParams params;
  params.penalty_factor = 1;
  EXPECT_THROW(alm_solve(equality_nlp(), v1(0), params), std::invalid_argument);
  params = {};
  params.y0 = v2(0, 0);
  EXPECT_THROW(alm_solve(equality_nlp(), v1(0), params), std::invalid_argument);
}

TEST(AlmProperty, ScheduleAndStationarity) {
  const ConstrainedNlp problems[] = {equality_nlp(), halfspace_nlp(), ball_nlp(false)};
  for (const auto& nlp : problems) {
    const AlmParams params;
    std::vector<real_t> tols;
    std::vector<vec> sigmas;
    const AlmResult r = alm_solve(nlp, vec::Zero(nlp.n), params,
                                  [&](const AlmState& st, const PantrStats& s) {
                                    tols.push_back(st.inner_tol);
                                    sigmas.push_back(st.sigma);
                                    EXPECT_LE(s.iterations, params.max_inner_iters);
                                  });
    ASSERT_EQ(r.stats.status, AlmStatus::converged);
    for (size_t k = 0; k < tols.size(); ++k)
      EXPECT_DOUBLE_EQ(tols[k], std::max(params.initial_inner_tol / std::pow(10.0, k), params.final_tol));
    for (size_t k = 1; k < sigmas.size(); ++k)
      EXPECT_TRUE((sigmas[k].array() >= sigmas[k - 1].array()).all());
    EXPECT_LE(dual_residual(nlp, r.x, r.y), 10 * params.final_tol);
    EXPECT_LE(r.stats.violation, params.constraint_tol);
  }
}
