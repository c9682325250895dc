#pragma once

#include "pantr/core.hpp"

#include <functional>
#include <optional>

namespace pantr::bench {

/// Pair of vector-Jacobian products (d/dx)^T w and (d/du)^T w.
struct Vjp {
  vec x;
  vec u;
};

/// Continuous-time dynamics x' = f(x, u).
struct ContinuousModel {
  index_t nx = 0;
  index_t nu = 0;
  std::function<vec(crvec, crvec)> f;
  std::function<Vjp(crvec, crvec, crvec)> vjp;  // (x, u, w)
};

struct StageCost {
  std::function<real_t(crvec, crvec)> value;  // l(x, u)
  std::function<Vjp(crvec, crvec)> grad;
};

struct TerminalCost {
  std::function<real_t(crvec)> value;
  std::function<vec(crvec)> grad;
};

/// Path constraint c(x) imposed on x^1 .. x^N.
struct StateConstraint {
  index_t nc = 0;
  std::function<vec(crvec)> value;
  std::function<vec(crvec, crvec)> vjp;  // (x, w) -> grad c(x)^T w
};

/// Single-shooting transcription of
///   minimize sum_k l(x^k, u^k) + l_N(x^N)  s.t.  x^{k+1} = RK4(x^k, u^k).
struct ShootingProblem {
  ContinuousModel model;
  real_t Ts = 0.1;
  index_t horizon = 1;
  StageCost stage;
  TerminalCost terminal;
  std::optional<StateConstraint> constraint;
};

/// One explicit fourth-order Runge-Kutta step of length Ts.
vec rk4_step(const ContinuousModel& model, real_t Ts, crvec x, crvec u);

/// Transposed Jacobian products of rk4_step with respect to x and u.
Vjp rk4_vjp(const ContinuousModel& model, real_t Ts, crvec x, crvec u, crvec w);

struct Rollout {
  real_t cost = 0;
  mat states;  // nx x (N + 1), column k is x^k
};

/// Forward simulation and cost. Throws EvaluationError when the trajectory
/// becomes non-finite.
Rollout shoot(const ShootingProblem& sp, crvec x_init, crvec u_seq);

/// Gradient of shoot().cost with respect to u_seq by a reverse sweep.
vec shoot_adjoint(const ShootingProblem& sp, crvec x_init, crvec u_seq);

/// Stacked c(x^1), ..., c(x^N).
vec shoot_constraints(const ShootingProblem& sp, crvec x_init, crvec u_seq);

/// grad_u (sum_k <w_k, c(x^k)>).
vec shoot_constraints_vjp(const ShootingProblem& sp, crvec x_init, crvec u_seq, crvec w);

}  // namespace pantr::bench
