#include "pantr/bench/shooting.hpp"

#include <cmath>
#include <vector>

namespace pantr::bench {

vec rk4_step(const ContinuousModel& model, real_t Ts, crvec x, crvec u) {
  const vec k1 = model.f(x, u);
  const vec k2 = model.f(x + (Ts / 2) * k1, u);
  const vec k3 = model.f(x + (Ts / 2) * k2, u);
  const vec k4 = model.f(x + Ts * k3, u);
  return x + (Ts / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

Vjp rk4_vjp(const ContinuousModel& model, real_t Ts, crvec x, crvec u, crvec w) {
  // Recompute the stage points.
  const vec k1 = model.f(x, u);
  const vec s2 = x + (Ts / 2) * k1;
  const vec k2 = model.f(s2, u);
  const vec s3 = x + (Ts / 2) * k2;
  const vec k3 = model.f(s3, u);
  const vec s4 = x + Ts * k3;

  // Adjoints of k1..k4 from x+ = x + Ts/6 (k1 + 2 k2 + 2 k3 + k4).
  vec a1 = (Ts / 6) * w;
  vec a2 = (Ts / 3) * w;
  vec a3 = (Ts / 3) * w;
  const vec a4 = (Ts / 6) * w;

  Vjp out{w, vec::Zero(model.nu)};
  const Vjp j4 = model.vjp(s4, u, a4);
  out.u += j4.u;
  out.x += j4.x;
  a3 += Ts * j4.x;
  const Vjp j3 = model.vjp(s3, u, a3);
  out.u += j3.u;
  out.x += j3.x;
  a2 += (Ts / 2) * j3.x;
  const Vjp j2 = model.vjp(s2, u, a2);
  out.u += j2.u;
  out.x += j2.x;
  a1 += (Ts / 2) * j2.x;
  const Vjp j1 = model.vjp(x, u, a1);
  out.u += j1.u;
  out.x += j1.x;
  return out;
}

namespace {

mat simulate(const ShootingProblem& sp, crvec x_init, crvec u_seq) {
  const index_t nx = sp.model.nx, nu = sp.model.nu, N = sp.horizon;
  if (u_seq.size() != nu * N) throw std::invalid_argument("shoot: input sequence has wrong size");
  if (x_init.size() != nx) throw std::invalid_argument("shoot: initial state has wrong size");
  mat xs(nx, N + 1);
  xs.col(0) = x_init;
  for (index_t k = 0; k < N; ++k) {
    xs.col(k + 1) = rk4_step(sp.model, sp.Ts, xs.col(k), u_seq.segment(k * nu, nu));
    if (!xs.col(k + 1).allFinite())
      throw EvaluationError("shoot: state trajectory became non-finite", u_seq);
  }
  return xs;
}

// Reverse sweep. lambda_N seeds the last state; state_seed(k) adds the direct
// dependence of the objective on x^k (k = 1..N-1) and input_seed(k) on u^k.
template <class StateSeed, class InputSeed>
vec backward(const ShootingProblem& sp, const mat& xs, crvec u_seq, vec lambda,
             StateSeed&& state_seed, InputSeed&& input_seed) {
  const index_t nu = sp.model.nu, N = sp.horizon;
  vec grad(nu * N);
  for (index_t k = N - 1; k >= 0; --k) {
    const Vjp j = rk4_vjp(sp.model, sp.Ts, xs.col(k), u_seq.segment(k * nu, nu), lambda);
    grad.segment(k * nu, nu) = j.u + input_seed(k);
    lambda = j.x;
    if (k > 0) lambda += state_seed(k);
  }
  return grad;
}

}  // namespace

Rollout shoot(const ShootingProblem& sp, crvec x_init, crvec u_seq) {
  Rollout r;
  r.states = simulate(sp, x_init, u_seq);
  const index_t nu = sp.model.nu, N = sp.horizon;
  for (index_t k = 0; k < N; ++k) r.cost += sp.stage.value(r.states.col(k), u_seq.segment(k * nu, nu));
  r.cost += sp.terminal.value(r.states.col(N));
  if (!std::isfinite(r.cost)) throw EvaluationError("shoot: non-finite cost", u_seq);
  return r;
}

vec shoot_adjoint(const ShootingProblem& sp, crvec x_init, crvec u_seq) {
  const mat xs = simulate(sp, x_init, u_seq);
  const index_t nu = sp.model.nu, N = sp.horizon;
  std::vector<Vjp> stage(static_cast<size_t>(N));
  for (index_t k = 0; k < N; ++k)
    stage[static_cast<size_t>(k)] = sp.stage.grad(xs.col(k), u_seq.segment(k * nu, nu));
  return backward(
      sp, xs, u_seq, sp.terminal.grad(xs.col(N)),
      [&](index_t k) -> const vec& { return stage[static_cast<size_t>(k)].x; },
      [&](index_t k) -> const vec& { return stage[static_cast<size_t>(k)].u; });
}

vec shoot_constraints(const ShootingProblem& sp, crvec x_init, crvec u_seq) {
  if (!sp.constraint) return vec::Zero(0);
  const mat xs = simulate(sp, x_init, u_seq);
  const index_t nc = sp.constraint->nc, N = sp.horizon;
  vec c(nc * N);
  for (index_t k = 1; k <= N; ++k) c.segment((k - 1) * nc, nc) = sp.constraint->value(xs.col(k));
  return c;
}

vec shoot_constraints_vjp(const ShootingProblem& sp, crvec x_init, crvec u_seq, crvec w) {
  const index_t nu = sp.model.nu, N = sp.horizon;
  if (!sp.constraint) return vec::Zero(nu * N);
  const index_t nc = sp.constraint->nc;
  if (w.size() != nc * N) throw std::invalid_argument("shoot_constraints_vjp: seed has wrong size");
  const mat xs = simulate(sp, x_init, u_seq);
  const vec zero_u = vec::Zero(nu);
  return backward(
      sp, xs, u_seq, sp.constraint->vjp(xs.col(N), w.segment((N - 1) * nc, nc)),
      [&](index_t k) { return sp.constraint->vjp(xs.col(k), w.segment((k - 1) * nc, nc)); },
      [&](index_t) -> const vec& { return zero_u; });
}

}  // namespace pantr::bench
