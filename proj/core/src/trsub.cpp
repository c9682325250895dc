#include "pantr/trsub.hpp"

#include <Eigen/Eigenvalues>

#include <cassert>
#include <cmath>
#include <limits>

namespace pantr {

const char* to_string(TrStatus s) {
  switch (s) {
    case TrStatus::interior: return "interior";
    case TrStatus::boundary: return "boundary";
    case TrStatus::negative_curvature: return "negative_curvature";
    case TrStatus::max_iters: return "max_iters";
  }
  return "unknown";
}

real_t default_cg_tolerance(real_t grad_norm) {
  return std::min(real_t{0.1}, std::sqrt(grad_norm));
}

real_t boundary_step(crvec z, crvec p, real_t radius) {
  const real_t a = p.squaredNorm();
  const real_t b = 2 * z.dot(p);
  const real_t c = std::min(z.squaredNorm() - radius * radius, real_t{0});
  if (a == 0) return 0;
  const real_t disc = std::sqrt(b * b - 4 * a * c);
  // Pick the algebraically equivalent form without cancellation.
  return b > 0 ? (-2 * c) / (b + disc) : (-b + disc) / (2 * a);
}

TrResult steihaug_cg(const TrProblem& tp) {
  const vec& g = tp.grad_reduced;
  const index_t k = g.size();
  const index_t max_it = tp.max_cg_iters > 0 ? tp.max_cg_iters : k;
  if (!(tp.radius > 0)) throw std::invalid_argument("steihaug_cg: radius must be positive");

  TrResult res;
  res.d = vec::Zero(k);
  vec Hd = vec::Zero(k);
  const real_t g_norm = g.norm();
  const real_t stop = std::max(tp.cg_tol, std::numeric_limits<real_t>::epsilon()) * g_norm;
  if (g_norm == 0) return res;

  vec r = g;
  vec p = -r;
  real_t rr = r.squaredNorm();
  [[maybe_unused]] real_t q_prev = 0;
  res.status = TrStatus::max_iters;
  for (index_t it = 0; it < max_it; ++it) {
    const vec Hp = tp.hvp_reduced(p);
    ++res.hvp_evaluations;
    ++res.cg_iterations;
    if (!Hp.allFinite()) throw EvaluationError("steihaug_cg: non-finite Hessian product", p);
    const real_t curvature = p.dot(Hp);
    if (curvature <= 0) {
      res.status = TrStatus::negative_curvature;
      if (!std::isfinite(tp.radius)) break;
      const real_t tau = boundary_step(res.d, p, tp.radius);
      res.d += tau * p;
      Hd += tau * Hp;
      break;
    }
    const real_t alpha = rr / curvature;
    vec d_next = res.d + alpha * p;
    if (d_next.norm() >= tp.radius) {
      const real_t tau = boundary_step(res.d, p, tp.radius);
      res.d += tau * p;
      Hd += tau * Hp;
      res.status = TrStatus::boundary;
      break;
    }
    res.d = std::move(d_next);
    Hd += alpha * Hp;
    r += alpha * Hp;
#ifndef NDEBUG
    const real_t q = g.dot(res.d) + real_t{0.5} * res.d.dot(Hd);
    assert(q <= q_prev + 1e-12 * (1 + std::abs(q_prev)));
    q_prev = q;
#endif
    const real_t rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= stop) {
      res.status = TrStatus::interior;
      break;
    }
    p = -r + (rr_next / rr) * p;
    rr = rr_next;
  }
  res.model_value = g.dot(res.d) + real_t{0.5} * res.d.dot(Hd);
  return res;
}

TrOracleResult tr_exact_oracle(const mat& H, crvec g, real_t radius) {
  const index_t k = g.size();
  if (H.rows() != k || H.cols() != k)
    throw std::invalid_argument("tr_exact_oracle: dimension mismatch");
  if (!(radius > 0)) throw std::invalid_argument("tr_exact_oracle: radius must be positive");

  Eigen::SelfAdjointEigenSolver<mat> es(H);
  const vec& lam = es.eigenvalues();
  const mat& Q = es.eigenvectors();
  const vec gh = Q.transpose() * g;
  const real_t g_norm = g.norm();

  TrOracleResult out;
  if (g_norm == 0 && lam(0) >= 0) {
    out.d = vec::Zero(k);
    return out;
  }

  const real_t scale = std::max(real_t{1}, lam.cwiseAbs().maxCoeff());
  const real_t eig_tol = 1e-12 * scale;
  const real_t g_tol = 1e-8 * std::max(real_t{1}, g_norm);
  const real_t lo0 = std::max(real_t{0}, -lam(0));

  auto step_at = [&](real_t l) {
    vec c(k);
    for (index_t i = 0; i < k; ++i) c(i) = -gh(i) / (lam(i) + l);
    return c;
  };

  // Limit of d(lambda) as lambda decreases to lo0.
  bool unbounded = false;
  vec c_lo = vec::Zero(k);
  for (index_t i = 0; i < k; ++i) {
    if (lam(i) + lo0 <= eig_tol) {
      if (std::abs(gh(i)) > g_tol) unbounded = true;
    } else {
      c_lo(i) = -gh(i) / (lam(i) + lo0);
    }
  }
  if (!unbounded && c_lo.norm() <= radius) {
    out.multiplier = lo0;
    out.d = Q * c_lo;
    if (lo0 > 0) {
      // Hard case: complete the step with a component along the leftmost
      // eigenvector until it reaches the boundary.
      out.hard_case = true;
      const real_t tau = std::sqrt(std::max(real_t{0}, radius * radius - c_lo.squaredNorm()));
      out.d += tau * Q.col(0);
    }
    return out;
  }

  real_t lo = lo0;
  real_t hi = std::max(lo0, g_norm / radius - lam(0));
  while (step_at(hi).norm() > radius) hi = 2 * hi + 1;
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<real_t>::epsilon() * hi; ++it) {
    const real_t mid = lo + (hi - lo) / 2;
    if (step_at(mid).norm() > radius)
      lo = mid;
    else
      hi = mid;
  }
  const vec c = step_at(hi);
  if (std::abs(c.norm() - radius) > 1e-6 * radius)
    throw std::runtime_error("tr_exact_oracle: secular equation did not converge");
  out.multiplier = hi;
  out.d = Q * c;
  return out;
}

}  // namespace pantr
