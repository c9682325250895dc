#pragma once

#include "pantr/alm.hpp"
#include "pantr/core.hpp"
#include "pantr/pantr.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace testing_support {

using namespace pantr;

/// psi(x) = 1/2 x'Qx + c'x.
inline CompositeProblem quadratic(const mat& Q, const vec& c, NonsmoothTerm g = Zero{}) {
  CompositeProblem p;
  p.dim = c.size();
  p.eval_f = [Q, c](crvec x) { return real_t{0.5} * x.dot(Q * x) + c.dot(x); };
  p.eval_grad_f = [Q, c](crvec x) { return vec(Q * x + c); };
  p.eval_hvp = [Q](crvec, crvec v) { return vec(Q * v); };
  p.nonsmooth = std::move(g);
  return p;
}

/// psi(x) = 1/2 x'Qx + c'x + w/4 sum x_i^4.
inline CompositeProblem quartic(const mat& Q, const vec& c, real_t w, NonsmoothTerm g) {
  CompositeProblem p;
  p.dim = c.size();
  p.eval_f = [Q, c, w](crvec x) {
    return real_t{0.5} * x.dot(Q * x) + c.dot(x) + w / 4 * x.array().pow(4).sum();
  };
  p.eval_grad_f = [Q, c, w](crvec x) { return vec(Q * x + c + w * x.array().cube().matrix()); };
  p.eval_hvp = [Q, w](crvec x, crvec v) {
    return vec(Q * v + (3 * w * x.array().square() * v.array()).matrix());
  };
  p.nonsmooth = std::move(g);
  return p;
}

inline CompositeProblem rosenbrock() {
  CompositeProblem p;
  p.dim = 2;
  p.eval_f = [](crvec x) {
    return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
  };
  p.eval_grad_f = [](crvec x) {
    vec g(2);
    g(0) = -400 * x(0) * (x(1) - x(0) * x(0)) - 2 * (1 - x(0));
    g(1) = 200 * (x(1) - x(0) * x(0));
    return g;
  };
  p.eval_hvp = [](crvec x, crvec v) {
    mat H(2, 2);
    H << 1200 * x(0) * x(0) - 400 * x(1) + 2, -400 * x(0), -400 * x(0), 200;
    return vec(H * v);
  };
  return p;
}

inline mat random_symmetric(std::mt19937_64& rng, index_t n, real_t scale = 1) {
  std::normal_distribution<real_t> nd;
  mat A(n, n);
  for (index_t i = 0; i < n; ++i)
    for (index_t j = 0; j < n; ++j) A(i, j) = nd(rng);
  return scale * (A + A.transpose()) / 2;
}

/// Symmetric positive definite with eigenvalues in [lo, hi].
inline mat random_spd(std::mt19937_64& rng, index_t n, real_t lo, real_t hi) {
  std::uniform_real_distribution<real_t> ud(lo, hi);
  Eigen::HouseholderQR<mat> qr(random_symmetric(rng, n));
  const mat U = qr.householderQ();
  vec ev(n);
  for (auto& e : ev) e = ud(rng);
  return U * ev.asDiagonal() * U.transpose();
}

inline vec random_vec(std::mt19937_64& rng, index_t n, real_t scale = 1) {
  std::normal_distribution<real_t> nd;
  vec v(n);
  for (auto& e : v) e = scale * nd(rng);
  return v;
}

inline real_t lipschitz(const mat& Q) {
  Eigen::SelfAdjointEigenSolver<mat> es(Q);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline vec fd_gradient(const std::function<real_t(crvec)>& f, crvec x, real_t h = 1e-6) {
  vec g(x.size());
  vec xp = x, xm = x;
  for (index_t i = 0; i < x.size(); ++i) {
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

/// Dense linear Newton approximation (1/gamma)(I - P Q) of the residual at
/// the point described by fb, with P the diagonal of the prox Jacobian.
inline mat dense_lna(const mat& H, const FbPoint& fb, const NonsmoothTerm& g) {
  const index_t n = H.rows();
  const ActiveSet as = active_set(fb, g);
  mat P = mat::Zero(n, n);
  for (index_t j : as.inactive) P(j, j) = 1;
  const mat Qg = mat::Identity(n, n) - fb.gamma * H;
  return (mat::Identity(n, n) - P * Qg) / fb.gamma;
}

/// TR model decrease of the Cauchy point.
inline real_t cauchy_model(const mat& H, const vec& g, real_t radius) {
  const real_t gn = g.norm();
  if (gn == 0) return 0;
  const real_t gHg = g.dot(H * g);
  real_t t = radius / gn;
  if (gHg > 0) t = std::min(t, gn * gn / gHg);
  const vec d = -t * g;
  return g.dot(d) + 0.5 * d.dot(H * d);
}

inline real_t tr_model(const mat& H, const vec& g, const vec& d) {
  return g.dot(d) + 0.5 * d.dot(H * d);
}

/// Random box with lower < upper, some sides infinite when allow_inf.
inline Box random_box(std::mt19937_64& rng, index_t n, bool allow_inf = false) {
  std::uniform_real_distribution<real_t> ud(-2, 2);
  std::uniform_real_distribution<real_t> width(0.2, 3);
  std::bernoulli_distribution coin(0.15);
  vec lb(n), ub(n);
  for (index_t i = 0; i < n; ++i) {
    lb(i) = ud(rng);
    ub(i) = lb(i) + width(rng);
    if (allow_inf && coin(rng)) lb(i) = -inf;
    if (allow_inf && coin(rng)) ub(i) = inf;
  }
  return Box{lb, ub};
}

}  // namespace testing_support
