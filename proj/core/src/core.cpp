#include "pantr/core.hpp"

#include <cassert>
#include <cmath>

namespace pantr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Box Box::make(vec lower, vec upper) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("Box: bound dimensions differ");
  for (index_t i = 0; i < lower.size(); ++i)
    if (!(lower(i) <= upper(i)))
      throw std::invalid_argument("Box: lower bound exceeds upper bound at index " +
                                  std::to_string(i));
  return Box{std::move(lower), std::move(upper)};
}

Box Box::unbounded(index_t n) {
  return Box{vec::Constant(n, -inf), vec::Constant(n, inf)};
}

vec Box::project(crvec z) const { return z.cwiseMax(lower).cwiseMin(upper); }

bool Box::contains(crvec z) const {
  return (z.array() >= lower.array()).all() && (z.array() <= upper.array()).all();
}

NonsmoothTerm make_box_term(vec lower, vec upper) {
  return Box::make(std::move(lower), std::move(upper));
}

NonsmoothTerm make_l1_term(real_t lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("L1: lambda must be positive");
  return L1{lambda};
}

real_t nonsmooth_value(const NonsmoothTerm& g, crvec x) {
  return std::visit(overloaded{
                        [](const Zero&) { return real_t{0}; },
                        [&](const Box& b) { return b.contains(x) ? real_t{0} : inf; },
                        [&](const L1& l) { return l.lambda * x.lpNorm<1>(); },
                    },
                    g);
}

real_t domain_diameter(const NonsmoothTerm& g) {
  if (const Box* b = std::get_if<Box>(&g)) return (b->upper - b->lower).norm();
  return inf;
}

vec prox(const NonsmoothTerm& g, crvec v, real_t gamma) {
  assert(gamma > 0);
  return std::visit(overloaded{
                        [&](const Zero&) -> vec { return v; },
                        [&](const Box& b) -> vec { return b.project(v); },
                        [&](const L1& l) -> vec {
                          const real_t t = gamma * l.lambda;
                          vec u(v.size());
                          for (index_t i = 0; i < v.size(); ++i) {
                            const real_t mag = std::max(std::abs(v(i)) - t, real_t{0});
                            u(i) = std::copysign(mag, v(i));
                            if (mag == 0) u(i) = 0;
                          }
                          return u;
                        },
                    },
                    g);
}

bool all_finite(crvec v) { return v.allFinite(); }

FbPoint fb_step(const CompositeProblem& p, crvec x, real_t gamma) {
  const real_t f_x = p.eval_f(x);
  if (!std::isfinite(f_x)) throw EvaluationError("fb_step: non-finite psi(x)", x);
  vec grad = p.eval_grad_f(x);
  return fb_step(p, x, f_x, grad, gamma);
}

FbPoint fb_step(const CompositeProblem& p, crvec x, real_t f_x, crvec grad_x,
                real_t gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("fb_step: gamma must be positive");
  if (!grad_x.allFinite()) throw EvaluationError("fb_step: non-finite gradient", x);
  FbPoint fb;
  fb.x = x;
  fb.gamma = gamma;
  fb.f_x = f_x;
  fb.grad_x = grad_x;
  fb.x_hat = prox(p.nonsmooth, x - gamma * grad_x, gamma);
  fb.residual = (fb.x - fb.x_hat) / gamma;
  fb.fbe = fbe_at(p, fb);
  return fb;
}

real_t fbe_at(const CompositeProblem& p, const FbPoint& fb) {
  const real_t g_hat = nonsmooth_value(p.nonsmooth, fb.x_hat);
  assert(std::isfinite(g_hat));
  const vec step = fb.x_hat - fb.x;
  return fb.f_x + g_hat + fb.grad_x.dot(step) + step.squaredNorm() / (2 * fb.gamma);
}

ActiveSet active_set(const FbPoint& fb, const NonsmoothTerm& g) {
  ActiveSet s;
  const index_t n = fb.x.size();
  const vec forward = fb.x - fb.gamma * fb.grad_x;
  std::visit(overloaded{
                 [&](const Zero&) {
                   s.inactive.resize(static_cast<size_t>(n));
                   for (index_t i = 0; i < n; ++i) s.inactive[static_cast<size_t>(i)] = i;
                 },
                 [&](const Box& b) {
                   for (index_t i = 0; i < n; ++i) {
                     if (forward(i) <= b.lower(i)) {
                       s.active.push_back(i);
                       s.lower_active.push_back(i);
                     } else if (forward(i) >= b.upper(i)) {
                       s.active.push_back(i);
                       s.upper_active.push_back(i);
                     } else {
                       s.inactive.push_back(i);
                     }
                   }
                 },
                 [&](const L1& l) {
                   const real_t t = fb.gamma * l.lambda;
                   for (index_t i = 0; i < n; ++i) {
                     if (std::abs(forward(i)) <= t)
                       s.active.push_back(i);
                     else
                       s.inactive.push_back(i);
                   }
                 },
             },
             g);
  return s;
}

DistSq dist_sq_sigma(crvec z, const Box& D, crvec sigma) {
  const vec e = z - D.project(z);
  DistSq r;
  r.grad = sigma.cwiseProduct(e);
  r.value = real_t{0.5} * e.dot(r.grad);
  return r;
}

real_t stationarity_inf(const NonsmoothTerm& g, crvec x, crvec grad) {
  if (x.size() == 0) return 0;
  return (x - prox(g, x - grad, 1)).lpNorm<Eigen::Infinity>();
}

}  // namespace pantr
