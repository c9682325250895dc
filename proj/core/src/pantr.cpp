#include "pantr/pantr.hpp"

#include <cmath>
#include <random>

namespace pantr {

void PantrParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("PantrParams: ") + what);
  };
  if (std::isinf(mu1)) {
    require(mu1 > 0, "mu1 must be positive");
  } else {
    require(0 < mu1 && mu1 < mu2 && mu2 < 1, "require 0 < mu1 < mu2 < 1");
  }
  require(0 < c1 && c1 < 1, "require 0 < c1 < 1");
  require(0 < c2 && c2 <= 1, "require 0 < c2 <= 1");
  require(c3 > 1, "require c3 > 1");
  require(0 < alpha && alpha < 1, "require 0 < alpha < 1");
  require(!delta0 || *delta0 > 0, "delta0 must be positive");
  require(!max_radius || *max_radius > 0, "max_radius must be positive");
  require(!gamma0 || *gamma0 > 0, "gamma0 must be positive");
  require(gamma_min > 0, "gamma_min must be positive");
  require(tol >= 0, "tol must be nonnegative");
  require(!cg_tol || *cg_tol >= 0, "cg_tol must be nonnegative");
}

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iters: return "max_iters";
    case SolverStatus::not_finite: return "not_finite";
  }
  return "unknown";
}

CandidateStep candidate_step(const CompositeProblem& p, const FbPoint& fb_hat, real_t radius,
                             const PantrParams& params) {
  const index_t n = fb_hat.x.size();
  const real_t gamma = fb_hat.gamma;
  const ActiveSet as = active_set(fb_hat, p.nonsmooth);
  const auto& J = as.inactive;
  const auto& K = as.active;
  const auto nJ = static_cast<index_t>(J.size());

  CandidateStep out;
  out.d = vec::Zero(n);
  real_t dK_sq = 0;
  for (index_t i : K) {
    out.d(i) = -gamma * fb_hat.residual(i);
    dK_sq += out.d(i) * out.d(i);
  }
  out.tr.status = TrStatus::interior;
  if (nJ == 0) {
    out.model_value = -dK_sq / (2 * gamma);
    return out;
  }

  vec gJ(nJ);
  for (index_t j = 0; j < nJ; ++j) gJ(j) = fb_hat.residual(J[static_cast<size_t>(j)]);
  if (dK_sq > 0) {
    const vec Hd = p.eval_hvp(fb_hat.x, out.d);
    ++out.hvp_evaluations;
    if (!Hd.allFinite()) throw EvaluationError("candidate_step: non-finite Hessian product", fb_hat.x);
    for (index_t j = 0; j < nJ; ++j) gJ(j) += Hd(J[static_cast<size_t>(j)]);
  }

  TrProblem tp;
  tp.hvp_reduced = [&](crvec v) {
    vec full = vec::Zero(n);
    for (index_t j = 0; j < nJ; ++j) full(J[static_cast<size_t>(j)]) = v(j);
    const vec Hv = p.eval_hvp(fb_hat.x, full);
    vec r(nJ);
    for (index_t j = 0; j < nJ; ++j) r(j) = Hv(J[static_cast<size_t>(j)]);
    return r;
  };
  tp.grad_reduced = std::move(gJ);
  tp.radius = radius;
  tp.cg_tol = params.cg_tol.value_or(default_cg_tolerance(tp.grad_reduced.norm()));
  tp.max_cg_iters = params.max_cg_iters.value_or(0);
  out.tr = steihaug_cg(tp);
  out.hvp_evaluations += out.tr.hvp_evaluations;
  for (index_t j = 0; j < nJ; ++j) out.d(J[static_cast<size_t>(j)]) = out.tr.d(j);
  out.model_value = out.tr.model_value - dK_sq / (2 * gamma);
  return out;
}

real_t acceptance_ratio(real_t fbe_hat, real_t fbe_trial, real_t q_d) {
  if (q_d == 0) return -inf;
  const real_t rho = (fbe_hat - fbe_trial) / (-q_d);
  return std::isnan(rho) ? -inf : rho;
}

real_t update_radius(real_t radius, real_t rho, real_t d_norm, const PantrParams& params,
                     real_t floor) {
  real_t next;
  if (rho >= params.mu2)
    next = std::max(params.c3 * d_norm, radius);
  else if (rho >= params.mu1)
    next = params.c2 * radius;
  else
    next = params.c1 * d_norm;
  return std::max(next, floor);
}

bool check_gamma(const FbPoint& fb, real_t psi_hat, real_t alpha) {
  const vec step = fb.x_hat - fb.x;
  // Curvature below this step length is not measurable from function values.
  const real_t eps = std::numeric_limits<real_t>::epsilon();
  if (step.lpNorm<Eigen::Infinity>() <= std::sqrt(eps) * (1 + fb.x.lpNorm<Eigen::Infinity>()))
    return true;
  const real_t bound =
      fb.f_x + fb.grad_x.dot(step) + alpha / (2 * fb.gamma) * step.squaredNorm();
  const real_t slack = 10 * eps * std::abs(fb.f_x);
  return psi_hat <= bound + slack;
}

bool check_gamma(const CompositeProblem& p, const FbPoint& fb, real_t alpha) {
  return check_gamma(fb, p.eval_f(fb.x_hat), alpha);
}

real_t estimate_initial_gamma(const CompositeProblem& p, crvec x0, real_t alpha,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<real_t> normal;
  vec dir(x0.size());
  for (index_t i = 0; i < dir.size(); ++i) dir(i) = normal(rng);
  if (dir.norm() == 0) dir.setOnes();
  const vec delta = 1e-4 * (1 + x0.norm()) * dir.normalized();
  const vec g0 = p.eval_grad_f(x0);
  const vec g1 = p.eval_grad_f(x0 + delta);
  real_t L = (g1 - g0).norm() / delta.norm();
  if (!std::isfinite(L)) throw EvaluationError("estimate_initial_gamma: non-finite gradient", x0);
  L = std::max(L, real_t{1e-8});
  return alpha / L;
}

namespace {

struct StepSearch {
  FbPoint fb;
  real_t psi_hat = inf;
  unsigned halvings = 0;
  bool ok = false;
};

real_t eval_f_or_inf(const CompositeProblem& p, crvec x) {
  try {
    const real_t v = p.eval_f(x);
    return std::isfinite(v) ? v : inf;
  } catch (const EvaluationError&) {
    return inf;
  }
}

// Forward-backward step at x, halving gamma until the quadratic upper bound
// holds at x_hat.
StepSearch search_step(const CompositeProblem& p, crvec x, real_t f_x, crvec grad,
                       real_t gamma, real_t alpha, real_t gamma_min) {
  StepSearch s;
  for (;;) {
    s.fb = fb_step(p, x, f_x, grad, gamma);
    s.psi_hat = eval_f_or_inf(p, s.fb.x_hat);
    if (std::isfinite(s.psi_hat) && check_gamma(s.fb, s.psi_hat, alpha)) {
      s.ok = true;
      return s;
    }
    if (gamma / 2 < gamma_min) return s;
    gamma /= 2;
    ++s.halvings;
  }
}

std::optional<vec> eval_grad_checked(const CompositeProblem& p, crvec x, PantrStats& stats) {
  ++stats.gradient_evaluations;
  try {
    vec g = p.eval_grad_f(x);
    if (!g.allFinite()) return std::nullopt;
    return g;
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
}

}  // namespace

SolveResult pantr_solve(const CompositeProblem& p, crvec x0, const PantrParams& params,
                        const IterationObserver& observer) {
  params.validate();
  if (x0.size() != p.dim) throw std::invalid_argument("pantr_solve: x0 has wrong dimension");

  SolveResult res;
  PantrStats& stats = res.stats;
  vec x = x0;
  real_t f_x = eval_f_or_inf(p, x);
  auto grad0 = eval_grad_checked(p, x, stats);
  if (!std::isfinite(f_x) || !grad0) {
    stats.status = SolverStatus::not_finite;
    res.x = x;
    return res;
  }
  vec grad = std::move(*grad0);

  real_t gamma = 0;
  std::optional<real_t> radius = params.delta0;
  real_t radius_cap = params.max_radius.value_or(domain_diameter(p.nonsmooth));
  if (!(radius_cap > 0)) radius_cap = inf;
  for (unsigned k = 0;; ++k) {
    stats.final_residual_inf = stationarity_inf(p.nonsmooth, x, grad);
    if (stats.final_residual_inf <= params.tol) {
      stats.status = SolverStatus::converged;
      break;
    }
    if (k >= params.max_iters) {
      stats.status = SolverStatus::max_iters;
      break;
    }
    if (gamma == 0) {
      gamma = params.gamma0 ? *params.gamma0
                            : estimate_initial_gamma(p, x, params.alpha, params.seed);
      if (!params.gamma0) stats.gradient_evaluations += 2;
      stats.initial_gamma = gamma;
    }

    StepSearch s = search_step(p, x, f_x, grad, gamma, params.alpha, params.gamma_min);
    stats.gamma_halvings += s.halvings;
    gamma = s.fb.gamma;
    stats.final_fbe = s.fb.fbe;
    if (!s.ok || !std::isfinite(s.fb.fbe)) {
      stats.status = SolverStatus::not_finite;
      break;
    }

    auto grad_hat = eval_grad_checked(p, s.fb.x_hat, stats);
    if (!grad_hat) {
      stats.status = SolverStatus::not_finite;
      break;
    }
    const FbPoint fb_hat = fb_step(p, s.fb.x_hat, s.psi_hat, *grad_hat, gamma);
    if (!radius) radius = std::max(real_t{1}, fb_hat.residual.norm());
    radius = std::min(*radius, radius_cap);

    IterationInfo info;
    info.k = k;
    info.x = &x;
    info.gamma = gamma;
    info.fbe = s.fb.fbe;
    info.residual_norm = s.fb.residual.norm();
    info.stationarity = stats.final_residual_inf;
    info.halvings = s.halvings;

    bool accepted = false;
    real_t f_trial = 0;
    vec trial, grad_trial;
    std::optional<CandidateStep> cand;
    try {
      cand = candidate_step(p, fb_hat, *radius, params);
    } catch (const EvaluationError&) {
      cand.reset();
    }
    if (cand) {
      ++stats.tr_subproblems;
      stats.total_cg_iterations += cand->tr.cg_iterations;
      stats.hvp_evaluations += cand->hvp_evaluations;
      info.tr_status = cand->tr.status;
    }
    if (cand && cand->model_value < 0) {
      trial = fb_hat.x + cand->d;
      real_t rho = -inf;
      f_trial = eval_f_or_inf(p, trial);
      if (std::isfinite(f_trial)) {
        if (auto g = eval_grad_checked(p, trial, stats)) {
          grad_trial = std::move(*g);
          const FbPoint fb_trial = fb_step(p, trial, f_trial, grad_trial, gamma);
          rho = acceptance_ratio(fb_hat.fbe, fb_trial.fbe, cand->model_value);
        }
      }
      const real_t floor = 1e-12 * std::max(real_t{1}, x.norm());
      radius = std::min(update_radius(*radius, rho, cand->d.norm(), params, floor), radius_cap);
      accepted = rho >= params.mu1;
      if (!accepted) ++stats.rejected_steps;
    }
    info.accepted = accepted;
    if (observer) observer(info);

    ++stats.iterations;
    if (accepted) {
      ++stats.accepted_steps;
      x = std::move(trial);
      f_x = f_trial;
      grad = std::move(grad_trial);
    } else {
      ++stats.fb_fallbacks;
      x = fb_hat.x;
      f_x = s.psi_hat;
      grad = std::move(*grad_hat);
    }
  }
  stats.final_gamma = gamma;
  res.x = std::move(x);
  return res;
}

SolveResult fbs_solve(const CompositeProblem& p, crvec x0, const FbsParams& params,
                      const IterationObserver& observer) {
  if (!(0 < params.alpha && params.alpha < 1))
    throw std::invalid_argument("FbsParams: require 0 < alpha < 1");
  if (x0.size() != p.dim) throw std::invalid_argument("fbs_solve: x0 has wrong dimension");

  SolveResult res;
  PantrStats& stats = res.stats;
  vec x = x0;
  real_t f_x = eval_f_or_inf(p, x);
  auto grad0 = eval_grad_checked(p, x, stats);
  if (!std::isfinite(f_x) || !grad0) {
    stats.status = SolverStatus::not_finite;
    res.x = x;
    return res;
  }
  vec grad = std::move(*grad0);

  real_t gamma = 0;
  for (unsigned k = 0;; ++k) {
    stats.final_residual_inf = stationarity_inf(p.nonsmooth, x, grad);
    if (stats.final_residual_inf <= params.tol) {
      stats.status = SolverStatus::converged;
      break;
    }
    if (k >= params.max_iters) {
      stats.status = SolverStatus::max_iters;
      break;
    }
    if (gamma == 0) {
      gamma = params.gamma0 ? *params.gamma0
                            : estimate_initial_gamma(p, x, params.alpha, params.seed);
      if (!params.gamma0) stats.gradient_evaluations += 2;
      stats.initial_gamma = gamma;
    }
    StepSearch s = search_step(p, x, f_x, grad, gamma, params.alpha, params.gamma_min);
    stats.gamma_halvings += s.halvings;
    gamma = s.fb.gamma;
    stats.final_fbe = s.fb.fbe;
    if (!s.ok || !std::isfinite(s.fb.fbe)) {
      stats.status = SolverStatus::not_finite;
      break;
    }
    auto grad_hat = eval_grad_checked(p, s.fb.x_hat, stats);
    if (!grad_hat) {
      stats.status = SolverStatus::not_finite;
      break;
    }
    if (observer) {
      IterationInfo info;
      info.k = k;
      info.x = &x;
      info.gamma = gamma;
      info.fbe = s.fb.fbe;
      info.residual_norm = s.fb.residual.norm();
      info.stationarity = stats.final_residual_inf;
      info.halvings = s.halvings;
      observer(info);
    }
    ++stats.iterations;
    ++stats.fb_fallbacks;
    x = s.fb.x_hat;
    f_x = s.psi_hat;
    grad = std::move(*grad_hat);
  }
  stats.final_gamma = gamma;
  res.x = std::move(x);
  return res;
}

}  // namespace pantr
