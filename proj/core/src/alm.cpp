#include "pantr/alm.hpp"

#include <cmath>
#include <memory>

namespace pantr {

bool ConstrainedNlp::has_exact_hessian() const {
  if (!eval_f_hvp) return false;
  return m == 0 || (eval_g_jvp && eval_g_hvp);
}

void AlmParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("AlmParams: ") + what);
  };
  require(initial_penalty > 0, "initial_penalty must be positive");
  require(penalty_factor > 1, "penalty_factor must exceed 1");
  require(initial_inner_tol > 0, "initial_inner_tol must be positive");
  require(inner_tol_factor > 1, "inner_tol_factor must exceed 1");
  require(final_tol > 0, "final_tol must be positive");
  require(constraint_tol > 0, "constraint_tol must be positive");
  require(max_inner_iters > 0, "max_inner_iters must be positive");
  require(max_outer_iters > 0, "max_outer_iters must be positive");
  require(progress_factor > 0 && progress_factor < 1, "progress_factor must lie in (0, 1)");
  require(sigma_max >= initial_penalty, "sigma_max must be at least initial_penalty");
  inner.validate();
}

const char* to_string(AlmStatus s) {
  switch (s) {
    case AlmStatus::converged: return "converged";
    case AlmStatus::max_outer_iters: return "max_outer_iters";
    case AlmStatus::infeasible_suspected: return "infeasible_suspected";
    case AlmStatus::not_finite: return "not_finite";
  }
  return "unknown";
}

AlmState initial_alm_state(const ConstrainedNlp& nlp, const AlmParams& params) {
  AlmState st;
  st.y = params.y0 ? *params.y0 : vec::Zero(nlp.m);
  if (st.y.size() != nlp.m) throw std::invalid_argument("AlmParams: y0 has wrong dimension");
  st.sigma = vec::Constant(nlp.m, params.initial_penalty);
  st.inner_tol = std::max(params.initial_inner_tol, params.final_tol);
  st.row_violation = vec::Constant(nlp.m, inf);
  return st;
}

namespace {

// Shifted constraint value z = g(x) + Sigma^-1 y and its projection residual.
struct Shifted {
  vec gx;
  vec z;
  vec e;  // z - P_D(z)
};

Shifted shifted(const ConstrainedNlp& nlp, crvec y, crvec sigma, crvec x) {
  Shifted s;
  s.gx = nlp.eval_g(x);
  s.z = s.gx + y.cwiseQuotient(sigma);
  s.e = s.z - nlp.D.project(s.z);
  return s;
}

}  // namespace

vec multiplier_estimate(const ConstrainedNlp& nlp, const AlmState& st, crvec x) {
  return st.sigma.cwiseProduct(shifted(nlp, st.y, st.sigma, x).e);
}

CompositeProblem build_inner(const ConstrainedNlp& nlp, const AlmState& st) {
  struct Data {
    ConstrainedNlp nlp;
    vec y, sigma;
  };
  auto data = std::make_shared<const Data>(Data{nlp, st.y, st.sigma});

  CompositeProblem p;
  p.dim = nlp.n;
  p.nonsmooth = nlp.C;
  if (nlp.m == 0) {
    p.eval_f = [data](crvec x) { return data->nlp.eval_f(x); };
    p.eval_grad_f = [data](crvec x) { return data->nlp.eval_grad_f(x); };
  } else {
    p.eval_f = [data](crvec x) {
      const Shifted s = shifted(data->nlp, data->y, data->sigma, x);
      return data->nlp.eval_f(x) + real_t{0.5} * s.e.dot(data->sigma.cwiseProduct(s.e));
    };
    p.eval_grad_f = [data](crvec x) {
      const Shifted s = shifted(data->nlp, data->y, data->sigma, x);
      const vec yhat = data->sigma.cwiseProduct(s.e);
      return vec(data->nlp.eval_grad_f(x) + data->nlp.eval_g_jvp_t(x, yhat));
    };
  }

  if (nlp.has_exact_hessian()) {
    p.eval_hvp = [data](crvec x, crvec v) {
      const ConstrainedNlp& q = data->nlp;
      vec Hv = q.eval_f_hvp(x, v);
      if (q.m == 0) return Hv;
      const Shifted s = shifted(q, data->y, data->sigma, x);
      const vec yhat = data->sigma.cwiseProduct(s.e);
      vec Jv = q.eval_g_jvp(x, v);
      // Generalized Jacobian of z - P_D(z): identity on rows outside D.
      for (index_t i = 0; i < q.m; ++i)
        Jv(i) = (s.e(i) != 0) ? data->sigma(i) * Jv(i) : 0;
      Hv += q.eval_g_hvp(x, yhat, v) + q.eval_g_jvp_t(x, Jv);
      return Hv;
    };
  } else {
    auto grad = p.eval_grad_f;
    p.eval_hvp = [grad](crvec x, crvec v) {
      const real_t v_norm = v.norm();
      if (v_norm == 0) return vec(vec::Zero(x.size()));
      const real_t h = std::sqrt(std::numeric_limits<real_t>::epsilon()) * (1 + x.norm()) / v_norm;
      const vec gp = grad(x + h * v);
      const vec gm = grad(x - h * v);
      return vec((gp - gm) / (2 * h));
    };
  }
  return p;
}

AlmState update_multipliers(const ConstrainedNlp& nlp, const AlmState& st, crvec x) {
  AlmState next = st;
  const Shifted s = shifted(nlp, st.y, st.sigma, x);
  next.y = st.sigma.cwiseProduct(s.e);
  next.row_violation = (s.gx - nlp.D.project(s.z)).cwiseAbs();
  next.violation = nlp.m > 0 ? next.row_violation.maxCoeff() : 0;
  return next;
}

AlmState update_penalty(const AlmState& st, crvec prev_row_violation, const AlmParams& params) {
  AlmState next = st;
  for (index_t i = 0; i < st.sigma.size(); ++i) {
    const real_t v = st.row_violation(i);
    if (v > params.constraint_tol && v > params.progress_factor * prev_row_violation(i))
      next.sigma(i) = std::min(params.penalty_factor * st.sigma(i), params.sigma_max);
  }
  next.inner_tol = std::max(st.inner_tol / params.inner_tol_factor, params.final_tol);
  return next;
}

namespace {

SolveResult run_inner(const CompositeProblem& p, crvec x, const AlmParams& params, real_t tol,
                      unsigned max_iters) {
  if (params.solver == InnerSolver::fbs) {
    FbsParams fp;
    fp.tol = tol;
    fp.max_iters = max_iters;
    fp.alpha = params.inner.alpha;
    fp.gamma0 = params.inner.gamma0;
    fp.gamma_min = params.inner.gamma_min;
    fp.seed = params.inner.seed;
    return fbs_solve(p, x, fp);
  }
  PantrParams pp = params.inner;
  pp.tol = tol;
  pp.max_iters = max_iters;
  return pantr_solve(p, x, pp);
}

void accumulate(AlmStats& stats, const PantrStats& s) {
  stats.inner_iterations += s.iterations;
  stats.cg_iterations += s.total_cg_iterations;
  stats.hvp_evaluations += s.hvp_evaluations;
  stats.gamma_halvings += s.gamma_halvings;
  stats.tr_subproblems += s.tr_subproblems;
  stats.inner_residual = s.final_residual_inf;
}

}  // namespace

AlmResult alm_solve(const ConstrainedNlp& nlp, crvec x0, const AlmParams& params,
                    const AlmObserver& observer) {
  params.validate();
  if (x0.size() != nlp.n) throw std::invalid_argument("alm_solve: x0 has wrong dimension");
  AlmResult out;
  AlmState st = initial_alm_state(nlp, params);

  if (nlp.m == 0) {
    const CompositeProblem p = build_inner(nlp, st);
    const SolveResult r = run_inner(p, x0, params, params.final_tol, params.inner.max_iters);
    accumulate(out.stats, r.stats);
    if (observer) observer(st, r.stats);
    out.stats.outer_iterations = 1;
    out.stats.status = r.stats.status == SolverStatus::converged  ? AlmStatus::converged
                       : r.stats.status == SolverStatus::not_finite ? AlmStatus::not_finite
                                                                    : AlmStatus::max_outer_iters;
    out.x = r.x;
    out.y = vec::Zero(0);
    return out;
  }

  vec x = x0;
  vec prev_row = vec::Constant(nlp.m, inf);
  out.stats.status = AlmStatus::max_outer_iters;
  for (unsigned outer = 0; outer < params.max_outer_iters; ++outer) {
    st.outer_iteration = outer;
    const CompositeProblem p = build_inner(nlp, st);
    const SolveResult r = run_inner(p, x, params, st.inner_tol, params.max_inner_iters);
    accumulate(out.stats, r.stats);
    if (observer) observer(st, r.stats);
    out.stats.outer_iterations = outer + 1;
    if (r.stats.status == SolverStatus::not_finite || !r.x.allFinite()) {
      out.stats.status = AlmStatus::not_finite;
      break;
    }
    x = r.x;
    const AlmState updated = update_multipliers(nlp, st, x);
    out.stats.violation = updated.violation;
    if (r.stats.final_residual_inf <= params.final_tol &&
        updated.violation <= params.constraint_tol) {
      st = updated;
      out.stats.status = AlmStatus::converged;
      break;
    }
    AlmState next = update_penalty(updated, prev_row, params);
    bool stuck = false;
    for (index_t i = 0; i < nlp.m; ++i)
      stuck = stuck || (st.sigma(i) >= params.sigma_max &&
                        updated.row_violation(i) > params.constraint_tol &&
                        updated.row_violation(i) > params.progress_factor * prev_row(i));
    prev_row = updated.row_violation;
    st = std::move(next);
    if (stuck) {
      out.stats.status = AlmStatus::infeasible_suspected;
      break;
    }
  }
  out.x = std::move(x);
  out.y = st.y;
  return out;
}

}  // namespace pantr
