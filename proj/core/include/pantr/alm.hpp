#pragma once

#include "pantr/core.hpp"
#include "pantr/pantr.hpp"

#include <functional>
#include <optional>

namespace pantr {

/// minimize f(x)  subject to  x in C,  g(x) in D,  with C and D boxes.
struct ConstrainedNlp {
  index_t n = 0;
  index_t m = 0;
  std::function<real_t(crvec)> eval_f;
  std::function<vec(crvec)> eval_grad_f;
  std::function<vec(crvec)> eval_g;                // R^n -> R^m
  std::function<vec(crvec, crvec)> eval_g_jvp_t;  // (x, w) -> grad g(x)^T w
  Box C;
  Box D;

  // Optional second-order information. When eval_f_hvp is set (and, for
  // m > 0, eval_g_jvp and eval_g_hvp as well) the inner problem uses exact
  // generalized Hessian products instead of finite differences.
  std::function<vec(crvec, crvec)> eval_f_hvp;         // (x, v) -> hess f(x) v
  std::function<vec(crvec, crvec)> eval_g_jvp;         // (x, v) -> grad g(x) v
  std::function<vec(crvec, crvec, crvec)> eval_g_hvp;  // (x, w, v) -> sum_i w_i hess g_i(x) v

  bool has_exact_hessian() const;
};

enum class InnerSolver { pantr, fbs };

struct AlmParams {
  real_t initial_penalty = 1e4;
  real_t penalty_factor = 5;
  real_t initial_inner_tol = 100;
  real_t inner_tol_factor = 10;
  real_t final_tol = 1e-8;
  real_t constraint_tol = 1e-8;
  unsigned max_inner_iters = 250;
  unsigned max_outer_iters = 100;
  /// A row's penalty grows when its violation did not drop below this
  /// fraction of the previous one.
  real_t progress_factor = 0.5;
  real_t sigma_max = 1e12;
  std::optional<vec> y0;
  InnerSolver solver = InnerSolver::pantr;
  /// Inner solver settings; tol and max_iters are overridden per subproblem.
  PantrParams inner;

  void validate() const;
};

struct AlmState {
  vec y;
  vec sigma;
  real_t inner_tol = 0;
  unsigned outer_iteration = 0;
  real_t violation = inf;  // ||g(x) - P_D(g(x) + y / sigma)||_inf
  vec row_violation;       // |g(x) - P_D(g(x) + y / sigma)| per row
};

AlmState initial_alm_state(const ConstrainedNlp& nlp, const AlmParams& params);

enum class AlmStatus { converged, max_outer_iters, infeasible_suspected, not_finite };

const char* to_string(AlmStatus s);

struct AlmStats {
  unsigned outer_iterations = 0;
  unsigned inner_iterations = 0;
  index_t cg_iterations = 0;
  index_t hvp_evaluations = 0;
  unsigned gamma_halvings = 0;
  unsigned tr_subproblems = 0;
  real_t inner_residual = inf;
  real_t violation = 0;
  AlmStatus status = AlmStatus::max_outer_iters;
};

struct AlmResult {
  vec x;
  vec y;
  AlmStats stats;
};

/// psi(x) = f(x) + 1/2 dist^2_Sigma(g(x) + Sigma^-1 y, D), g = indicator of C.
/// The returned problem holds copies of the callbacks and the state.
CompositeProblem build_inner(const ConstrainedNlp& nlp, const AlmState& st);

/// Sigma (z - P_D(z)) with z = g(x) + Sigma^-1 y.
vec multiplier_estimate(const ConstrainedNlp& nlp, const AlmState& st, crvec x);

/// y <- Sigma (z - P_D(z)); records the constraint violation at x.
AlmState update_multipliers(const ConstrainedNlp& nlp, const AlmState& st, crvec x);

/// Grows the penalty on rows without sufficient progress and tightens the
/// inner tolerance.
AlmState update_penalty(const AlmState& st, crvec prev_row_violation, const AlmParams& params);

/// Called after every inner solve with the state that defined the subproblem.
using AlmObserver = std::function<void(const AlmState&, const PantrStats&)>;

AlmResult alm_solve(const ConstrainedNlp& nlp, crvec x0, const AlmParams& params = {},
                    const AlmObserver& observer = {});

}  // namespace pantr
