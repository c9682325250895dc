#pragma once

#include "pantr/core.hpp"

#include <functional>

namespace pantr {

enum class TrStatus { interior, boundary, negative_curvature, max_iters };

const char* to_string(TrStatus s);

/// Reduced trust-region subproblem
///
///     minimize  1/2 <d, H d> + <g, d>   subject to  ||d|| <= radius,
///
/// where H is only available through products.
struct TrProblem {
  std::function<vec(crvec)> hvp_reduced;
  vec grad_reduced;
  real_t radius = 1;
  /// CG stops once ||r|| <= max(cg_tol, eps) * ||grad_reduced||. With an
  /// infinite radius nonpositive curvature ends CG at the current iterate.
  real_t cg_tol = 1e-1;
  index_t max_cg_iters = 0;  // 0 means |J|
};

struct TrResult {
  vec d;
  TrStatus status = TrStatus::interior;
  real_t model_value = 0;
  index_t cg_iterations = 0;
  index_t hvp_evaluations = 0;
};

/// Forcing term min(0.1, sqrt(||g||)).
real_t default_cg_tolerance(real_t grad_norm);

/// Truncated conjugate gradient method of Steihaug and Toint, started at d = 0.
/// The returned point never increases the model relative to the Cauchy point.
TrResult steihaug_cg(const TrProblem& tp);

struct TrOracleResult {
  vec d;
  real_t multiplier = 0;  // lambda of (H + lambda I) d = -g
  bool hard_case = false;
};

/// Global minimizer of the trust-region subproblem for a small dense symmetric
/// H, via an eigendecomposition and bisection on the secular equation. Intended
/// as a test oracle; throws std::runtime_error if the bisection fails.
TrOracleResult tr_exact_oracle(const mat& H, crvec g, real_t radius);

/// Positive tau with ||z + tau p|| = radius, assuming ||z|| <= radius.
real_t boundary_step(crvec z, crvec p, real_t radius);

}  // namespace pantr
