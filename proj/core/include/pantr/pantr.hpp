#pragma once

#include "pantr/core.hpp"
#include "pantr/trsub.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace pantr {

/// Parameters of the proximal trust-region solver. The defaults for the
/// acceptance thresholds and radius factors are the values used for the
/// quadcopter benchmark.
struct PantrParams {
  real_t mu1 = 0.2;   // accept the candidate step when rho >= mu1
  real_t mu2 = 0.5;   // expand the radius when rho >= mu2
  real_t c1 = 0.35;   // shrink factor after a rejection
  real_t c2 = 0.99;   // mild shrink after a weak acceptance
  real_t c3 = 10;     // expansion factor
  std::optional<real_t> delta0;  // default max(1, ||R(x_hat_0)||)
  /// Upper bound on the radius; default is the diameter of dom g, which keeps
  /// candidate steps bounded when dom g is a bounded box.
  std::optional<real_t> max_radius;
  real_t alpha = 0.95;           // safety factor of the step-size check
  std::optional<real_t> gamma0;  // default alpha / L_estimate
  real_t gamma_min = 1e-15;
  real_t tol = 1e-8;
  unsigned max_iters = 1000;
  /// Fixed relative CG tolerance. When empty the forcing term
  /// min(0.1, sqrt(||g_J||)) is used.
  std::optional<real_t> cg_tol;
  std::optional<index_t> max_cg_iters;  // default |J|
  std::uint64_t seed = 0;               // probe direction of the L estimate

  /// Throws std::invalid_argument on inconsistent values. mu1 = +inf is
  /// accepted and disables candidate steps altogether.
  void validate() const;
};

enum class SolverStatus { converged, max_iters, not_finite };

const char* to_string(SolverStatus s);

struct PantrStats {
  unsigned iterations = 0;
  unsigned accepted_steps = 0;
  unsigned rejected_steps = 0;
  unsigned fb_fallbacks = 0;
  unsigned gamma_halvings = 0;
  unsigned tr_subproblems = 0;
  index_t total_cg_iterations = 0;
  index_t hvp_evaluations = 0;
  index_t gradient_evaluations = 0;
  real_t initial_gamma = 0;
  real_t final_gamma = 0;
  real_t final_residual_inf = inf;
  real_t final_fbe = inf;
  SolverStatus status = SolverStatus::max_iters;
};

struct SolveResult {
  vec x;
  PantrStats stats;
};

/// Snapshot passed to the optional per-iteration observer. Describes x_k
/// after the step size for iteration k has been fixed.
struct IterationInfo {
  unsigned k = 0;
  const vec* x = nullptr;
  real_t gamma = 0;
  real_t fbe = 0;            // phi_gamma(x_k)
  real_t residual_norm = 0;  // ||R_gamma(x_k)||_2
  real_t stationarity = 0;   // termination measure at x_k
  unsigned halvings = 0;     // halvings performed in this iteration
  bool accepted = false;     // candidate step accepted
  TrStatus tr_status = TrStatus::interior;
};

using IterationObserver = std::function<void(const IterationInfo&)>;

struct CandidateStep {
  vec d;
  real_t model_value = 0;  // q(d) = q^J(d_J) - ||d_K||^2 / (2 gamma)
  TrResult tr;
  index_t hvp_evaluations = 0;
};

/// Newton-type candidate direction at the forward-backward point fb_hat:
/// active coordinates are pinned to the bound they are pushed onto, the
/// remaining ones solve the reduced trust-region subproblem with radius.
CandidateStep candidate_step(const CompositeProblem& p, const FbPoint& fb_hat, real_t radius,
                             const PantrParams& params = {});

/// (fbe_hat - fbe_trial) / -q_d, or -inf when q_d == 0.
real_t acceptance_ratio(real_t fbe_hat, real_t fbe_trial, real_t q_d);

/// Radius update driven by the acceptance ratio, clamped from below by floor.
real_t update_radius(real_t radius, real_t rho, real_t d_norm, const PantrParams& params,
                     real_t floor = 0);

/// Quadratic upper bound test on psi between fb.x and fb.x_hat. Steps with
/// ||x_hat - x||_inf <= sqrt(eps) (1 + ||x||_inf) always pass.
bool check_gamma(const FbPoint& fb, real_t psi_hat, real_t alpha);
bool check_gamma(const CompositeProblem& p, const FbPoint& fb, real_t alpha);

/// alpha / L, with L estimated from one finite-difference gradient probe.
real_t estimate_initial_gamma(const CompositeProblem& p, crvec x0, real_t alpha,
                              std::uint64_t seed);

SolveResult pantr_solve(const CompositeProblem& p, crvec x0, const PantrParams& params = {},
                        const IterationObserver& observer = {});

struct FbsParams {
  real_t tol = 1e-8;
  unsigned max_iters = 100000;
  real_t alpha = 0.95;
  std::optional<real_t> gamma0;
  real_t gamma_min = 1e-15;
  std::uint64_t seed = 0;
};

/// Proximal gradient method with the same adaptive step size and termination
/// criterion as pantr_solve.
SolveResult fbs_solve(const CompositeProblem& p, crvec x0, const FbsParams& params = {},
                      const IterationObserver& observer = {});

}  // namespace pantr
