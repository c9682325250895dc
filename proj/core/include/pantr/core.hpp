#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pantr {

using real_t = double;
using index_t = Eigen::Index;
using vec = Eigen::VectorXd;
using mat = Eigen::MatrixXd;
using crvec = Eigen::Ref<const vec>;

inline constexpr real_t inf = std::numeric_limits<real_t>::infinity();

/// Raised when a user callback returns a non-finite value. Carries the point
/// at which the evaluation was attempted.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, vec point)
      : std::runtime_error(what), point_(std::move(point)) {}
  const vec& point() const noexcept { return point_; }

 private:
  vec point_;
};

/// Rectangular set [lower, upper]. Entries may be infinite.
struct Box {
  vec lower;
  vec upper;

  static Box make(vec lower, vec upper);
  static Box unbounded(index_t n);
  index_t size() const { return lower.size(); }
  vec project(crvec z) const;
  bool contains(crvec z) const;
};

/// g(x) = 0.
struct Zero {};

/// g(x) = lambda * ||x||_1.
struct L1 {
  real_t lambda = 1;
};

/// The nonsmooth term of the composite problem: the indicator of a box, a
/// scaled l1 norm, or nothing.
using NonsmoothTerm = std::variant<Zero, Box, L1>;

NonsmoothTerm make_box_term(vec lower, vec upper);
NonsmoothTerm make_l1_term(real_t lambda);

/// g(x); +inf outside the box for the indicator variant.
real_t nonsmooth_value(const NonsmoothTerm& g, crvec x);

/// Euclidean diameter of dom g; +inf unless g is the indicator of a bounded box.
real_t domain_diameter(const NonsmoothTerm& g);

/// argmin_u { g(u) + ||u - v||^2 / (2 gamma) }.
vec prox(const NonsmoothTerm& g, crvec v, real_t gamma);

/// min psi(x) + g(x). psi is smooth and accessed through value, gradient and
/// Hessian-vector product callbacks. Callbacks must be re-entrant.
struct CompositeProblem {
  index_t dim = 0;
  std::function<real_t(crvec)> eval_f;
  std::function<vec(crvec)> eval_grad_f;
  std::function<vec(crvec, crvec)> eval_hvp;  // (x, v) -> H(x) v
  NonsmoothTerm nonsmooth = Zero{};
};

/// A forward-backward step x -> x_hat = T_gamma(x) together with the cached
/// quantities needed by the solvers.
struct FbPoint {
  vec x;
  vec x_hat;
  vec residual;  // (x - x_hat) / gamma
  real_t gamma = 0;
  real_t f_x = 0;
  vec grad_x;
  real_t fbe = 0;
};

/// Evaluates psi and its gradient at x and performs the forward-backward step.
/// Throws EvaluationError if either is non-finite.
FbPoint fb_step(const CompositeProblem& p, crvec x, real_t gamma);

/// Same as above, reusing psi(x) and its gradient.
FbPoint fb_step(const CompositeProblem& p, crvec x, real_t f_x, crvec grad_x,
                real_t gamma);

/// Forward-backward envelope at fb.x, evaluated at its minimizer fb.x_hat.
real_t fbe_at(const CompositeProblem& p, const FbPoint& fb);

struct ActiveSet {
  std::vector<index_t> active;    // K
  std::vector<index_t> inactive;  // J
  std::vector<index_t> lower_active;
  std::vector<index_t> upper_active;
};

/// Coordinates where the forward point x - gamma grad psi(x) lands on (or
/// beyond) a box bound, or inside the l1 dead zone. Ties count as active.
ActiveSet active_set(const FbPoint& fb, const NonsmoothTerm& g);

struct DistSq {
  real_t value;
  vec grad;
};

/// (1/2) ||z - P_D(z)||^2_Sigma and its gradient Sigma (z - P_D(z)).
DistSq dist_sq_sigma(crvec z, const Box& D, crvec sigma);

/// ||x - prox_g(x - grad, 1)||_inf. Step-size independent stationarity
/// measure used as the termination criterion by all solvers.
real_t stationarity_inf(const NonsmoothTerm& g, crvec x, crvec grad);

bool all_finite(crvec v);

}  // namespace pantr
