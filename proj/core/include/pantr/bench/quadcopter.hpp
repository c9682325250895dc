#pragma once

#include "pantr/alm.hpp"
#include "pantr/bench/shooting.hpp"

#include <Eigen/Core>

namespace pantr::bench {

/// Simplified quadcopter. State x = (p, v, theta) in R^9 with Euler angles
/// theta = (roll, pitch, yaw); input u = (a_t, omega) in R^4.
///
///   p' = v,   v' = R(theta) (0, 0, a_t) + (0, 0, -gravity),   theta' = omega
///
/// with R(theta) = R_z(yaw) R_y(pitch) R_x(roll).
struct QuadcopterModel {
  static constexpr index_t nx = 9;
  static constexpr index_t nu = 4;
  real_t gravity = 9.81;
  real_t Ts = 0.1;

  static Eigen::Matrix3d rotation(const Eigen::Vector3d& theta);
  /// Third column of rotation(theta), the thrust direction.
  static Eigen::Vector3d thrust_direction(const Eigen::Vector3d& theta);

  vec dynamics(crvec x, crvec u) const;
  Vjp dynamics_vjp(crvec x, crvec u, crvec w) const;
  ContinuousModel as_model() const;
};

vec rk4_step(const QuadcopterModel& model, crvec x, crvec u);

/// Quadcopter MPC problem: reach p_ref while keeping the tilt bounded and
/// staying outside a cylinder of radius 0.1 around the z axis.
struct OcpSpec {
  QuadcopterModel model;
  index_t horizon = 12;
  Eigen::Vector3d p_ref{0.25, 0.25, 0.5};
  real_t w_position = 10;
  real_t w_velocity = 1;
  real_t w_angle = 1;
  real_t w_rate = 10;
  real_t w_thrust = 1e-4;
  vec u_lb = (vec(4) << 0, -0.1, -0.1, -0.1).finished();
  vec u_ub = (vec(4) << 49, 0.1, 0.1, 0.1).finished();
  bool state_constraints = true;
  bool cylinder = true;

  /// Bounds of c(x) = (roll, pitch, cos roll cos pitch, p_x^2 + p_y^2), with
  /// the last row dropped when the cylinder is disabled.
  Box constraint_bounds() const;
  index_t n_constraints() const;  // per stage
  vec constraint(crvec x) const;
  vec constraint_vjp(crvec x, crvec w) const;

  real_t stage_cost(crvec x, crvec u) const;
  real_t terminal_cost(crvec x) const;
  ShootingProblem shooting() const;
};

Rollout shoot(const OcpSpec& spec, crvec x_init, crvec u_seq);
vec shoot_adjoint(const OcpSpec& spec, crvec x_init, crvec u_seq);

/// Single-shooting NLP in u in R^{4N}: f is the rollout cost, g stacks c(x^k)
/// for k = 1..N (omitted when state constraints are disabled).
ConstrainedNlp ocp_as_nlp(const OcpSpec& spec, crvec x_init);

/// Thrust that balances gravity, (gravity, 0, 0, 0).
vec hover_input(const OcpSpec& spec);

}  // namespace pantr::bench
