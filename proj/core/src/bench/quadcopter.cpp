#include "pantr/bench/quadcopter.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <memory>
#include <numbers>

namespace pantr::bench {

Eigen::Matrix3d QuadcopterModel::rotation(const Eigen::Vector3d& theta) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  return (AngleAxisd(theta(2), Vector3d::UnitZ()) * AngleAxisd(theta(1), Vector3d::UnitY()) *
          AngleAxisd(theta(0), Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d QuadcopterModel::thrust_direction(const Eigen::Vector3d& theta) {
  const real_t cr = std::cos(theta(0)), sr = std::sin(theta(0));
  const real_t cp = std::cos(theta(1)), sp = std::sin(theta(1));
  const real_t cy = std::cos(theta(2)), sy = std::sin(theta(2));
  return {cy * sp * cr + sy * sr, sy * sp * cr - cy * sr, cp * cr};
}

vec QuadcopterModel::dynamics(crvec x, crvec u) const {
  const Eigen::Vector3d theta = x.segment<3>(6);
  vec dx(nx);
  dx.segment<3>(0) = x.segment<3>(3);
  dx.segment<3>(3) = thrust_direction(theta) * u(0);
  dx(5) -= gravity;
  dx.segment<3>(6) = u.segment<3>(1);
  return dx;
}

Vjp QuadcopterModel::dynamics_vjp(crvec x, crvec u, crvec w) const {
  const real_t cr = std::cos(x(6)), sr = std::sin(x(6));
  const real_t cp = std::cos(x(7)), sp = std::sin(x(7));
  const real_t cy = std::cos(x(8)), sy = std::sin(x(8));
  const Eigen::Vector3d wv = w.segment<3>(3);
  const Eigen::Vector3d d_roll{-cy * sp * sr + sy * cr, -sy * sp * sr - cy * cr, -cp * sr};
  const Eigen::Vector3d d_pitch{cy * cp * cr, sy * cp * cr, -sp * cr};
  const Eigen::Vector3d d_yaw{-sy * sp * cr + cy * sr, cy * sp * cr + sy * sr, 0};

  Vjp out{vec::Zero(nx), vec::Zero(nu)};
  out.x.segment<3>(3) = w.segment<3>(0);
  out.x(6) = u(0) * d_roll.dot(wv);
  out.x(7) = u(0) * d_pitch.dot(wv);
  out.x(8) = u(0) * d_yaw.dot(wv);
  out.u(0) = thrust_direction(x.segment<3>(6)).dot(wv);
  out.u.segment<3>(1) = w.segment<3>(6);
  return out;
}

ContinuousModel QuadcopterModel::as_model() const {
  ContinuousModel m;
  m.nx = nx;
  m.nu = nu;
  m.f = [self = *this](crvec x, crvec u) { return self.dynamics(x, u); };
  m.vjp = [self = *this](crvec x, crvec u, crvec w) { return self.dynamics_vjp(x, u, w); };
  return m;
}

vec rk4_step(const QuadcopterModel& model, crvec x, crvec u) {
  return rk4_step(model.as_model(), model.Ts, x, u);
}

Box OcpSpec::constraint_bounds() const {
  constexpr real_t pi = std::numbers::pi;
  vec lb(4), ub(4);
  lb << -pi / 2, -pi / 2, std::cos(pi / 6), 0.1 * 0.1;
  ub << pi / 2, pi / 2, inf, inf;
  const index_t nc = n_constraints();
  return Box::make(lb.head(nc), ub.head(nc));
}

index_t OcpSpec::n_constraints() const {
  if (!state_constraints) return 0;
  return cylinder ? 4 : 3;
}

vec OcpSpec::constraint(crvec x) const {
  vec c(4);
  c << x(6), x(7), std::cos(x(6)) * std::cos(x(7)), x(0) * x(0) + x(1) * x(1);
  return c.head(n_constraints());
}

vec OcpSpec::constraint_vjp(crvec x, crvec w) const {
  vec g = vec::Zero(QuadcopterModel::nx);
  if (n_constraints() == 0) return g;
  g(6) = w(0) - w(2) * std::sin(x(6)) * std::cos(x(7));
  g(7) = w(1) - w(2) * std::cos(x(6)) * std::sin(x(7));
  if (n_constraints() > 3) {
    g(0) = 2 * w(3) * x(0);
    g(1) = 2 * w(3) * x(1);
  }
  return g;
}

real_t OcpSpec::stage_cost(crvec x, crvec u) const {
  return terminal_cost(x) + w_rate * u.segment<3>(1).squaredNorm() + w_thrust * u(0) * u(0);
}

real_t OcpSpec::terminal_cost(crvec x) const {
  return w_position * (x.segment<3>(0) - p_ref).squaredNorm() +
         w_velocity * x.segment<3>(3).squaredNorm() + w_angle * x.segment<3>(6).squaredNorm();
}

ShootingProblem OcpSpec::shooting() const {
  ShootingProblem sp;
  sp.model = model.as_model();
  sp.Ts = model.Ts;
  sp.horizon = horizon;
  const OcpSpec self = *this;
  auto state_grad = [self](crvec x) {
    vec g(QuadcopterModel::nx);
    g.segment<3>(0) = 2 * self.w_position * (x.segment<3>(0) - self.p_ref);
    g.segment<3>(3) = 2 * self.w_velocity * x.segment<3>(3);
    g.segment<3>(6) = 2 * self.w_angle * x.segment<3>(6);
    return g;
  };
  sp.stage.value = [self](crvec x, crvec u) { return self.stage_cost(x, u); };
  sp.stage.grad = [self, state_grad](crvec x, crvec u) {
    Vjp g{state_grad(x), vec(QuadcopterModel::nu)};
    g.u(0) = 2 * self.w_thrust * u(0);
    g.u.segment<3>(1) = 2 * self.w_rate * u.segment<3>(1);
    return g;
  };
  sp.terminal.value = [self](crvec x) { return self.terminal_cost(x); };
  sp.terminal.grad = state_grad;
  if (n_constraints() > 0) {
    StateConstraint c;
    c.nc = n_constraints();
    c.value = [self](crvec x) { return self.constraint(x); };
    c.vjp = [self](crvec x, crvec w) { return self.constraint_vjp(x, w); };
    sp.constraint = std::move(c);
  }
  return sp;
}

Rollout shoot(const OcpSpec& spec, crvec x_init, crvec u_seq) {
  return shoot(spec.shooting(), x_init, u_seq);
}

vec shoot_adjoint(const OcpSpec& spec, crvec x_init, crvec u_seq) {
  return shoot_adjoint(spec.shooting(), x_init, u_seq);
}

ConstrainedNlp ocp_as_nlp(const OcpSpec& spec, crvec x_init) {
  if (spec.horizon < 1) throw std::invalid_argument("ocp_as_nlp: horizon must be at least 1");
  const index_t N = spec.horizon, nu = QuadcopterModel::nu;
  auto sp = std::make_shared<const ShootingProblem>(spec.shooting());
  auto x0 = std::make_shared<const vec>(x_init);

  ConstrainedNlp nlp;
  nlp.n = nu * N;
  nlp.m = spec.n_constraints() * N;
  nlp.eval_f = [sp, x0](crvec u) { return shoot(*sp, *x0, u).cost; };
  nlp.eval_grad_f = [sp, x0](crvec u) { return shoot_adjoint(*sp, *x0, u); };
  nlp.eval_g = [sp, x0](crvec u) { return shoot_constraints(*sp, *x0, u); };
  nlp.eval_g_jvp_t = [sp, x0](crvec u, crvec w) { return shoot_constraints_vjp(*sp, *x0, u, w); };
  nlp.C = Box{spec.u_lb.replicate(N, 1), spec.u_ub.replicate(N, 1)};
  const Box D = spec.constraint_bounds();
  nlp.D = Box{D.lower.replicate(N, 1), D.upper.replicate(N, 1)};
  return nlp;
}

vec hover_input(const OcpSpec& spec) {
  vec u = vec::Zero(QuadcopterModel::nu);
  u(0) = spec.model.gravity;
  return u;
}

}  // namespace pantr::bench
