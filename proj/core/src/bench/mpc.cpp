#include "pantr/bench/mpc.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace pantr::bench {

const char* to_string(SolverKind s) {
  return s == SolverKind::pantr ? "pantr" : "fbs";
}

void MpcOptions::validate() const {
  if (horizon < 1 || horizon > 60) throw std::invalid_argument("MpcOptions: horizon must lie in [1, 60]");
  if (steps < 1) throw std::invalid_argument("MpcOptions: steps must be positive");
  if (!(tol > 0)) throw std::invalid_argument("MpcOptions: tol must be positive");
  if (x0.size() != 0 && (x0.size() != QuadcopterModel::nx || !x0.allFinite()))
    throw std::invalid_argument("MpcOptions: x0 must hold 9 finite values");
}

vec default_initial_state() {
  vec x = vec::Zero(QuadcopterModel::nx);
  x(0) = -0.25;
  x(1) = -0.15;
  return x;
}

AlmParams mpc_alm_params(const MpcOptions& opt) {
  AlmParams p;
  p.final_tol = opt.tol;
  p.constraint_tol = opt.tol;
  p.solver = opt.solver == SolverKind::pantr ? InnerSolver::pantr : InnerSolver::fbs;
  p.inner.seed = opt.seed;
  return p;
}

vec shift_blocks(crvec v, index_t block) {
  if (block <= 0 || v.size() % block != 0) throw std::invalid_argument("shift_blocks: bad block size");
  vec out(v.size());
  const index_t n = v.size();
  if (n == 0) return out;
  out.head(n - block) = v.tail(n - block);
  out.tail(block) = v.tail(block);
  return out;
}

std::vector<MpcRunRecord> mpc_simulate(const OcpSpec& base, const MpcOptions& opt) {
  opt.validate();
  OcpSpec spec = base;
  spec.horizon = opt.horizon;
  spec.state_constraints = opt.state_constraints;
  const index_t nu = QuadcopterModel::nu;
  const index_t N = opt.horizon;
  const index_t nc = spec.n_constraints();

  const vec u_cold = Box{spec.u_lb, spec.u_ub}.project(vec::Zero(nu)).replicate(N, 1);
  const vec y_cold = vec::Zero(nc * N);
  vec x = opt.x0.size() ? opt.x0 : default_initial_state();
  vec u_guess = u_cold, y_guess = y_cold;
  vec u_applied = u_cold.head(nu);
  AlmParams params = mpc_alm_params(opt);

  std::vector<MpcRunRecord> out;
  out.reserve(opt.steps);
  for (unsigned k = 0; k < opt.steps; ++k) {
    const ConstrainedNlp nlp = ocp_as_nlp(spec, x);
    params.y0 = y_guess;

    MpcRunRecord rec;
    rec.solver = opt.solver;
    rec.horizon = N;
    rec.step = k;
    rec.warm = opt.warm;
    rec.seed = opt.seed;

    const auto t0 = std::chrono::steady_clock::now();
    AlmResult res;
    bool usable = true;
    try {
      res = alm_solve(nlp, u_guess, params);
      usable = res.stats.status != AlmStatus::not_finite && res.x.allFinite() && res.y.allFinite();
    } catch (const std::exception&) {
      usable = false;
      res.stats.status = AlmStatus::not_finite;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();

    rec.inner_iters = res.stats.inner_iterations;
    rec.outer_iters = res.stats.outer_iterations;
    rec.cg_iters = res.stats.cg_iterations;
    rec.gamma_halvings = res.stats.gamma_halvings;
    rec.tr_subproblems = res.stats.tr_subproblems;
    rec.residual = res.stats.inner_residual;
    rec.violation = res.stats.violation;
    rec.status = usable ? res.stats.status : AlmStatus::not_finite;

    if (usable) {
      try {
        rec.cost = shoot(spec, x, res.x).cost;
      } catch (const EvaluationError&) {
        rec.cost = inf;
      }
      u_applied = res.x.head(nu);
    } else {
      rec.cost = inf;
      rec.fallback = true;
    }

    x = rk4_step(spec.model, x, u_applied);
    rec.state = x;
    rec.input = u_applied;
    out.push_back(std::move(rec));

    if (opt.warm && usable) {
      u_guess = shift_blocks(res.x, nu);
      y_guess = nc > 0 ? shift_blocks(res.y, nc) : y_cold;
    } else {
      u_guess = u_cold;
      y_guess = y_cold;
    }
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<MpcRunRecord>& records) {
  os << csv_header << '\n';
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%lld,%u,%d,%lld,%u,%u,%lld,%u,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  to_string(r.solver), static_cast<long long>(r.horizon), r.step, r.warm ? 1 : 0,
                  static_cast<long long>(r.wall_ns), r.inner_iters, r.outer_iters,
                  static_cast<long long>(r.cg_iters), r.gamma_halvings, r.residual, r.violation,
                  r.cost, r.state(0), r.state(1), r.state(2));
    os << buf;
  }
}

}  // namespace pantr::bench
