#pragma once

#include "pantr/alm.hpp"
#include "pantr/bench/quadcopter.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pantr::bench {

enum class SolverKind { pantr, fbs };

const char* to_string(SolverKind s);

struct MpcOptions {
  SolverKind solver = SolverKind::pantr;
  index_t horizon = 12;
  unsigned steps = 60;
  bool warm = true;
  real_t tol = 1e-8;  // inner and constraint tolerance
  std::uint64_t seed = 0;
  vec x0;  // initial plant state, default_initial_state() when empty
  bool state_constraints = true;

  void validate() const;
};

/// Statistics of one closed-loop step.
struct MpcRunRecord {
  SolverKind solver = SolverKind::pantr;
  index_t horizon = 0;
  unsigned step = 0;
  bool warm = false;
  std::uint64_t seed = 0;
  std::int64_t wall_ns = 0;
  unsigned inner_iters = 0;
  unsigned outer_iters = 0;
  index_t cg_iters = 0;
  unsigned gamma_halvings = 0;
  unsigned tr_subproblems = 0;
  real_t residual = 0;   // final inner stationarity measure
  real_t violation = 0;  // final ALM constraint violation
  real_t cost = 0;       // OCP objective at the returned input sequence
  vec state;             // plant state after applying input
  vec input;             // applied input
  AlmStatus status = AlmStatus::converged;
  bool fallback = false;  // previous input reapplied after a solver failure

  bool converged() const { return status == AlmStatus::converged; }
};

/// Start on the far side of the cylinder so that the reference can only be
/// reached by flying around it.
vec default_initial_state();

/// Solver settings used for every OCP of the closed loop.
AlmParams mpc_alm_params(const MpcOptions& opt);

/// Closed-loop simulation: solve, apply the first input, integrate one RK4
/// step. A warm start shifts the previous inputs and multipliers by one
/// stage and repeats the last block.
std::vector<MpcRunRecord> mpc_simulate(const OcpSpec& spec, const MpcOptions& opt);

/// Shift by one block of size block, repeating the last block.
vec shift_blocks(crvec v, index_t block);

inline constexpr const char* csv_header =
    "solver,horizon,step,warm,wall_ns,inner_iters,outer_iters,cg_iters,gamma_halvings,"
    "residual,violation,cost,px,py,pz";

void write_csv(std::ostream& os, const std::vector<MpcRunRecord>& records);

}  // namespace pantr::bench
