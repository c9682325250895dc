#include "pantr_tools/cli.hpp"

#include "pantr/bench/mpc.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>

namespace pantr::tools {

namespace {

struct Options {
  std::string problem = "quadcopter";
  std::vector<std::string> solvers{"pantr"};
  std::vector<int> horizons{12};
  unsigned steps = 60;
  bool warm = false;
  bool cold = false;
  double tol = 1e-8;
  std::string out_path;
  std::uint64_t seed = 0;
  std::vector<double> x0;
  bool no_state_constraints = false;
};

void configure(CLI::App& app, Options& o) {
  app.add_option("--problem", o.problem, "Benchmark problem")
      ->check(CLI::IsMember({"quadcopter"}))
      ->capture_default_str();
  app.add_option("--solver", o.solvers, "Inner solver(s), comma separated")
      ->delimiter(',')
      ->check(CLI::IsMember({"pantr", "fbs"}))
      ->capture_default_str();
  app.add_option("--horizon", o.horizons, "Horizon length(s) N in [1, 60], comma separated")
      ->delimiter(',')
      ->check(CLI::Range(1, 60))
      ->capture_default_str();
  app.add_option("--steps", o.steps, "Closed-loop steps per run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--warm", o.warm, "Warm-start from the shifted previous solution (default)");
  app.add_flag("--cold", o.cold, "Cold-start every OCP");
  app.add_option("--tol", o.tol, "Stationarity and constraint tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", o.out_path, "Output CSV, standard output when omitted");
  app.add_option("--seed", o.seed, "Seed of the initial step-size probe")->capture_default_str();
  app.add_option("--x0", o.x0, "Initial state p,v,theta (9 values)")
      ->delimiter(',')
      ->expected(9);
  app.add_flag("--no-state-constraints", o.no_state_constraints,
               "Drop the tilt and cylinder constraints");
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadcopter MPC benchmark", "pantr_bench"};
  Options o;
  configure(app, o);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (!o.x0.empty() && o.x0.size() != 9)
      throw CLI::ValidationError("--x0", "expected 9 comma separated values");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  std::vector<bool> starts;
  if (o.warm || !o.cold) starts.push_back(true);
  if (o.cold) starts.push_back(false);

  const bench::OcpSpec spec;
  std::vector<bench::MpcRunRecord> records;
  bool failed = false;
  for (const auto& solver : o.solvers) {
    for (int N : o.horizons) {
      for (bool warm : starts) {
        bench::MpcOptions mo;
        mo.solver = solver == "fbs" ? bench::SolverKind::fbs : bench::SolverKind::pantr;
        mo.horizon = N;
        mo.steps = o.steps;
        mo.warm = warm;
        mo.tol = o.tol;
        mo.seed = o.seed;
        mo.state_constraints = !o.no_state_constraints;
        if (!o.x0.empty()) mo.x0 = Eigen::Map<const vec>(o.x0.data(), 9);
        try {
          auto run = bench::mpc_simulate(spec, mo);
          failed = failed || std::any_of(run.begin(), run.end(),
                                         [](const auto& r) { return !r.converged(); });
          records.insert(records.end(), run.begin(), run.end());
        } catch (const std::invalid_argument& e) {
          err << "error: " << e.what() << '\n';
          return 1;
        }
      }
    }
  }

  if (o.out_path.empty()) {
    bench::write_csv(out, records);
  } else {
    std::ofstream file(o.out_path, std::ios::binary);
    if (!file) {
      err << "error: cannot open " << o.out_path << '\n';
      return 1;
    }
    bench::write_csv(file, records);
  }
  if (failed) {
    err << "warning: at least one MPC step did not converge\n";
    return 2;
  }
  return 0;
}

}  // namespace pantr::tools
