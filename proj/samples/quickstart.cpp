// Copyright (c) dcalm contributors
//
// Recovers a 5-sparse signal from 64 Gaussian measurements with both solvers,
// then places one facility for a synthetic 50-customer instance.

#include <cstdio>

#include "dcalm/dcalm.hpp"

int main() {
  using namespace dcalm;

  RecoverySpec spec;
  spec.n = 256;
  spec.m = 64;
  spec.sparsity = 5;
  const SparseRecoveryInstance inst = generate_recovery_instance(spec, 7);
  const DcProgram prog = build_recovery_program(inst);

  const SolveResult alm = solve(prog, recovery_solver_params(inst.model), inst.x0,
                                Vector::Zero(0), recovery_initial_multipliers(spec.m));
  std::printf("psalmdc: %s after %zu iterations, relative error %.3e\n",
              std::string(to_string(alm.status)).c_str(), alm.reports.size(),
              relative_error(alm.point.x, inst.signal));

  const DcaResult dca = dca_solve(prog, DcaParams{}, inst.x0);
  std::printf("dca:     %s after %zu iterations, relative error %.3e\n",
              std::string(to_string(dca.status)).c_str(), dca.reports.size(),
              relative_error(dca.point.x, inst.signal));

  const WeberInstance weber = synthetic_weber_instance(1);
  const SolveResult loc = solve(build_weber_program(weber), weber_solver_params(weber),
                                weber_random_start(weber, 3), weber_initial_multipliers(weber),
                                Vector::Zero(0));
  std::printf("weber:   facility at (%.4f, %.4f), objective %.3f\n", loc.point.x[0],
              loc.point.x[1], weber_objective(weber, loc.point.x));
  return 0;
}
