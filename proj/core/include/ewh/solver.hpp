#pragma once

#include "ewh/conic.hpp"

namespace ewh {

/// Solve the continuous relaxation (binaries treated as box-bounded reals).
Solution solve_continuous(const ConicProgram& prog, const SolverConfig& cfg = {});

/// Branch-and-bound over the conic relaxation: most-fractional branching,
/// dive-first exploration with best-bound backtracking, incumbent polishing
/// with binaries fixed. With zero binaries this is exactly solve_continuous.
Solution solve_micp(const ConicProgram& prog, const SolverConfig& cfg = {});

}  // namespace ewh
