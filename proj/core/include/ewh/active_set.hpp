#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ewh/conic.hpp"

namespace ewh {

/// Tags of inequality constraints (linear <= rows and cones) whose slack at
/// the solution is within tol, scaled per row. Equalities never appear.
std::set<std::string> get_active_set(const ConicProgram& prog, const Solution& sol,
                                     double tol = 1e-6);

/// Surrogate program: binaries replaced by the given 0/1 constants,
/// inequalities outside active_tags dropped, equalities and variable bounds
/// kept. The variable list shrinks; lift_restricted maps a surrogate point
/// back onto the original variable order.
struct RestrictResult {
  ConicProgram prog;
  std::vector<int> orig_of_restricted;  // surrogate index -> original index
  std::vector<double> fixed;            // original-length template with binaries set

  std::vector<double> lift(const std::vector<double>& x_restricted) const;
};

RestrictResult restrict_program(const ConicProgram& prog,
                                const std::map<std::string, int>& binary_assignment,
                                const std::set<std::string>& active_tags);

/// Spec-shaped convenience wrapper around restrict_program.
inline ConicProgram restrict(const ConicProgram& prog,
                             const std::map<std::string, int>& binary_assignment,
                             const std::set<std::string>& active_tags) {
  return restrict_program(prog, binary_assignment, active_tags).prog;
}

}  // namespace ewh
