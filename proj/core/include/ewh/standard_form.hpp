#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "ewh/conic.hpp"
#include "ewh/kkt.hpp"

namespace ewh {

/// Conic program in solver form:
///   min c'x  s.t.  A x = b,  G x + s = h,  s in R+^l x SOC(q_1) x ...
/// Variables fixed by identical lower/upper bounds are substituted away;
/// remaining finite bounds become LP-cone rows. Ruiz equilibration scalings
/// are kept so solutions can be mapped back.
struct StandardForm {
  Eigen::SparseMatrix<double> A, G;
  Eigen::VectorXd b, h, c;
  ConeDims dims;
  double obj_constant = 0.0;  // program constant plus folded fixed-variable terms

  int n_orig = 0;
  std::vector<int> std_of_orig;     // original index -> solver index, -1 when fixed
  std::vector<double> fixed_value;  // value per original index (meaningful when fixed)

  bool trivially_infeasible = false;
  std::string infeasibility_note;

  // Equilibration: solver works on (Dra A Dc, Drg G Dc, ...); x = Dc x~.
  Eigen::VectorXd col_scale, row_scale_a, row_scale_g;

  /// Map a solver-space point back to the full original variable vector.
  std::vector<double> lift(const Eigen::VectorXd& x_std) const;
};

/// Convert with optional bound overrides (same length as prog.variables);
/// entries of NaN mean "keep the program bound". Used by branch and bound to
/// fix binaries without rewriting the program.
StandardForm to_standard_form(const ConicProgram& prog,
                              const std::vector<double>* lo_override = nullptr,
                              const std::vector<double>* hi_override = nullptr,
                              bool equilibrate = true);

}  // namespace ewh
