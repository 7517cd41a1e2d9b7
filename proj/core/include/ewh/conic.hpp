#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ewh {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal };

/// Sparse affine expression sum(coeff_i * x_i) + constant.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  AffineExpr& add(int var, double coeff) {
    if (coeff != 0.0) terms.emplace_back(var, coeff);
    return *this;
  }
  double eval(const std::vector<double>& x) const {
    double v = constant;
    for (auto [i, c] : terms) v += c * x[i];
    return v;
  }
};

struct Variable {
  std::string id;
  double lower = -kInf;
  double upper = kInf;
  bool is_binary = false;
};

/// Row: terms . x  (sense)  rhs. Greater-equal rows are stored negated.
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  std::string tag;
};

/// members[0] >= || (members[1], ..., members[k-1]) ||_2.
struct SocConstraint {
  std::vector<AffineExpr> members;
  std::string tag;
};

struct ConicProgram {
  std::vector<Variable> variables;
  std::vector<LinearConstraint> linear_constraints;
  std::vector<SocConstraint> soc_constraints;
  std::vector<std::pair<int, double>> objective;  // minimize
  double objective_constant = 0.0;

  int num_binaries() const {
    int n = 0;
    for (const auto& v : variables) n += v.is_binary ? 1 : 0;
    return n;
  }
  std::vector<int> binary_indices() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(variables.size()); ++i)
      if (variables[i].is_binary) out.push_back(i);
    return out;
  }
  double objective_value(const std::vector<double>& x) const {
    double v = objective_constant;
    for (auto [i, c] : objective) v += c * x[i];
    return v;
  }
};

/// Incremental program construction with an id -> index registry.
/// Emission order is deterministic, so two builds of the same inputs
/// produce byte-identical programs.
class ProgramBuilder {
 public:
  int add_variable(const std::string& id, double lower, double upper, bool is_binary = false);
  int add_binary(const std::string& id) { return add_variable(id, 0.0, 1.0, true); }

  /// Index of a previously declared variable; throws on unknown id.
  int var(const std::string& id) const;
  bool has_var(const std::string& id) const { return index_.count(id) > 0; }

  void add_linear(std::vector<std::pair<int, double>> terms, Sense sense, double rhs,
                  std::string tag);
  /// terms . x >= rhs, stored as the negated <= row.
  void add_greater_equal(std::vector<std::pair<int, double>> terms, double rhs, std::string tag);
  void add_soc(std::vector<AffineExpr> members, std::string tag);

  void set_objective_coeff(int var, double coeff);
  void add_objective_coeff(int var, double coeff);
  void add_objective_constant(double c) { prog_.objective_constant += c; }

  const ConicProgram& program() const { return prog_; }
  ConicProgram take() { return std::move(prog_); }

 private:
  ConicProgram prog_;
  std::unordered_map<std::string, int> index_;
  std::unordered_map<int, int> obj_slot_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  SolveStatus status = SolveStatus::IterationLimit;
  std::vector<double> primal;          // one entry per program variable
  double objective = 0.0;              // objective coeffs . primal + constant
  std::vector<double> linear_slacks;   // per <= row: rhs - a.x (Equal rows: 0 slot)
  std::vector<double> soc_slacks;      // per cone: m0 - ||m1..||
  std::vector<std::pair<std::string, int>> binary_assignment;  // filled by MICP solves
  double solve_time_s = 0.0;
  int iterations = 0;       // interior-point iterations (continuous)
  int nodes = 0;            // branch-and-bound nodes (MICP)
};

struct SolverConfig {
  double feasibility_tol = 1e-6;   // verification / active-set scale
  double mip_gap = 1e-4;           // relative incumbent-bound gap
  double time_limit_s = 1e9;
  double integrality_tol = 1e-6;
  enum class Branching { MostFractional } branching = Branching::MostFractional;
  int node_limit = 100000;
  int max_ipm_iterations = 100;
  std::string dump_program_path;   // when set, programs are dumped in CBF before solving
};

/// Recompute inequality slacks of `prog` at the point `x`.
void compute_slacks(const ConicProgram& prog, const std::vector<double>& x,
                    std::vector<double>& linear_slacks, std::vector<double>& soc_slacks);

/// Worst constraint violation at x, measured per row as
/// residual / max(1, |rhs|). Covers rows, cones and variable bounds.
double max_violation(const ConicProgram& prog, const std::vector<double>& x);

/// Dump in Conic Benchmark Format for cross-checking with external solvers.
std::string dump_cbf(const ConicProgram& prog);

}  // namespace ewh
