#include "ewh/conic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ewh/common.hpp"

namespace ewh {

int ProgramBuilder::add_variable(const std::string& id, double lower, double upper,
                                 bool is_binary) {
  if (index_.count(id)) throw ValidationError({"duplicate variable id " + id});
  if (lower > upper) throw ValidationError({"variable " + id + ": lower > upper"});
  int idx = static_cast<int>(prog_.variables.size());
  prog_.variables.push_back({id, lower, upper, is_binary});
  index_.emplace(id, idx);
  return idx;
}

int ProgramBuilder::var(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError({"unknown variable id " + id});
  return it->second;
}

void ProgramBuilder::add_linear(std::vector<std::pair<int, double>> terms, Sense sense, double rhs,
                                std::string tag) {
  prog_.linear_constraints.push_back({std::move(terms), sense, rhs, std::move(tag)});
}

void ProgramBuilder::add_greater_equal(std::vector<std::pair<int, double>> terms, double rhs,
                                       std::string tag) {
  for (auto& [i, c] : terms) c = -c;
  add_linear(std::move(terms), Sense::LessEqual, -rhs, std::move(tag));
}

void ProgramBuilder::add_soc(std::vector<AffineExpr> members, std::string tag) {
  if (members.size() < 2) throw ValidationError({"cone " + tag + ": needs >= 2 members"});
  prog_.soc_constraints.push_back({std::move(members), std::move(tag)});
}

void ProgramBuilder::set_objective_coeff(int var, double coeff) {
  auto it = obj_slot_.find(var);
  if (it == obj_slot_.end()) {
    obj_slot_.emplace(var, static_cast<int>(prog_.objective.size()));
    prog_.objective.emplace_back(var, coeff);
  } else {
    prog_.objective[it->second].second = coeff;
  }
}

void ProgramBuilder::add_objective_coeff(int var, double coeff) {
  auto it = obj_slot_.find(var);
  if (it == obj_slot_.end())
    set_objective_coeff(var, coeff);
  else
    prog_.objective[it->second].second += coeff;
}

void compute_slacks(const ConicProgram& prog, const std::vector<double>& x,
                    std::vector<double>& linear_slacks, std::vector<double>& soc_slacks) {
  linear_slacks.assign(prog.linear_constraints.size(), 0.0);
  for (size_t r = 0; r < prog.linear_constraints.size(); ++r) {
    const auto& row = prog.linear_constraints[r];
    if (row.sense != Sense::LessEqual) continue;
    double ax = 0;
    for (auto [i, c] : row.terms) ax += c * x[i];
    linear_slacks[r] = row.rhs - ax;
  }
  soc_slacks.assign(prog.soc_constraints.size(), 0.0);
  for (size_t k = 0; k < prog.soc_constraints.size(); ++k) {
    const auto& cone = prog.soc_constraints[k];
    double norm2 = 0;
    for (size_t j = 1; j < cone.members.size(); ++j) {
      double v = cone.members[j].eval(x);
      norm2 += v * v;
    }
    soc_slacks[k] = cone.members[0].eval(x) - std::sqrt(norm2);
  }
}

double max_violation(const ConicProgram& prog, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& row : prog.linear_constraints) {
    double ax = 0;
    for (auto [i, c] : row.terms) ax += c * x[i];
    double resid = row.sense == Sense::Equal ? std::abs(ax - row.rhs) : ax - row.rhs;
    worst = std::max(worst, resid / std::max(1.0, std::abs(row.rhs)));
  }
  for (const auto& cone : prog.soc_constraints) {
    double norm2 = 0;
    for (size_t j = 1; j < cone.members.size(); ++j) {
      double v = cone.members[j].eval(x);
      norm2 += v * v;
    }
    double rhs = cone.members[0].eval(x);
    worst = std::max(worst, (std::sqrt(norm2) - rhs) / std::max(1.0, std::abs(rhs)));
  }
  for (size_t i = 0; i < prog.variables.size(); ++i) {
    const auto& v = prog.variables[i];
    if (v.lower > -kInf)
      worst = std::max(worst, (v.lower - x[i]) / std::max(1.0, std::abs(v.lower)));
    if (v.upper < kInf) worst = std::max(worst, (x[i] - v.upper) / std::max(1.0, std::abs(v.upper)));
  }
  return worst;
}

// Conic Benchmark Format text, close enough to feed external solvers for
// spot checks. Affine cone members become auxiliary PSD-free "F/G" rows under
// a QUAD cone; variable bounds are emitted as ranged rows.
std::string dump_cbf(const ConicProgram& prog) {
  std::ostringstream os;
  os << "VER\n3\n\n";
  os << "OBJSENSE\nMIN\n\n";
  int n = static_cast<int>(prog.variables.size());
  os << "VAR\n" << n << " 1\nF " << n << "\n\n";
  if (prog.num_binaries() > 0) {
    os << "INT\n" << prog.num_binaries() << "\n";
    for (int i = 0; i < n; ++i)
      if (prog.variables[i].is_binary) os << i << "\n";
    os << "\n";
  }
  os << "OBJACOORD\n" << prog.objective.size() << "\n";
  for (auto [i, c] : prog.objective) os << i << " " << strfmt("%.17g", c) << "\n";
  os << "\n";
  if (prog.objective_constant != 0.0)
    os << "OBJBCOORD\n" << strfmt("%.17g", prog.objective_constant) << "\n\n";

  // Rows: equalities (L=), inequalities (L-), bounds (L- / L+), then cones.
  struct RowRef {
    const LinearConstraint* lc;
  };
  std::vector<std::string> domains;
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> consts;
  for (const auto& lc : prog.linear_constraints) {
    // a.x (<=|=) rhs  ->  a.x - rhs in {L-, L=}
    rows.push_back(lc.terms);
    consts.push_back(-lc.rhs);
    domains.push_back(lc.sense == Sense::Equal ? "L= 1" : "L- 1");
  }
  for (int i = 0; i < n; ++i) {
    const auto& v = prog.variables[i];
    if (v.lower > -kInf) {
      rows.push_back({{i, 1.0}});
      consts.push_back(-v.lower);
      domains.push_back("L+ 1");
    }
    if (v.upper < kInf) {
      rows.push_back({{i, 1.0}});
      consts.push_back(-v.upper);
      domains.push_back("L- 1");
    }
  }
  for (const auto& cone : prog.soc_constraints) {
    for (const auto& m : cone.members) {
      rows.push_back(m.terms);
      consts.push_back(m.constant);
    }
    domains.push_back(strfmt("Q %zu", cone.members.size()));
  }

  os << "CON\n" << rows.size() << " " << domains.size() << "\n";
  for (const auto& d : domains) os << d << "\n";
  os << "\n";
  size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  os << "ACOORD\n" << nnz << "\n";
  for (size_t r = 0; r < rows.size(); ++r)
    for (auto [i, c] : rows[r]) os << r << " " << i << " " << strfmt("%.17g", c) << "\n";
  os << "\n";
  size_t nb = 0;
  for (double c : consts) nb += c != 0.0 ? 1 : 0;
  os << "BCOORD\n" << nb << "\n";
  for (size_t r = 0; r < consts.size(); ++r)
    if (consts[r] != 0.0) os << r << " " << strfmt("%.17g", consts[r]) << "\n";
  return os.str();
}

}  // namespace ewh
