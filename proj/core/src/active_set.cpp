#include "ewh/active_set.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "ewh/common.hpp"

namespace ewh {

std::set<std::string> get_active_set(const ConicProgram& prog, const Solution& sol,
                                     double tol) {
  std::set<std::string> active;
  const auto& x = sol.primal;
  for (const auto& row : prog.linear_constraints) {
    if (row.sense != Sense::LessEqual) continue;
    double ax = 0.0;
    for (auto [i, c] : row.terms) ax += c * x[i];
    double slack = row.rhs - ax;
    if (slack <= tol * std::max(1.0, std::fabs(row.rhs))) active.insert(row.tag);
  }
  for (const auto& cone : prog.soc_constraints) {
    double head = cone.members[0].eval(x);
    double norm2 = 0.0;
    for (std::size_t k = 1; k < cone.members.size(); ++k) {
      double m = cone.members[k].eval(x);
      norm2 += m * m;
    }
    double slack = head - std::sqrt(norm2);
    if (slack <= tol * std::max(1.0, std::fabs(head))) active.insert(cone.tag);
  }
  return active;
}

std::vector<double> RestrictResult::lift(const std::vector<double>& x_restricted) const {
  std::vector<double> x = fixed;
  for (std::size_t j = 0; j < orig_of_restricted.size(); ++j)
    x[orig_of_restricted[j]] = x_restricted[j];
  return x;
}

RestrictResult restrict_program(const ConicProgram& prog,
                                const std::map<std::string, int>& binary_assignment,
                                const std::set<std::string>& active_tags) {
  std::vector<std::string> problems;

  std::unordered_set<std::string> known_tags;
  for (const auto& row : prog.linear_constraints) known_tags.insert(row.tag);
  for (const auto& cone : prog.soc_constraints) known_tags.insert(cone.tag);
  for (const auto& tag : active_tags)
    if (!known_tags.count(tag)) problems.push_back("active tag not in program: " + tag);

  const int n = static_cast<int>(prog.variables.size());
  std::vector<double> value(n, 0.0);
  std::vector<char> is_fixed(n, 0);
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < n; ++i) index.emplace(prog.variables[i].id, i);

  for (const auto& [id, v] : binary_assignment) {
    auto it = index.find(id);
    if (it == index.end()) {
      problems.push_back("assignment names unknown variable: " + id);
      continue;
    }
    if (!prog.variables[it->second].is_binary) {
      problems.push_back("assignment names non-binary variable: " + id);
      continue;
    }
    if (v != 0 && v != 1) {
      problems.push_back(strfmt("assignment for %s is %d, expected 0 or 1", id.c_str(), v));
      continue;
    }
    value[it->second] = v;
    is_fixed[it->second] = 1;
  }
  for (int i = 0; i < n; ++i)
    if (prog.variables[i].is_binary && !is_fixed[i])
      problems.push_back("no assignment for binary variable: " + prog.variables[i].id);
  if (!problems.empty()) throw ValidationError(problems);

  RestrictResult out;
  out.fixed.assign(n, 0.0);
  std::vector<int> new_index(n, -1);
  for (int i = 0; i < n; ++i) {
    if (is_fixed[i]) {
      out.fixed[i] = value[i];
      continue;
    }
    new_index[i] = static_cast<int>(out.prog.variables.size());
    out.orig_of_restricted.push_back(i);
    out.prog.variables.push_back(prog.variables[i]);
  }

  auto fold_terms = [&](const std::vector<std::pair<int, double>>& terms, double& shift) {
    std::vector<std::pair<int, double>> kept;
    for (auto [i, c] : terms) {
      if (is_fixed[i])
        shift += c * value[i];
      else
        kept.emplace_back(new_index[i], c);
    }
    return kept;
  };

  for (const auto& row : prog.linear_constraints) {
    if (row.sense == Sense::LessEqual && !active_tags.count(row.tag)) continue;
    double shift = 0.0;
    LinearConstraint nr;
    nr.terms = fold_terms(row.terms, shift);
    nr.sense = row.sense;
    nr.rhs = row.rhs - shift;
    nr.tag = row.tag;
    out.prog.linear_constraints.push_back(std::move(nr));
  }
  for (const auto& cone : prog.soc_constraints) {
    if (!active_tags.count(cone.tag)) continue;
    SocConstraint nc;
    nc.tag = cone.tag;
    for (const auto& mem : cone.members) {
      AffineExpr e;
      e.constant = mem.constant;
      e.terms = fold_terms(mem.terms, e.constant);
      nc.members.push_back(std::move(e));
    }
    out.prog.soc_constraints.push_back(std::move(nc));
  }

  out.prog.objective_constant = prog.objective_constant;
  for (auto [i, c] : prog.objective) {
    if (is_fixed[i])
      out.prog.objective_constant += c * value[i];
    else
      out.prog.objective.emplace_back(new_index[i], c);
  }
  return out;
}

}  // namespace ewh
