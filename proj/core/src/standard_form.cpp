#include "ewh/standard_form.hpp"

#include <cmath>

#include "ewh/common.hpp"

namespace ewh {

namespace {
constexpr double kFixEps = 1e-12;
constexpr double kFeasEps = 1e-9;

// Ruiz equilibration of the stacked [A; G] system. Rows belonging to one
// second-order cone share a single scale so the cone geometry is preserved.
void equilibrate(StandardForm& sf, int iters = 3) {
  int n = static_cast<int>(sf.G.cols());
  int p = static_cast<int>(sf.A.rows());
  int m = static_cast<int>(sf.G.rows());
  sf.col_scale = Eigen::VectorXd::Ones(n);
  sf.row_scale_a = Eigen::VectorXd::Ones(p);
  sf.row_scale_g = Eigen::VectorXd::Ones(m);
  if (n == 0) return;

  for (int round = 0; round < iters; ++round) {
    Eigen::VectorXd ra = Eigen::VectorXd::Zero(p), rg = Eigen::VectorXd::Zero(m),
                    cn = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < sf.A.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, c); it; ++it) {
        double a = std::abs(it.value());
        ra(it.row()) = std::max(ra(it.row()), a);
        cn(it.col()) = std::max(cn(it.col()), a);
      }
    for (int c = 0; c < sf.G.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, c); it; ++it) {
        double a = std::abs(it.value());
        rg(it.row()) = std::max(rg(it.row()), a);
        cn(it.col()) = std::max(cn(it.col()), a);
      }
    // One scale per SOC block: the block max.
    int off = sf.dims.l;
    for (int k : sf.dims.q) {
      double mx = rg.segment(off, k).maxCoeff();
      rg.segment(off, k).setConstant(mx);
      off += k;
    }
    auto scale_of = [](double v) { return v > 0 ? 1.0 / std::sqrt(v) : 1.0; };
    Eigen::VectorXd da = ra.unaryExpr(scale_of), dg = rg.unaryExpr(scale_of),
                    dc = cn.unaryExpr(scale_of);
    sf.A = da.asDiagonal() * sf.A * dc.asDiagonal();
    sf.G = dg.asDiagonal() * sf.G * dc.asDiagonal();
    sf.row_scale_a = sf.row_scale_a.cwiseProduct(da);
    sf.row_scale_g = sf.row_scale_g.cwiseProduct(dg);
    sf.col_scale = sf.col_scale.cwiseProduct(dc);
  }
  sf.b = sf.row_scale_a.cwiseProduct(sf.b);
  sf.h = sf.row_scale_g.cwiseProduct(sf.h);
  sf.c = sf.col_scale.cwiseProduct(sf.c);
}
}  // namespace

std::vector<double> StandardForm::lift(const Eigen::VectorXd& x_std) const {
  std::vector<double> x(n_orig);
  for (int i = 0; i < n_orig; ++i) {
    int j = std_of_orig[i];
    x[i] = j < 0 ? fixed_value[i] : x_std(j) * col_scale(j);
  }
  return x;
}

StandardForm to_standard_form(const ConicProgram& prog, const std::vector<double>* lo_override,
                              const std::vector<double>* hi_override, bool do_equilibrate) {
  StandardForm sf;
  int n0 = static_cast<int>(prog.variables.size());
  sf.n_orig = n0;
  sf.std_of_orig.assign(n0, -1);
  sf.fixed_value.assign(n0, 0.0);
  sf.obj_constant = prog.objective_constant;

  std::vector<double> lo(n0), hi(n0);
  for (int i = 0; i < n0; ++i) {
    lo[i] = prog.variables[i].lower;
    hi[i] = prog.variables[i].upper;
    if (lo_override && !std::isnan((*lo_override)[i])) lo[i] = (*lo_override)[i];
    if (hi_override && !std::isnan((*hi_override)[i])) hi[i] = (*hi_override)[i];
    if (lo[i] > hi[i] + kFixEps) {
      sf.trivially_infeasible = true;
      sf.infeasibility_note = "variable " + prog.variables[i].id + ": empty bound interval";
      return sf;
    }
  }

  int n = 0;
  for (int i = 0; i < n0; ++i) {
    if (hi[i] - lo[i] <= kFixEps && lo[i] > -kInf) {
      sf.fixed_value[i] = 0.5 * (lo[i] + hi[i]);
    } else {
      sf.std_of_orig[i] = n++;
    }
  }

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (auto [i, coef] : prog.objective) {
    int j = sf.std_of_orig[i];
    if (j < 0)
      sf.obj_constant += coef * sf.fixed_value[i];
    else
      c(j) += coef;
  }

  std::vector<Eigen::Triplet<double>> ta, tg;
  std::vector<double> bvals, hvals;

  auto fold_row = [&](const std::vector<std::pair<int, double>>& terms, double rhs,
                      std::vector<Eigen::Triplet<double>>& out, int row) {
    double shift = 0.0;
    bool any_free = false;
    for (auto [i, coef] : terms) {
      int j = sf.std_of_orig[i];
      if (j < 0) {
        shift += coef * sf.fixed_value[i];
      } else {
        out.emplace_back(row, j, coef);
        any_free = true;
      }
    }
    (void)any_free;
    return rhs - shift;
  };

  // Equality rows.
  for (const auto& row : prog.linear_constraints) {
    if (row.sense != Sense::Equal) continue;
    int r = static_cast<int>(bvals.size());
    size_t before = ta.size();
    double rhs = fold_row(row.terms, row.rhs, ta, r);
    if (ta.size() == before) {
      // Fully substituted: consistency check only.
      if (std::abs(rhs) > kFeasEps * std::max(1.0, std::abs(row.rhs))) {
        sf.trivially_infeasible = true;
        sf.infeasibility_note = "equality " + row.tag + " violated by fixed variables";
        return sf;
      }
      continue;
    }
    bvals.push_back(rhs);
  }

  // LP cone: inequality rows then finite variable bounds.
  for (const auto& row : prog.linear_constraints) {
    if (row.sense != Sense::LessEqual) continue;
    int r = static_cast<int>(hvals.size());
    size_t before = tg.size();
    double rhs = fold_row(row.terms, row.rhs, tg, r);
    if (tg.size() == before) {
      if (rhs < -kFeasEps * std::max(1.0, std::abs(row.rhs))) {
        sf.trivially_infeasible = true;
        sf.infeasibility_note = "inequality " + row.tag + " violated by fixed variables";
        return sf;
      }
      continue;
    }
    hvals.push_back(rhs);
  }
  for (int i = 0; i < n0; ++i) {
    int j = sf.std_of_orig[i];
    if (j < 0) continue;
    if (hi[i] < kInf) {
      tg.emplace_back(static_cast<int>(hvals.size()), j, 1.0);
      hvals.push_back(hi[i]);
    }
    if (lo[i] > -kInf) {
      tg.emplace_back(static_cast<int>(hvals.size()), j, -1.0);
      hvals.push_back(-lo[i]);
    }
  }
  sf.dims.l = static_cast<int>(hvals.size());
  if (sf.dims.l == 0 && prog.soc_constraints.empty()) {
    // Keep the cone block nonempty so the interior-point path is well defined.
    hvals.push_back(1.0);
    sf.dims.l = 1;
  }

  // Second-order cones: s_j = member_j(x) => G row -coeffs, h = constant.
  for (const auto& cone : prog.soc_constraints) {
    sf.dims.q.push_back(static_cast<int>(cone.members.size()));
    for (const auto& mem : cone.members) {
      // Want s_j = mem(x). With G x + s = h this needs G row = -coeffs and
      // h = constant part of the member.
      int r = static_cast<int>(hvals.size());
      double shift = 0.0;
      for (auto [i, coef] : mem.terms) {
        int j = sf.std_of_orig[i];
        if (j < 0)
          shift += coef * sf.fixed_value[i];
        else
          tg.emplace_back(r, j, -coef);
      }
      hvals.push_back(mem.constant + shift);
    }
  }

  sf.A.resize(static_cast<int>(bvals.size()), n);
  sf.A.setFromTriplets(ta.begin(), ta.end());
  sf.A.makeCompressed();
  sf.G.resize(static_cast<int>(hvals.size()), n);
  sf.G.setFromTriplets(tg.begin(), tg.end());
  sf.G.makeCompressed();
  sf.b = Eigen::Map<Eigen::VectorXd>(bvals.data(), static_cast<int>(bvals.size()));
  sf.h = Eigen::Map<Eigen::VectorXd>(hvals.data(), static_cast<int>(hvals.size()));
  sf.c = c;

  if (do_equilibrate)
    equilibrate(sf);
  else {
    sf.col_scale = Eigen::VectorXd::Ones(n);
    sf.row_scale_a = Eigen::VectorXd::Ones(sf.A.rows());
    sf.row_scale_g = Eigen::VectorXd::Ones(sf.G.rows());
  }
  return sf;
}

}  // namespace ewh
