#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <queue>

#include "ewh/common.hpp"
#include "ewh/ipm.hpp"
#include "ewh/solver.hpp"
#include "ewh/standard_form.hpp"

namespace ewh {

namespace {

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::atomic<int> g_dump_counter{0};

void maybe_dump(const ConicProgram& prog, const SolverConfig& cfg) {
  if (cfg.dump_program_path.empty()) return;
  int id = g_dump_counter.fetch_add(1);
  std::ofstream out(cfg.dump_program_path + strfmt("%05d.cbf", id));
  out << dump_cbf(prog);
}

Solution finish(const ConicProgram& prog, std::vector<double> x, SolveStatus st, int iters,
                double t0) {
  Solution sol;
  sol.status = st;
  sol.primal = std::move(x);
  sol.iterations = iters;
  if (!sol.primal.empty()) {
    sol.objective = prog.objective_value(sol.primal);
    compute_slacks(prog, sol.primal, sol.linear_slacks, sol.soc_slacks);
  }
  sol.solve_time_s = now_s() - t0;
  return sol;
}

Solution solve_relaxation(const ConicProgram& prog, const SolverConfig& cfg,
                          const std::vector<double>* lo = nullptr,
                          const std::vector<double>* hi = nullptr) {
  double t0 = now_s();
  StandardForm sf = to_standard_form(prog, lo, hi);
  if (sf.trivially_infeasible)
    return finish(prog, {}, SolveStatus::Infeasible, 0, t0);

  if (sf.G.cols() == 0) {
    // Everything fixed by bounds; feasibility is a pure evaluation.
    std::vector<double> x = sf.lift(Eigen::VectorXd());
    SolveStatus st =
        max_violation(prog, x) <= cfg.feasibility_tol ? SolveStatus::Optimal : SolveStatus::Infeasible;
    return finish(prog, std::move(x), st, 0, t0);
  }

  IpmOptions opt;
  opt.max_iter = cfg.max_ipm_iterations;
  IpmResult r = solve_ipm(sf, opt);
  switch (r.status) {
    case IpmStatus::Optimal:
      return finish(prog, sf.lift(r.x), SolveStatus::Optimal, r.iterations, t0);
    case IpmStatus::PrimalInfeasible:
      return finish(prog, {}, SolveStatus::Infeasible, r.iterations, t0);
    case IpmStatus::DualInfeasible:
      return finish(prog, sf.lift(r.x), SolveStatus::Unbounded, r.iterations, t0);
    default:
      return finish(prog, sf.lift(r.x), SolveStatus::IterationLimit, r.iterations, t0);
  }
}

}  // namespace

Solution solve_continuous(const ConicProgram& prog, const SolverConfig& cfg) {
  maybe_dump(prog, cfg);
  return solve_relaxation(prog, cfg);
}

Solution solve_micp(const ConicProgram& prog, const SolverConfig& cfg) {
  std::vector<int> bins = prog.binary_indices();
  if (bins.empty()) return solve_continuous(prog, cfg);
  maybe_dump(prog, cfg);

  double t0 = now_s();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int n = static_cast<int>(prog.variables.size());

  struct Node {
    std::vector<std::pair<int, double>> fixings;
    double bound;  // parent relaxation objective
    long seq;
  };
  auto node_cmp = [](const Node& a, const Node& b) {
    return a.bound != b.bound ? a.bound > b.bound : a.seq > b.seq;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(node_cmp)> open(node_cmp);
  std::vector<Node> dive_stack;

  bool have_inc = false;
  double inc_obj = kInf;
  std::vector<double> inc_x;
  int inc_iters = 0;
  long seq = 0;
  int nodes_evaluated = 0;
  bool limits_hit = false;
  bool unbounded = false;

  auto bounds_of = [&](const std::vector<std::pair<int, double>>& fixings) {
    std::vector<double> lo(n, nan), hi(n, nan);
    for (auto [i, v] : fixings) lo[i] = hi[i] = v;
    return std::make_pair(std::move(lo), std::move(hi));
  };

  auto gap_margin = [&] { return cfg.mip_gap * std::max(1.0, std::abs(inc_obj)); };

  static const bool trace = std::getenv("EWH_BNB_TRACE") != nullptr;

  auto accept_incumbent = [&](const Solution& polished) {
    if (!have_inc || polished.objective < inc_obj - 1e-12 * std::max(1.0, std::abs(inc_obj))) {
      have_inc = true;
      inc_obj = polished.objective;
      inc_x = polished.primal;
      inc_iters = polished.iterations;
    }
  };

  auto solve_fixed = [&](const std::vector<std::pair<int, double>>& full) {
    auto [lo, hi] = bounds_of(full);
    return solve_relaxation(prog, cfg, &lo, &hi);
  };

  // Selection structure among the binaries. Rows of unit-coefficient
  // binaries with right-hand side 1 -- "exactly one of" (equality) or "at
  // most one of" (inequality) -- must be rounded as a group: independent
  // nearest-integer rounding of their members almost always breaks the row.
  struct BinGroup {
    std::vector<int> members;
    bool exactly_one = false;
  };
  std::vector<BinGroup> groups;
  std::vector<int> group_of(n, -1);
  for (const auto& row : prog.linear_constraints) {
    if (row.rhs != 1.0 || row.terms.size() < 2) continue;
    bool unit_bins = true;
    for (auto [i, c] : row.terms)
      if (c != 1.0 || !prog.variables[i].is_binary || group_of[i] >= 0) {
        unit_bins = false;
        break;
      }
    if (!unit_bins) continue;
    BinGroup g;
    g.exactly_one = row.sense == Sense::Equal;
    for (auto [i, c] : row.terms) {
      group_of[i] = static_cast<int>(groups.size());
      g.members.push_back(i);
    }
    groups.push_back(std::move(g));
  }

  // Incumbent polish: drive the node relaxation to an integral point in
  // waves. Every wave batch-fixes the binaries the relaxation itself has
  // already driven to an integer (tight tolerance: a selector at 0.997 can
  // still be a knife edge whose integral version is infeasible) and then
  // forces the group of the most fractional undecided binary, choosing the
  // argmax member. If the stage solve comes back infeasible the forced
  // group is rotated through its remaining candidate patterns (next-best
  // member, or all-zero for at-most-one groups) before the wave gives up.
  //
  // The first wave of the aggressive pass additionally rounds every
  // ungrouped binary at once, rounding up unless the value is essentially
  // zero: for indicator binaries the enabled side only widens the feasible
  // region of the continuous variables, so it is the safe side when the
  // relaxation parks the binary strictly between its bounds (which it does
  // whenever the binary has no objective pull). If the aggressive pass
  // fails, a conservative pass without that batch retries one group at a
  // time.
  auto polish_pass = [&](const Solution& relax,
                         const std::vector<std::pair<int, double>>& fixings,
                         bool batch_ungrouped) {
    constexpr double kConverged = 1e-4;
    std::vector<std::pair<int, double>> full = fixings;
    std::vector<char> done(n, 0);
    std::vector<double> fixval(n, -1.0);
    for (auto [i, v] : fixings) {
      done[i] = 1;
      fixval[i] = v;
    }
    auto push_fix = [&](int bi, double v) {
      full.emplace_back(bi, v);
      done[bi] = 1;
      fixval[bi] = v;
    };
    const Solution* cur = &relax;
    Solution stage;
    for (int wave = 0; wave < static_cast<int>(bins.size()); ++wave) {
      for (int bi : bins) {
        if (done[bi]) continue;
        double v = cur->primal[bi];
        if (std::abs(v - std::round(v)) <= kConverged)
          push_fix(bi, std::round(v));
        else if (wave == 0 && batch_ungrouped && group_of[bi] < 0)
          push_fix(bi, v > 0.02 ? 1.0 : 0.0);
      }
      // At-most-one groups join the aggressive batch with a consistent
      // rounding: the argmax member gets the 1 only when the relaxation
      // leans its way. Exactly-one groups stay out -- they are the real
      // selectors, handled one group per wave below.
      if (wave == 0 && batch_ungrouped) {
        for (const auto& g : groups) {
          if (g.exactly_one) continue;
          int pick = -1;
          double best = -kInf;
          bool has_one = false;
          for (int bi : g.members) {
            if (done[bi]) {
              has_one = has_one || fixval[bi] > 0.5;
              continue;
            }
            double v = cur->primal[bi];
            if (v > best) {
              best = v;
              pick = bi;
            }
          }
          bool want_one = !has_one && best > 0.5;
          for (int bi : g.members)
            if (!done[bi]) push_fix(bi, want_one && bi == pick ? 1.0 : 0.0);
        }
      }
      // Propagation: an exactly-one group whose other members just got fixed
      // to zero leaves its last open member implied at one.
      for (const auto& g : groups) {
        if (!g.exactly_one) continue;
        int open = -1, n_open = 0;
        bool has_one = false;
        for (int bi : g.members) {
          if (done[bi]) {
            has_one = has_one || fixval[bi] > 0.5;
          } else {
            open = bi;
            ++n_open;
          }
        }
        if (n_open == 1) push_fix(open, has_one ? 0.0 : 1.0);
      }
      int worst = -1;
      double worst_frac = -1.0;
      for (int bi : bins) {
        if (done[bi]) continue;
        double v = cur->primal[bi];
        double frac = std::abs(v - std::round(v));
        if (frac > worst_frac) {
          worst_frac = frac;
          worst = bi;
        }
      }

      // Candidate fix patterns for the forced group, best first.
      std::vector<std::vector<std::pair<int, double>>> patterns;
      if (worst >= 0) {
        int gi = group_of[worst];
        if (gi < 0) {
          double r = std::round(cur->primal[worst]);
          patterns.push_back({{worst, r}});
          patterns.push_back({{worst, 1.0 - r}});
        } else {
          std::vector<int> open_members;
          bool has_one = false;
          for (int bi : groups[gi].members) {
            if (done[bi]) {
              has_one = has_one || fixval[bi] > 0.5;
              continue;
            }
            open_members.push_back(bi);
          }
          std::sort(open_members.begin(), open_members.end(), [&](int a, int b) {
            return cur->primal[a] > cur->primal[b];
          });
          auto pattern_with_one = [&](int one) {
            std::vector<std::pair<int, double>> p;
            for (int bi : open_members) p.emplace_back(bi, bi == one ? 1.0 : 0.0);
            return p;
          };
          if (!has_one)
            for (int bi : open_members) patterns.push_back(pattern_with_one(bi));
          if (!groups[gi].exactly_one || has_one) {
            patterns.push_back(pattern_with_one(-1));  // all zero
            // All-zero first when the relaxation leans that way.
            if (has_one || cur->primal[open_members.front()] <= 0.5)
              std::rotate(patterns.begin(), patterns.end() - 1, patterns.end());
          }
        }
      }

      size_t mark = full.size();
      bool solved = false;
      int attempts = std::max(static_cast<int>(patterns.size()), 1);
      for (int pat = 0; pat < attempts; ++pat) {
        full.resize(mark);
        if (!patterns.empty())
          for (auto [bi, v] : patterns[pat]) full.emplace_back(bi, v);
        stage = solve_fixed(full);
        if (trace)
          std::fprintf(stderr, "  polish wave %d pat %d fixed %zu st=%d obj %.6f\n", wave, pat,
                       full.size(), static_cast<int>(stage.status), stage.objective);
        if (stage.status == SolveStatus::Optimal) {
          solved = true;
          break;
        }
      }
      if (!solved) return false;
      for (size_t k = mark; k < full.size(); ++k) {
        done[full[k].first] = 1;
        fixval[full[k].first] = full[k].second;
      }
      if (have_inc && stage.objective >= inc_obj - 1e-12 * std::max(1.0, std::abs(inc_obj)))
        return true;  // can't improve: the bound only rises as more get fixed
      bool undecided = false;
      for (int bi : bins) undecided = undecided || !done[bi];
      if (!undecided) {
        accept_incumbent(stage);
        return true;
      }
      cur = &stage;
    }
    return true;
  };

  auto try_incumbent = [&](const Solution& relax,
                           const std::vector<std::pair<int, double>>& fixings) {
    if (!polish_pass(relax, fixings, true) && !have_inc)
      polish_pass(relax, fixings, false);
  };

  // Returns true when the tree under `node` is finished (pruned or leaf);
  // false when it pushed children (dive continues).
  auto process = [&](const Node& node) {
    ++nodes_evaluated;
    auto [lo, hi] = bounds_of(node.fixings);
    Solution relax = solve_relaxation(prog, cfg, &lo, &hi);
    if (trace)
      std::fprintf(stderr, "node %5d depth %3zu st=%d bound %.6f inc %.6f open %zu\n",
                   nodes_evaluated, node.fixings.size(), static_cast<int>(relax.status),
                   relax.objective, have_inc ? inc_obj : kInf, open.size());
    if (relax.status == SolveStatus::Infeasible) return;
    if (relax.status == SolveStatus::Unbounded) {
      unbounded = true;
      return;
    }
    double bound = relax.status == SolveStatus::Optimal ? relax.objective : -kInf;
    if (have_inc && bound >= inc_obj - gap_margin()) return;

    int branch_var = -1;
    double branch_frac = -1.0;
    for (int bi : bins) {
      double v = relax.primal[bi];
      double frac = std::abs(v - std::round(v));
      if (frac > cfg.integrality_tol && frac > branch_frac + 1e-15) {
        branch_frac = frac;
        branch_var = bi;
      }
    }
    if (branch_var < 0) {
      try_incumbent(relax, node.fixings);
      return;
    }
    // Rounding heuristic at interior nodes: without it the dive only finds
    // an incumbent once a relaxation happens to come back integral, which on
    // weakly-relaxed instances never occurs and leaves the tree unpruned.
    // Each attempt costs several relaxation solves, so ration it.
    if ((!have_inc && nodes_evaluated % 8 == 1) || (have_inc && nodes_evaluated % 64 == 1))
      try_incumbent(relax, node.fixings);
    // A fresh incumbent may already prove this subtree within the gap.
    if (have_inc && bound >= inc_obj - gap_margin()) return;

    double v = relax.primal[branch_var];
    double dive_val = v <= 0.5 ? 0.0 : 1.0;
    Node dive_child{node.fixings, bound, seq++};
    dive_child.fixings.emplace_back(branch_var, dive_val);
    Node other{node.fixings, bound, seq++};
    other.fixings.emplace_back(branch_var, 1.0 - dive_val);
    open.push(std::move(other));
    dive_stack.push_back(std::move(dive_child));
  };

  dive_stack.push_back({{}, -kInf, seq++});
  while (!dive_stack.empty() || !open.empty()) {
    if (unbounded) break;
    if (nodes_evaluated >= cfg.node_limit || now_s() - t0 > cfg.time_limit_s) {
      limits_hit = true;
      break;
    }
    Node node;
    if (!dive_stack.empty()) {
      node = std::move(dive_stack.back());
      dive_stack.pop_back();
    } else {
      node = open.top();
      open.pop();
      // Bound may have decayed relative to a newer incumbent.
      if (have_inc && node.bound >= inc_obj - gap_margin()) continue;
    }
    process(node);
  }

  Solution sol;
  if (unbounded) {
    sol = finish(prog, {}, SolveStatus::Unbounded, 0, t0);
  } else if (have_inc) {
    sol = finish(prog, std::move(inc_x), limits_hit ? SolveStatus::IterationLimit : SolveStatus::Optimal,
                 inc_iters, t0);
    for (int bi : bins)
      sol.binary_assignment.emplace_back(prog.variables[bi].id,
                                         static_cast<int>(std::lround(sol.primal[bi])));
  } else {
    sol = finish(prog, {}, limits_hit ? SolveStatus::IterationLimit : SolveStatus::Infeasible, 0, t0);
  }
  sol.nodes = nodes_evaluated;
  return sol;
}

}  // namespace ewh
