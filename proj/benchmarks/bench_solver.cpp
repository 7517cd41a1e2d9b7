#include <benchmark/benchmark.h>

#include "ewh/active_set.hpp"
#include "ewh/hydrogen.hpp"
#include "ewh/model.hpp"
#include "ewh/solver.hpp"

using namespace ewh;

namespace {

// Two-feeder grid with one of everything: enough structure to exercise every
// constraint builder without making single iterations take seconds.
Network bench_network() {
  Network net;
  net.buses = {{1}, {2}, {3}, {4}};
  net.branches = {{1, 2, 0.01, 0.02, 2.0}, {2, 3, 0.01, 0.02, 2.0}, {2, 4, 0.015, 0.03, 2.0}};
  net.diesel = {{1, 0.0, 1.5, -1.0, 1.0, 700.0}};
  net.wind = {{3, 0.6, 3.0, 10.0, 22.0, 0.4}};
  net.water_nodes = {{"n1", 20.0, 60.0, 5.0}, {"n2", 20.0, 60.0, 5.0}};
  Pipe pump{"p1", "n1", "n2", PipeKind::Pump, 0.02, 0.0, 40.0, 0.0, 0.0,
            PumpParams{15.0, 0.004, 0.05, 0.85, 4}};
  net.pipes = {pump};
  net.tanks = {{"n2", 40.0, 50.0, 400.0, 200.0, -30.0, 30.0}};
  net.desalination = {{"n1", 4, 40.0, {0.002, 0.003, 0.004, 0.005}}};
  net.hydrogen = {{3, "n1", 20.0, 0.009, 0.016, 0.05, 0.5, 0.0, 25.0, 0.6, 4.0, 60.0, 30.0}};
  net.carbon = {0.9, 0.3, 0.6, 8.0 / 44.0, 500.0};
  net.weights = {5.0, 30.0, 0.08, 0.02};
  auto errs = net.finalize();
  if (!errs.empty()) throw ValidationError(errs);
  return net;
}

Scenario bench_scenario(const Network& net, int horizon) {
  Scenario sce;
  sce.step_minutes = 60;
  sce.horizon_steps = horizon;
  for (int t = 0; t < horizon; ++t) {
    sce.wind_speed.push_back(6.0 + 2.0 * (t % 3));
    sce.h2_demand.push_back(2.0 + 0.5 * (t % 2));
  }
  for (const auto& b : net.buses) {
    sce.p_load[b.id].assign(horizon, 0.15);
    sce.q_load[b.id].assign(horizon, 0.05);
  }
  for (const auto& n : net.water_nodes) sce.water_demand[n.id].assign(horizon, 8.0);
  return sce;
}

void BM_Assemble(benchmark::State& state) {
  Network net = bench_network();
  Scenario sce = bench_scenario(net, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble(net, sce));
}
BENCHMARK(BM_Assemble)->Arg(4)->Arg(24);

void BM_ContinuousRelaxation(benchmark::State& state) {
  Network net = bench_network();
  Scenario sce = bench_scenario(net, static_cast<int>(state.range(0)));
  ConicProgram prog = assemble(net, sce);
  for (auto& v : prog.variables) v.is_binary = false;  // relaxation keeps [0,1] bounds
  for (auto _ : state) benchmark::DoNotOptimize(solve_continuous(prog));
}
BENCHMARK(BM_ContinuousRelaxation)->Arg(4)->Arg(12);

void BM_Micp(benchmark::State& state) {
  Network net = bench_network();
  Scenario sce = bench_scenario(net, static_cast<int>(state.range(0)));
  ConicProgram prog = assemble(net, sce);
  for (auto _ : state) benchmark::DoNotOptimize(solve_micp(prog));
}
BENCHMARK(BM_Micp)->Arg(2)->Arg(4);

void BM_SurrogateSolve(benchmark::State& state) {
  Network net = bench_network();
  Scenario sce = bench_scenario(net, static_cast<int>(state.range(0)));
  ConicProgram prog = assemble(net, sce);
  Solution sol = solve_micp(prog);
  if (sol.status != SolveStatus::Optimal) throw std::runtime_error("bench instance infeasible");
  std::map<std::string, int> binaries(sol.binary_assignment.begin(),
                                      sol.binary_assignment.end());
  std::set<std::string> active = get_active_set(prog, sol);
  RestrictResult rr = restrict_program(prog, binaries, active);
  for (auto _ : state) benchmark::DoNotOptimize(solve_continuous(rr.prog));
}
BENCHMARK(BM_SurrogateSolve)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
