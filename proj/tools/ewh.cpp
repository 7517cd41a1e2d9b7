// Command-line front end: validate networks, generate training data, train
// the strategy predictor, run the rolling simulator, and summarize results.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ewh/acivp.hpp"
#include "ewh/common.hpp"
#include "ewh/model.hpp"
#include "ewh/rolling.hpp"

namespace fs = std::filesystem;
using namespace ewh;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError({"cannot open '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError({"cannot write '" + path + "'"});
  out << text;
}

std::string timing_path_for(const std::string& results_path) {
  std::string p = results_path;
  if (p.size() > 4 && p.substr(p.size() - 4) == ".csv") p = p.substr(0, p.size() - 4);
  return p + ".timing.csv";
}

HullMode parse_hull(const std::string& s) {
  if (s == "validated") return HullMode::Validated;
  if (s == "strict-paper") return HullMode::StrictPaper;
  throw ValidationError({"unknown hull mode '" + s + "' (use validated or strict-paper)"});
}

int cmd_validate(const std::string& net_path) {
  Network net = load_network_file(net_path);
  std::size_t n_pumps = 0, n_prv = 0;
  for (const auto& p : net.pipes) {
    if (p.kind == PipeKind::Pump) ++n_pumps;
    if (p.kind == PipeKind::Prv) ++n_prv;
  }
  std::cout << "ok: " << net.buses.size() << " buses, " << net.branches.size() << " branches, "
            << net.diesel.size() << " diesel, " << net.wind.size() << " wind, "
            << net.water_nodes.size() << " water nodes, " << net.pipes.size() << " pipes ("
            << n_pumps << " pump, " << n_prv << " prv), " << net.tanks.size() << " tanks, "
            << net.desalination.size() << " desal, " << net.hydrogen.size() << " hydrogen\n";
  return 0;
}

int cmd_gen_data(const std::string& net_path, const std::string& curves_path,
                 const std::string& out_dir, const GenConfig& cfg) {
  Network net = load_network_file(net_path);
  RawCurves curves = load_curves_file(curves_path);
  fs::create_directories(out_dir);
  int dropped = 0;
  std::vector<TrainingSample> samples = generate_training_data(net, curves, cfg, &dropped);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    StrategySample s{featurize(samples[i].scenario),
                     extract_strategy(samples[i].prog, samples[i].sol)};
    write_file((fs::path(out_dir) / strfmt("sample_%04zu.json", i)).string(),
               serialize_sample(s));
  }
  std::cout << "wrote " << samples.size() << " samples to " << out_dir << " (" << dropped
            << " infeasible draws dropped)\n";
  return 0;
}

int cmd_train(const std::string& dir, const std::string& out_path, int k) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError({"no .json samples in '" + dir + "'"});
  std::vector<StrategySample> samples;
  samples.reserve(files.size());
  for (const auto& f : files) samples.push_back(deserialize_sample(read_file(f)));
  Predictor p = train_from_samples(samples, k);
  save_predictor(p, out_path);
  std::cout << "trained on " << samples.size() << " samples, "
            << p.strategies.size() << " distinct strategies, k=" << p.k << " -> " << out_path
            << "\n";
  return 0;
}

int cmd_run(const std::string& net_path, const std::string& curves_path, const std::string& mode,
            const std::string& model_path, int step_minutes, int horizon, int lookahead,
            unsigned long long seed, double noise_sigma, const std::string& hull,
            const std::string& out_path) {
  Network net = load_network_file(net_path);
  RawCurves curves = load_curves_file(curves_path);
  Scenario realized = make_scenario(curves, net, step_minutes, horizon, 0.0, /*periodic=*/true);

  RollingConfig cfg;
  cfg.step_minutes = step_minutes;
  cfg.horizon_steps = lookahead;
  cfg.forecast_noise_sigma = noise_sigma;
  cfg.seed = seed;
  cfg.hull = parse_hull(hull);

  Predictor predictor;
  const Predictor* pp = nullptr;
  if (mode == "acivp") {
    cfg.mode = RollingConfig::Mode::Acivp;
    if (model_path.empty()) throw ValidationError({"--mode acivp needs --model"});
    predictor = load_predictor(model_path);
    pp = &predictor;
  } else if (mode != "full") {
    throw ValidationError({"unknown mode '" + mode + "' (use full or acivp)"});
  }

  std::vector<DispatchResult> results = run_rolling(net, realized, cfg, pp);
  write_file(out_path, report_csv(results, net));
  write_file(timing_path_for(out_path), timing_csv(results));
  std::cout << report_summary(results, mode);
  std::cout << "wrote " << out_path << " and " << timing_path_for(out_path) << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& files, bool summary) {
  if (files.size() == 1 && !summary) {
    std::cout << read_file(files[0]);  // csv is its own report format
    return 0;
  }
  std::vector<DispatchResult> a = read_results_csv(files[0]);
  if (files.size() == 1) {
    std::cout << report_summary(a, files[0]);
  } else {
    std::vector<DispatchResult> b = read_results_csv(files[1]);
    std::cout << report_summary(a, files[0], &b, files[1]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dispatch engine for a micro energy-water-hydrogen network"};
  app.require_subcommand(1);

  auto* c_val = app.add_subcommand("validate", "check a network file");
  std::string val_net;
  c_val->add_option("network", val_net, "network json file")->required();

  auto* c_gen = app.add_subcommand("gen-data", "generate solved training samples");
  std::string gen_net, gen_curves, gen_out = "samples";
  GenConfig gen_cfg;
  std::string gen_hull = "validated";
  c_gen->add_option("network", gen_net)->required();
  c_gen->add_option("curves", gen_curves)->required();
  c_gen->add_option("-n,--samples", gen_cfg.n, "number of solved samples to keep");
  c_gen->add_option("--seed", gen_cfg.seed, "rng seed");
  c_gen->add_option("--sigma", gen_cfg.sigma, "lognormal perturbation spread");
  c_gen->add_option("--step", gen_cfg.step_minutes, "step length, minutes");
  c_gen->add_option("--horizon", gen_cfg.horizon_steps, "steps per sample");
  c_gen->add_option("--hull", gen_hull, "headloss hull mode: validated|strict-paper");
  c_gen->add_option("--time-limit", gen_cfg.solver.time_limit_s, "per-solve limit, seconds");
  c_gen->add_option("-o,--out", gen_out, "output directory");

  auto* c_train = app.add_subcommand("train", "fit the strategy predictor");
  std::string train_dir, train_out = "model.json";
  int train_k = 5;
  c_train->add_option("-d,--data", train_dir, "directory of sample json files")->required();
  c_train->add_option("-o,--out", train_out, "model output path");
  c_train->add_option("-k", train_k, "nearest neighbors per query");

  auto* c_run = app.add_subcommand("run", "rolling-horizon simulation");
  std::string run_net, run_curves, run_mode = "full", run_model, run_hull = "validated";
  std::string run_out = "results.csv";
  int run_step = 5, run_horizon = 288, run_lookahead = 12;
  unsigned long long run_seed = 0;
  double run_noise = 0.0;
  c_run->add_option("network", run_net)->required();
  c_run->add_option("scenario", run_curves, "historical curves csv")->required();
  c_run->add_option("--mode", run_mode, "full|acivp");
  c_run->add_option("--model", run_model, "trained predictor (acivp mode)");
  c_run->add_option("--step", run_step, "step length, minutes");
  c_run->add_option("--horizon", run_horizon, "executed steps");
  c_run->add_option("--lookahead", run_lookahead, "steps per solve window");
  c_run->add_option("--seed", run_seed, "rng seed for the wind forecast noise");
  c_run->add_option("--noise", run_noise, "forecast noise sigma (0 = persistence)");
  c_run->add_option("--hull", run_hull, "headloss hull mode: validated|strict-paper");
  c_run->add_option("-o,--out", run_out, "results csv path");

  auto* c_rep = app.add_subcommand("report", "print results or a timing summary");
  std::vector<std::string> rep_files;
  bool rep_summary = false;
  c_rep->add_option("results", rep_files, "one or two results csv files")
      ->required()
      ->expected(1, 2);
  c_rep->add_flag("--summary", rep_summary, "print timing summary instead of csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_val->parsed()) return cmd_validate(val_net);
    if (c_gen->parsed()) {
      gen_cfg.hull = parse_hull(gen_hull);
      return cmd_gen_data(gen_net, gen_curves, gen_out, gen_cfg);
    }
    if (c_train->parsed()) return cmd_train(train_dir, train_out, train_k);
    if (c_run->parsed())
      return cmd_run(run_net, run_curves, run_mode, run_model, run_step, run_horizon,
                     run_lookahead, run_seed, run_noise, run_hull, run_out);
    if (c_rep->parsed()) return cmd_report(rep_files, rep_summary);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
