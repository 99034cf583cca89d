// Command-line front end: run / sweep / validate-mac / gen-trace /
// inspect-model. Exit codes: 0 success, 2 config error, 3 non-convergence,
// 4 validation failure.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "laa/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitValidation = 4;

int cmd_run(const std::string& scenario_path, const std::string& out_dir) {
  const laa::Scenario s = laa::load_scenario(scenario_path);
  const laa::RunOutput out = laa::run_scenario(s);
  laa::write_outputs(out, out_dir);
  if (!out.converged) {
    std::cerr << "training did not converge; partial results written to "
              << out_dir << "\n";
    return kExitNonConvergence;
  }
  std::cout << "results written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& axis,
              const std::string& out_dir) {
  const laa::Scenario s = laa::load_scenario(scenario_path);
  const laa::RunOutput out = laa::sweep_scenario(s, axis);
  laa::write_outputs(out, out_dir);
  if (!out.converged) {
    std::cerr << "one or more sweep runs did not converge\n";
    return kExitNonConvergence;
  }
  std::cout << "sweep results written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_validate_mac(const std::string& scenario_path,
                     const std::string& out_path) {
  const laa::Scenario s = laa::load_scenario(scenario_path);
  const laa::json report = laa::validate_mac(s);
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    f << report.dump(2) << "\n";
  }
  for (const laa::json& cell : report["cells"])
    std::cout << "W=" << cell["waps"] << " J=" << cell["sbs"]
              << " CW=" << cell["cw"] << " max_rel_err=" << cell["max_rel_err"]
              << (cell["pass"].get<bool>() ? " PASS" : " FAIL") << "\n";
  if (!report["all_pass"].get<bool>()) {
    std::cerr << "MAC validation failed\n";
    return kExitValidation;
  }
  std::cout << "all cells pass (rel_tol " << report["rel_tol"] << ")\n";
  return kExitOk;
}

int cmd_gen_trace(const std::string& scenario_path, const std::string& out_path) {
  const laa::Scenario s = laa::load_scenario(scenario_path);
  const laa::TrafficTrace trace = laa::build_trace(s);
  laa::save_trace(trace, out_path);
  std::cout << "wrote " << trace.epochs << " epochs for "
            << trace.sbs_count() << " SBSs and " << trace.channel_count()
            << " WLAN channels to " << out_path << "\n";
  return kExitOk;
}

int cmd_inspect_model(const std::string& model_path) {
  const laa::PolicyModel m = laa::load_model(model_path);
  std::cout << "sbs_count: " << m.cfg.sbs_count << "\n"
            << "channels: " << m.cfg.channels << "\n"
            << "max_aggregated: " << m.cfg.max_aggregated << "\n"
            << "hidden: " << m.cfg.hidden << "\n"
            << "action_embed: " << m.cfg.action_embed << "\n"
            << "vocab_size: " << m.vocab_size() << "\n"
            << "parameters: " << m.allocated_count() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTE-LAA / WiFi unlicensed-spectrum coexistence lab"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", axis, model_path, out_path;

  CLI::App* run = app.add_subcommand("run", "run a scenario end to end");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("-o,--out", out_dir, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep one axis of a scenario");
  sweep->add_option("scenario", scenario_path, "scenario JSON file")->required();
  sweep->add_option("axis", axis, "T | Mc | priority_ratio | learning_rate | sbs_count")
      ->required();
  sweep->add_option("-o,--out", out_dir, "output directory");

  CLI::App* vmac = app.add_subcommand("validate-mac",
                                      "analytic vs slot-simulation matrix");
  vmac->add_option("scenario", scenario_path, "scenario JSON file")->required();
  vmac->add_option("-o,--out", out_path, "write JSON report here");

  CLI::App* gen = app.add_subcommand("gen-trace", "generate a synthetic trace CSV");
  gen->add_option("scenario", scenario_path, "scenario JSON file")->required();
  gen->add_option("output", out_path, "output CSV path")->required();

  CLI::App* inspect = app.add_subcommand("inspect-model", "print model summary");
  inspect->add_option("model", model_path, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(scenario_path, out_dir);
    if (sweep->parsed()) return cmd_sweep(scenario_path, axis, out_dir);
    if (vmac->parsed()) return cmd_validate_mac(scenario_path, out_path);
    if (gen->parsed()) return cmd_gen_trace(scenario_path, out_path);
    if (inspect->parsed()) return cmd_inspect_model(model_path);
  } catch (const laa::ScenarioError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
