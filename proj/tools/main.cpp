#include "CLI11.hpp"

#include "peerstore/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"peer-to-peer storage allocation game toolkit"};
  app.require_subcommand(1);

  peerstore::CheckOptions check_opt;
  auto* check = app.add_subcommand("check", "feasibility of a complete allocation");
  check->add_option("--config", check_opt.config_path, "scenario config (JSON)")->required();

  peerstore::SimulateOptions sim_opt;
  std::uint64_t seed_flag = 0;
  int replicas_flag = 0;
  double horizon_flag = 0.0;
  auto* simulate = app.add_subcommand("simulate", "run the allocation dynamics");
  simulate->add_option("--config", sim_opt.config_path, "scenario config (JSON)")->required();
  simulate->add_option("--out", sim_opt.out_dir, "output directory")->required();
  auto* seed_opt = simulate->add_option("--seed", seed_flag, "override the base seed");
  auto* replicas_opt = simulate->add_option("--replicas", replicas_flag, "override replica count");
  auto* horizon_opt =
      simulate->add_option("--horizon-mult", horizon_flag, "override horizon (multiple of total demand)");
  simulate->add_flag("--force", sim_opt.force, "overwrite a non-empty output directory");
  simulate->add_option("--jobs", sim_opt.jobs, "worker threads (0 = hardware)");

  peerstore::AnalyzeOptions analyze_opt;
  auto* analyze = app.add_subcommand("analyze", "inspect a stored allocation state");
  analyze->add_option("--config", analyze_opt.config_path, "scenario config (JSON)")->required();
  analyze->add_option("--state", analyze_opt.state_path, "allocation matrix (CSV)")->required();

  peerstore::VerifyOptions verify_opt;
  double gamma_flag = 0.0;
  auto* verify = app.add_subcommand("verify", "exact stationary-law checks on a small instance");
  verify->add_option("--config", verify_opt.config_path, "scenario config (JSON)")->required();
  auto* gamma_opt = verify->add_option("--gamma", gamma_flag, "inverse temperature (default: config gamma0)");
  verify->add_option("--bound", verify_opt.bound, "state-space size bound");

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) return peerstore::cmd_check(check_opt, std::cout, std::cerr);
  if (simulate->parsed()) {
    if (*seed_opt) sim_opt.seed = seed_flag;
    if (*replicas_opt) sim_opt.replicas = replicas_flag;
    if (*horizon_opt) sim_opt.horizon_mult = horizon_flag;
    return peerstore::cmd_simulate(sim_opt, std::cout, std::cerr);
  }
  if (analyze->parsed()) return peerstore::cmd_analyze(analyze_opt, std::cout, std::cerr);
  if (verify->parsed()) {
    if (*gamma_opt) verify_opt.gamma = gamma_flag;
    return peerstore::cmd_verify(verify_opt, std::cout, std::cerr);
  }
  return 1;
}
