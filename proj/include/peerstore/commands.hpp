#pragma once

// Tool entry points, kept in the library so tests can drive them in-process.
// Exit codes: 0 success (cmd_check: feasible), 2 infeasible, 1 any error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace peerstore {

struct CheckOptions {
  std::string config_path;
};

struct SimulateOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::optional<double> horizon_mult;
  bool force = false;
  int jobs = 0;  // 0 = hardware concurrency
};

struct AnalyzeOptions {
  std::string config_path;
  std::string state_path;
};

struct VerifyOptions {
  std::string config_path;
  std::optional<double> gamma;  // defaults to the config's gamma0
  std::int64_t bound = 100000;
};

int cmd_check(const CheckOptions& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace peerstore
