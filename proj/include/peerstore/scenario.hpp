#pragma once

// Scenario configs: strict JSON (schema_version 1, unknown keys rejected at
// every level) describing the graph, unit classes, game weights, and the run
// protocol. Units are laid out class by class, so class 1 occupies indices
// 0..count_1-1 and so on.

#include "peerstore/dynamics.hpp"
#include "peerstore/metrics.hpp"
#include "peerstore/model.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace peerstore {

struct ClassBlock {
  int count = 0;
  Count alpha = 0;
  Count beta = 0;
  double lambda = 0.0;
  double p_on = 1.0;
  double nu_on = 1.0, nu_off = 0.0, nu_act = 1.0;
};

struct GraphSpec {
  enum class Kind { Complete, Regular, Grid2d, Line, Explicit } kind = Kind::Complete;
  int n = 0;                   // units; side*side for grid2d
  int degree = 0;              // regular
  std::uint64_t graph_seed = 1;  // regular
  int side = 0;                // grid2d
  std::vector<std::pair<int, int>> edges;  // explicit (directed)
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string name;
  GraphSpec graph;
  std::vector<ClassBlock> classes;
  double k_c = 1.0, k_a = 0.0;
  double gamma0 = 0.0;
  Schedule schedule = Schedule::Anneal;
  double slope = 0.0;
  SimMode mode = SimMode::Discrete;
  double horizon_mult = 10.0;
  std::int64_t horizon_events = -1;  // absolute horizon; overrides the multiplier when >= 0
  int replicas = 10;
  std::uint64_t base_seed = 1;
  double p_all = 1.0;
  bool record_trajectory = true;
};

ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

// Graph builders. Undirected constructions emit both directions.
std::vector<std::pair<int, int>> complete_edges(int n);
std::vector<std::pair<int, int>> grid2d_edges(int side);
std::vector<std::pair<int, int>> line_edges(int n);  // directed x -> x+1
// Pairing model with seeded conflict repair (whole-graph rejection stalls
// already at degree 10, so self-loops and duplicate pairs are re-matched).
std::vector<std::pair<int, int>> random_regular_edges(int n, int degree, std::uint64_t seed);

Instance build_instance(const ScenarioConfig& cfg);
ClassPartition class_partition(const ScenarioConfig& cfg);
std::int64_t resolve_horizon(const ScenarioConfig& cfg, const Instance& inst);

struct PsiOptInfo {
  double value = 0.0;
  enum class Source { Enumerated, ClosedForm, Annealed } source = Source::Enumerated;
};
// Exact optimum when reachable (closed form or enumeration of at most
// `exact_bound` states), otherwise the deterministic annealed estimate.
PsiOptInfo resolve_psi_opt(const ScenarioConfig& cfg, const Instance& inst,
                           std::int64_t exact_bound = 200000);

struct ReplicaOutput {
  std::uint64_t seed = 0;
  SimResult run;
  RunSummary summary;
};

struct ScenarioResult {
  PsiOptInfo psi_opt;
  std::vector<ReplicaOutput> replicas;
  Aggregate agg;
};

// Runs every replica (seeds derived from base_seed by index) on `jobs`
// worker threads (0 = hardware concurrency). Outputs are keyed by replica
// index, so the result is independent of the thread count.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const Instance& inst, int jobs = 0);

}  // namespace peerstore
