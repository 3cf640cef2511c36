#pragma once

// Simulation indices. Conventions that matter:
//   - nu_moves averages m_x / alpha_x over units with positive demand only.
//   - d_minus and the congestion index are reported per class; congestion
//     comes in two flavors, the capacity-normalized class mean of W^y/beta_y
//     (what the summary tables use) and the literal 1/(n beta) variant, which
//     only coincides with the first when classes halve the population.
//   - completion_events of -1 means the run never completed.

#include "peerstore/dynamics.hpp"
#include "peerstore/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace peerstore {

struct ClassPartition {
  std::vector<int> class_of;              // unit -> class id, contiguous from 0
  std::vector<std::vector<int>> members;  // class id -> sorted unit list

  int count() const { return static_cast<int>(members.size()); }
  static ClassPartition single(int n);
  static ClassPartition from_class_of(std::vector<int> class_of);
};

// Psi(state) / psi_opt; psi_opt must be nonzero.
double psi_ratio(const Instance& inst, const AllocationState& state, double psi_opt);

// Mean over units with alpha > 0 of moves_x / alpha_x.
double nu_moves(const Instance& inst, const std::vector<std::int64_t>& moves);

// Mean number of distinct resources used per unit.
double mean_out_degree(const AllocationState& state);

// Per class: positive entries pointing into the class, divided by class size.
std::vector<double> mean_in_degree_by_class(const ClassPartition& classes,
                                            const AllocationState& state);

// Mean over units with alpha > 0 of sum_y (w(x,y)/alpha_x) lambda_y.
double satisfaction(const Instance& inst, const AllocationState& state);

struct Congestion {
  std::vector<double> normalized;  // class mean of W^y / beta_y
  std::vector<double> literal;     // (1/(n beta_class)) sum_{y in class} W^y
  bool literal_valid = true;       // false when a class mixes beta values
};
Congestion congestion_by_class(const Instance& inst, const ClassPartition& classes,
                               const AllocationState& state);

struct RunSummary {
  double psi = 0.0;
  double nu_moves = 0.0;
  double d_plus = 0.0;
  std::vector<double> d_minus;
  double lambda_bar = 0.0;
  std::vector<double> congestion;
  std::int64_t completion_events = -1;
  std::uint64_t seed = 0;
};

// psi_opt <= 0 is treated as unknown and reported as NaN in `psi`.
RunSummary summarize(const Instance& inst, const ClassPartition& classes, const SimResult& run,
                     double psi_opt, std::uint64_t seed);

// Fixed summary CSV layout (two class slots; missing classes print as nan).
extern const char* const kSummaryHeader;
std::string summary_csv_row(const RunSummary& s);

struct Aggregate {
  // Rows: mean, std (population), min, max over the numeric summary columns
  // in header order (seed excluded). completion_events aggregates over
  // completed runs only; -1 throughout when none completed.
  std::vector<double> mean, stddev, min, max;
  int runs = 0;
};
Aggregate aggregate(const std::vector<RunSummary>& summaries);
std::string aggregate_csv(const Aggregate& agg);

// Fallback for instances whose optimum is out of exact reach: deterministic
// fast-annealed probes, best potential seen in a complete state.
double annealed_potential_estimate(const Instance& inst, std::uint64_t seed, int probes = 3);

}  // namespace peerstore
