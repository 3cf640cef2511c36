#include "peerstore/metrics.hpp"

#include "peerstore/csv.hpp"
#include "peerstore/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace peerstore {

ClassPartition ClassPartition::single(int n) {
  ClassPartition p;
  p.class_of.assign(n, 0);
  p.members.resize(1);
  for (int x = 0; x < n; ++x) p.members[0].push_back(x);
  return p;
}

ClassPartition ClassPartition::from_class_of(std::vector<int> class_of) {
  ClassPartition p;
  p.class_of = std::move(class_of);
  int classes = 0;
  for (int c : p.class_of) {
    if (c < 0) throw std::invalid_argument("partition: negative class id");
    classes = std::max(classes, c + 1);
  }
  p.members.resize(classes);
  for (int x = 0; x < static_cast<int>(p.class_of.size()); ++x)
    p.members[p.class_of[x]].push_back(x);
  for (const auto& m : p.members)
    if (m.empty()) throw std::invalid_argument("partition: empty class");
  return p;
}

double psi_ratio(const Instance& inst, const AllocationState& state, double psi_opt) {
  if (psi_opt == 0.0) throw std::invalid_argument("psi_ratio: psi_opt is zero");
  return potential(inst, state) / psi_opt;
}

double nu_moves(const Instance& inst, const std::vector<std::int64_t>& moves) {
  if (static_cast<int>(moves.size()) != inst.n())
    throw std::invalid_argument("nu_moves: size mismatch");
  double sum = 0.0;
  int counted = 0;
  for (int x = 0; x < inst.n(); ++x) {
    if (inst.alpha(x) == 0) continue;
    sum += static_cast<double>(moves[x]) / inst.alpha(x);
    ++counted;
  }
  return counted ? sum / counted : 0.0;
}

double mean_out_degree(const AllocationState& state) {
  const auto& m = state.matrix();
  std::int64_t positive = 0;
  for (int x = 0; x < m.rows(); ++x)
    for (int y = 0; y < m.cols(); ++y) positive += m(x, y) > 0;
  return m.rows() ? static_cast<double>(positive) / m.rows() : 0.0;
}

std::vector<double> mean_in_degree_by_class(const ClassPartition& classes,
                                            const AllocationState& state) {
  std::vector<double> out(classes.count(), 0.0);
  const auto& m = state.matrix();
  for (int y = 0; y < m.cols(); ++y) {
    int users = 0;
    for (int x = 0; x < m.rows(); ++x) users += m(x, y) > 0;
    out[classes.class_of[y]] += users;
  }
  for (int c = 0; c < classes.count(); ++c) out[c] /= classes.members[c].size();
  return out;
}

double satisfaction(const Instance& inst, const AllocationState& state) {
  double sum = 0.0;
  int counted = 0;
  for (int x = 0; x < inst.n(); ++x) {
    if (inst.alpha(x) == 0) continue;
    double acc = 0.0;
    for (int y : inst.out_neighbors(x))
      acc += static_cast<double>(state.at(x, y)) / inst.alpha(x) * inst.lambda(y);
    sum += acc;
    ++counted;
  }
  return counted ? sum / counted : 0.0;
}

Congestion congestion_by_class(const Instance& inst, const ClassPartition& classes,
                               const AllocationState& state) {
  Congestion result;
  result.normalized.assign(classes.count(), 0.0);
  result.literal.assign(classes.count(), 0.0);
  for (int c = 0; c < classes.count(); ++c) {
    double norm = 0.0;
    int counted = 0;
    std::int64_t load = 0;
    Count beta_class = -1;
    bool uniform = true;
    for (int y : classes.members[c]) {
      load += state.col_sum(y);
      if (inst.beta(y) > 0) {
        norm += static_cast<double>(state.col_sum(y)) / inst.beta(y);
        ++counted;
        if (beta_class < 0) beta_class = inst.beta(y);
        else if (beta_class != inst.beta(y)) uniform = false;
      }
    }
    result.normalized[c] = counted ? norm / counted : 0.0;
    if (!uniform) result.literal_valid = false;
    result.literal[c] = (beta_class > 0)
                            ? static_cast<double>(load) / (inst.n() * static_cast<double>(beta_class))
                            : 0.0;
  }
  return result;
}

RunSummary summarize(const Instance& inst, const ClassPartition& classes, const SimResult& run,
                     double psi_opt, std::uint64_t seed) {
  RunSummary s;
  s.psi = psi_opt > 0.0 ? run.psi / psi_opt : std::numeric_limits<double>::quiet_NaN();
  s.nu_moves = nu_moves(inst, run.moves);
  s.d_plus = mean_out_degree(run.state);
  s.d_minus = mean_in_degree_by_class(classes, run.state);
  s.lambda_bar = satisfaction(inst, run.state);
  s.congestion = congestion_by_class(inst, classes, run.state).normalized;
  s.completion_events = run.completion_event;
  s.seed = seed;
  return s;
}

const char* const kSummaryHeader =
    "psi,nu_moves,d_plus,d_minus_1,d_minus_2,lambda_bar,c_1,c_2,completion_events,seed";

namespace {

double class_slot(const std::vector<double>& v, std::size_t i) {
  return i < v.size() ? v[i] : std::numeric_limits<double>::quiet_NaN();
}

// Numeric columns in header order, seed excluded.
std::vector<double> numeric_columns(const RunSummary& s) {
  return {s.psi,
          s.nu_moves,
          s.d_plus,
          class_slot(s.d_minus, 0),
          class_slot(s.d_minus, 1),
          s.lambda_bar,
          class_slot(s.congestion, 0),
          class_slot(s.congestion, 1),
          static_cast<double>(s.completion_events)};
}

}  // namespace

std::string summary_csv_row(const RunSummary& s) {
  std::string row;
  const auto cols = numeric_columns(s);
  for (std::size_t i = 0; i + 1 < cols.size(); ++i) {
    row += format_double(cols[i]);
    row += ',';
  }
  row += format_int(s.completion_events);
  row += ',';
  row += format_uint(s.seed);
  return row;
}

Aggregate aggregate(const std::vector<RunSummary>& summaries) {
  if (summaries.empty()) throw std::invalid_argument("aggregate: no runs");
  const std::size_t cols = numeric_columns(summaries.front()).size();
  Aggregate agg;
  agg.runs = static_cast<int>(summaries.size());
  agg.mean.assign(cols, 0.0);
  agg.stddev.assign(cols, 0.0);
  agg.min.assign(cols, std::numeric_limits<double>::infinity());
  agg.max.assign(cols, -std::numeric_limits<double>::infinity());

  const std::size_t completion_col = cols - 1;
  std::vector<int> counts(cols, 0);
  for (const auto& s : summaries) {
    const auto v = numeric_columns(s);
    for (std::size_t i = 0; i < cols; ++i) {
      if (i == completion_col && s.completion_events < 0) continue;
      agg.mean[i] += v[i];
      agg.min[i] = std::min(agg.min[i], v[i]);
      agg.max[i] = std::max(agg.max[i], v[i]);
      ++counts[i];
    }
  }
  for (std::size_t i = 0; i < cols; ++i) {
    if (counts[i] == 0) {
      agg.mean[i] = agg.min[i] = agg.max[i] = agg.stddev[i] = -1.0;
      continue;
    }
    agg.mean[i] /= counts[i];
  }
  for (const auto& s : summaries) {
    const auto v = numeric_columns(s);
    for (std::size_t i = 0; i < cols; ++i) {
      if (i == completion_col && s.completion_events < 0) continue;
      const double d = v[i] - agg.mean[i];
      agg.stddev[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < cols; ++i) {
    if (counts[i] > 0) agg.stddev[i] = std::sqrt(agg.stddev[i] / counts[i]);
    if (std::isnan(agg.mean[i]))  // unused class slots stay nan across the board
      agg.stddev[i] = agg.min[i] = agg.max[i] = agg.mean[i];
  }
  return agg;
}

std::string aggregate_csv(const Aggregate& agg) {
  std::string out = "stat,psi,nu_moves,d_plus,d_minus_1,d_minus_2,lambda_bar,c_1,c_2,"
                    "completion_events\n";
  const auto row = [&](const char* name, const std::vector<double>& v) {
    out += name;
    for (double x : v) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  };
  row("mean", agg.mean);
  row("std", agg.stddev);
  row("min", agg.min);
  row("max", agg.max);
  return out;
}

double annealed_potential_estimate(const Instance& inst, std::uint64_t seed, int probes) {
  if (inst.alpha_sum() == 0) return potential(inst, AllocationState(inst.n()));
  double best = -std::numeric_limits<double>::infinity();
  for (int probe = 0; probe < probes; ++probe) {
    SimParams params;
    params.mode = SimMode::Discrete;
    params.schedule = Schedule::CustomSlope;
    params.slope = 1.0 / (10.0 * std::max(inst.lambda_max(), 1e-6));
    params.horizon = 20 * inst.alpha_sum();
    params.seed = derive_seed(seed, 0x716f7074ull + probe);  // distinct probe streams
    Simulator sim(inst, params);
    for (std::int64_t i = 0; i < params.horizon; ++i) {
      sim.step();
      if (sim.complete()) best = std::max(best, sim.psi());
    }
    if (sim.complete()) best = std::max(best, potential(inst, sim.state()));
  }
  if (!std::isfinite(best))
    throw std::runtime_error("annealed_potential_estimate: no complete state reached");
  return best;
}

}  // namespace peerstore
