#pragma once

// Noisy best-response dynamics. An active unit either allocates a fresh atom
// (row sum below alpha) or redistributes one already-placed atom; the target
// resource is sampled from the Gibbs law over currently available resources,
//     P(y) ~ exp(gamma * f_xy(W + e_xy)),
// evaluated at the prospective state. For a redistribution the atom is first
// removed, so the weights are taken at W - e_{x,source} + e_{x,y} and the
// source itself is always a candidate (staying put is allowed and recorded,
// but does not count as a move).
//
// Draw order (fixed; part of the reproducibility contract):
//   discrete step:  (1) one Bernoulli per unit for the on/off resample,
//                   skipped entirely when every p_on is 1; (2) one integer
//                   draw for the acting unit, alpha-weighted over on units;
//                   (3) when 0 < row < alpha and p_all < 1, one Bernoulli for
//                   allocate-vs-distribute; (4) for a distribution, one
//                   integer draw for the source atom; (5) one uniform for the
//                   Gibbs target.
//   continuous event: (1) one uniform for the exponential holding time;
//                   (2) one uniform selecting the clock (churn clocks in unit
//                   order, then activation clocks in unit order); activations
//                   of off units are no-ops; an on-unit activation then
//                   follows (3)-(5) above.
//
// gamma advances per activation event: gamma(t) = gamma0 + slope * t with
// slope = 1 / (100 * lambda_max) in Anneal mode.

#include "peerstore/model.hpp"
#include "peerstore/rng.hpp"

#include <cstdint>
#include <vector>

namespace peerstore {

enum class SimMode { Discrete, Continuous };
enum class Schedule { Fixed, Anneal, CustomSlope };

struct SimParams {
  SimMode mode = SimMode::Discrete;
  double gamma0 = 0.0;
  Schedule schedule = Schedule::Fixed;
  double slope = 0.0;  // CustomSlope only
  std::int64_t horizon = 0;
  std::uint64_t seed = 1;
  double p_all = 1.0;  // chance of allocating while incomplete with atoms already placed
  bool record_events = false;
};

// Throws std::invalid_argument in Anneal mode when lambda_max <= 0.
double gamma_at(const SimParams& params, double lambda_max, std::int64_t t);

enum class EventKind { Alloc, Dist, Noop, SwitchOn, SwitchOff };
const char* event_kind_name(EventKind k);

struct EventRow {
  EventKind kind = EventKind::Noop;
  double time = 0.0;  // continuous clock; step index in discrete mode
  int unit = -1, source = -1, target = -1;
  double gamma = 0.0;
  double psi = 0.0;  // potential after the event
  std::int64_t allocated = 0;
};

struct GibbsChoice {
  std::vector<int> support;
  std::vector<double> prob;
};

// Gibbs distribution over available(inst, xi, state, x); throws
// std::invalid_argument when the availability set is empty (callers must
// treat such an activation as a no-op).
GibbsChoice gibbs(const Instance& inst, const FunctionalState& xi, const AllocationState& state,
                  int x, double gamma);

class Simulator {
 public:
  Simulator(const Instance& inst, const SimParams& params);

  EventRow step();  // processes one event

  const AllocationState& state() const { return state_; }
  const FunctionalState& xi() const { return xi_; }
  bool complete() const { return incomplete_units_ == 0; }
  double time() const { return time_; }
  std::int64_t events() const { return events_; }
  std::int64_t activation_events() const { return activation_events_; }
  std::int64_t completion_event() const { return completion_event_; }
  const std::vector<std::int64_t>& moves() const { return moves_; }
  double gamma() const { return gamma_; }
  double psi() const { return psi_; }

 private:
  EventRow step_discrete();
  EventRow step_continuous();
  EventRow activate(int x, EventRow row);
  // Gibbs weights for unit x; removed_y >= 0 evaluates at W - e_{x,removed_y}.
  bool build_weights(int x, int removed_y);
  void note_state_change();

  const Instance& inst_;
  SimParams params_;
  Rng rng_;
  AllocationState state_;
  FunctionalState xi_;
  double time_ = 0.0;
  std::int64_t events_ = 0;
  std::int64_t activation_events_ = 0;
  std::int64_t completion_event_ = -1;
  std::vector<std::int64_t> moves_;
  int incomplete_units_ = 0;
  double gamma_ = 0.0;
  double psi_ = 0.0;
  std::int64_t changes_since_refresh_ = 0;
  std::vector<std::int64_t> alpha_prefix_;  // always-on fast path for the unit pick
  std::vector<int> support_;
  std::vector<double> weights_;
  double weight_total_ = 0.0;
};

struct SimResult {
  AllocationState state;
  FunctionalState xi;
  double time = 0.0;
  std::int64_t events = 0;
  std::int64_t activation_events = 0;
  std::int64_t completion_event = -1;  // -1 when the run never completed
  std::vector<std::int64_t> moves;
  double final_gamma = 0.0;
  double psi = 0.0;
  std::vector<EventRow> log;  // only when record_events
};

SimResult simulate(const Instance& inst, const SimParams& params);

}  // namespace peerstore
