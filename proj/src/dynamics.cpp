#include "peerstore/dynamics.hpp"

#include "peerstore/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace peerstore {

double gamma_at(const SimParams& params, double lambda_max, std::int64_t t) {
  switch (params.schedule) {
    case Schedule::Fixed:
      return params.gamma0;
    case Schedule::Anneal:
      if (lambda_max <= 0.0)
        throw std::invalid_argument("gamma_at: annealing needs lambda_max > 0");
      return params.gamma0 + static_cast<double>(t) / (100.0 * lambda_max);
    case Schedule::CustomSlope:
      return params.gamma0 + params.slope * static_cast<double>(t);
  }
  return params.gamma0;
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Alloc: return "alloc";
    case EventKind::Dist: return "dist";
    case EventKind::Noop: return "noop";
    case EventKind::SwitchOn: return "on";
    case EventKind::SwitchOff: return "off";
  }
  return "?";
}

GibbsChoice gibbs(const Instance& inst, const FunctionalState& xi, const AllocationState& state,
                  int x, double gamma) {
  GibbsChoice choice;
  choice.support = available(inst, xi, state, x);
  if (choice.support.empty())
    throw std::invalid_argument("gibbs: empty availability set");
  const auto g = game_params(inst);
  std::vector<double> expo;
  expo.reserve(choice.support.size());
  double top = -std::numeric_limits<double>::infinity();
  for (int y : choice.support) {
    const double f = utility_term(inst, g, y, state.col_sum(y) + 1,
                                  static_cast<Count>(state.at(x, y) + 1));
    expo.push_back(gamma * f);
    top = std::max(top, expo.back());
  }
  double total = 0.0;
  choice.prob.reserve(expo.size());
  for (double e : expo) {
    choice.prob.push_back(std::exp(e - top));
    total += choice.prob.back();
  }
  for (double& p : choice.prob) p /= total;
  return choice;
}

Simulator::Simulator(const Instance& inst, const SimParams& params)
    : inst_(inst),
      params_(params),
      rng_(params.seed),
      state_(inst.n()),
      xi_(FunctionalState::all_on(inst.n())),
      moves_(inst.n(), 0) {
  if (params_.p_all <= 0.0 || params_.p_all > 1.0)
    throw std::invalid_argument("simulator: p_all must be in (0,1]");
  for (int x = 0; x < inst_.n(); ++x)
    if (inst_.alpha(x) > 0) ++incomplete_units_;
  gamma_ = gamma_at(params_, inst_.lambda_max(), 0);
  psi_ = potential(inst_, state_);
  if (inst_.always_on() && params_.mode == SimMode::Discrete) {
    alpha_prefix_.resize(inst_.n() + 1, 0);
    for (int x = 0; x < inst_.n(); ++x)
      alpha_prefix_[x + 1] = alpha_prefix_[x] + inst_.alpha(x);
  }
}

bool Simulator::build_weights(int x, int removed_y) {
  support_.clear();
  weights_.clear();
  const double k_c = inst_.k_c();
  const double k_a = inst_.k_a();
  double top = -std::numeric_limits<double>::infinity();
  for (int y : inst_.out_neighbors(x)) {
    if (!xi_.is_on(y)) continue;
    const std::int64_t col = state_.col_sum(y) - (y == removed_y ? 1 : 0);
    if (col >= inst_.beta(y)) continue;
    const std::int64_t w = state_.at(x, y) - (y == removed_y ? 1 : 0);
    const double f = inst_.lambda(y) - k_c * static_cast<double>(col + 1) / inst_.beta(y) +
                     k_a * static_cast<double>(w + 1);
    support_.push_back(y);
    weights_.push_back(gamma_ * f);
    top = std::max(top, weights_.back());
  }
  if (support_.empty()) return false;
  weight_total_ = 0.0;
  for (double& e : weights_) {
    e = std::exp(e - top);
    weight_total_ += e;
  }
  return true;
}

void Simulator::note_state_change() {
  if (++changes_since_refresh_ >= 4096) {
    psi_ = potential(inst_, state_);  // periodic exact refresh against drift
    changes_since_refresh_ = 0;
  }
}

EventRow Simulator::activate(int x, EventRow row) {
  row.unit = x;
  const std::int64_t rowsum = state_.row_sum(x);
  const Count alpha = inst_.alpha(x);
  bool allocate = rowsum < alpha;
  if (allocate && rowsum > 0 && params_.p_all < 1.0 && !rng_.bernoulli(params_.p_all))
    allocate = false;

  if (allocate) {
    if (!build_weights(x, -1)) return row;  // nothing available: no-op
    const int y = support_[rng_.pick_weighted(weights_, weight_total_)];
    // Potential gain of the new atom, evaluated at the prospective state.
    psi_ += inst_.lambda(y) -
            inst_.k_c() * static_cast<double>(state_.col_sum(y) + 1) / inst_.beta(y) +
            inst_.k_a() * static_cast<double>(state_.at(x, y) + 1);
    state_.add_atom(x, y);
    ++moves_[x];
    note_state_change();
    if (state_.row_sum(x) == alpha && --incomplete_units_ == 0 && completion_event_ < 0)
      completion_event_ = activation_events_;
    row.kind = EventKind::Alloc;
    row.target = y;
    return row;
  }

  if (alpha == 0) return row;  // nothing stored, nothing to redistribute
  // Pick the atom uniformly: its resource is found by a prefix scan of the row.
  std::int64_t r = static_cast<std::int64_t>(rng_.uniform_below(static_cast<std::uint64_t>(rowsum)));
  int source = -1;
  for (int y : inst_.out_neighbors(x)) {
    r -= state_.at(x, y);
    if (r < 0) {
      source = y;
      break;
    }
  }
  row.source = source;
  if (!xi_.is_on(source)) return row;  // the host is off; atom cannot be touched
  build_weights(x, source);            // never empty: the source itself qualifies
  const int target = support_[rng_.pick_weighted(weights_, weight_total_)];
  row.kind = EventKind::Dist;
  row.target = target;
  if (target != source) {
    psi_ += inst_.lambda(target) -
            inst_.k_c() * static_cast<double>(state_.col_sum(target) + 1) / inst_.beta(target) +
            inst_.k_a() * static_cast<double>(state_.at(x, target) + 1);
    psi_ -= inst_.lambda(source) -
            inst_.k_c() * static_cast<double>(state_.col_sum(source)) / inst_.beta(source) +
            inst_.k_a() * static_cast<double>(state_.at(x, source));
    state_.move_atom(x, source, target);
    ++moves_[x];
    note_state_change();
  }
  return row;
}

EventRow Simulator::step_discrete() {
  EventRow row;
  row.time = static_cast<double>(events_);
  gamma_ = gamma_at(params_, inst_.lambda_max(), activation_events_);
  row.gamma = gamma_;

  if (!inst_.always_on())
    for (int x = 0; x < inst_.n(); ++x) xi_.on[x] = rng_.bernoulli(inst_.p_on(x)) ? 1 : 0;

  int acting = -1;
  if (!alpha_prefix_.empty()) {
    const std::int64_t total = alpha_prefix_.back();
    if (total > 0) {
      const auto r = static_cast<std::int64_t>(rng_.uniform_below(total));
      acting = static_cast<int>(
          std::upper_bound(alpha_prefix_.begin(), alpha_prefix_.end(), r) -
          alpha_prefix_.begin() - 1);
    }
  } else {
    std::int64_t total = 0;
    for (int x = 0; x < inst_.n(); ++x)
      if (xi_.is_on(x)) total += inst_.alpha(x);
    if (total > 0) {
      auto r = static_cast<std::int64_t>(rng_.uniform_below(total));
      for (int x = 0; x < inst_.n(); ++x) {
        if (!xi_.is_on(x)) continue;
        r -= inst_.alpha(x);
        if (r < 0) {
          acting = x;
          break;
        }
      }
    }
  }

  ++activation_events_;
  if (acting >= 0) row = activate(acting, row);
  row.psi = psi_;
  row.allocated = state_.total();
  time_ = static_cast<double>(++events_);
  return row;
}

EventRow Simulator::step_continuous() {
  EventRow row;
  double total_rate = 0.0;
  for (int x = 0; x < inst_.n(); ++x)
    total_rate += (xi_.is_on(x) ? inst_.nu_off(x) : inst_.nu_on(x)) + inst_.nu_act(x);
  if (total_rate <= 0.0)
    throw std::runtime_error("simulate: all clocks have rate zero");

  time_ += rng_.exponential(total_rate);
  row.time = time_;
  gamma_ = gamma_at(params_, inst_.lambda_max(), activation_events_);
  row.gamma = gamma_;

  double u = rng_.uniform01() * total_rate;
  int chosen = -1;
  bool churn = false;
  for (int x = 0; x < inst_.n() && chosen < 0; ++x) {
    const double rate = xi_.is_on(x) ? inst_.nu_off(x) : inst_.nu_on(x);
    u -= rate;
    if (u < 0.0) {
      chosen = x;
      churn = true;
    }
  }
  for (int x = 0; x < inst_.n() && chosen < 0; ++x) {
    u -= inst_.nu_act(x);
    if (u < 0.0) chosen = x;
  }
  if (chosen < 0) chosen = inst_.n() - 1;  // rounding guard: last activation clock

  if (churn) {
    xi_.on[chosen] ^= 1;
    row.kind = xi_.is_on(chosen) ? EventKind::SwitchOn : EventKind::SwitchOff;
    row.unit = chosen;
  } else {
    ++activation_events_;
    if (xi_.is_on(chosen)) row = activate(chosen, row);
    else row.unit = chosen;  // off unit woke up: no-op
  }
  row.psi = psi_;
  row.allocated = state_.total();
  ++events_;
  return row;
}

EventRow Simulator::step() {
  return params_.mode == SimMode::Discrete ? step_discrete() : step_continuous();
}

SimResult simulate(const Instance& inst, const SimParams& params) {
  Simulator sim(inst, params);
  SimResult result;
  if (params.record_events) result.log.reserve(static_cast<std::size_t>(params.horizon));
  for (std::int64_t i = 0; i < params.horizon; ++i) {
    EventRow row = sim.step();
    if (params.record_events) result.log.push_back(row);
  }
  result.state = sim.state();
  result.xi = sim.xi();
  result.time = sim.time();
  result.events = sim.events();
  result.activation_events = sim.activation_events();
  result.completion_event = sim.completion_event();
  result.moves = sim.moves();
  result.final_gamma = sim.gamma();
  result.psi = potential(inst, result.state);
  return result;
}

}  // namespace peerstore
