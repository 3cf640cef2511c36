#include "peerstore/game.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace peerstore {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Kuhn augmenting-path bipartite matching, units to resources along graph
// edges. Self-loops are impossible by construction, so any perfect matching
// is automatically fixed-point-free.
std::optional<std::vector<int>> perfect_matching(const Instance& inst) {
  const int n = inst.n();
  std::vector<int> match_resource(n, -1), match_unit(n, -1);
  std::vector<char> seen(n);

  std::function<bool(int)> augment = [&](int x) -> bool {
    for (int y : inst.out_neighbors(x)) {
      if (seen[y]) continue;
      seen[y] = 1;
      if (match_resource[y] < 0 || augment(match_resource[y])) {
        match_resource[y] = x;
        match_unit[x] = y;
        return true;
      }
    }
    return false;
  };

  for (int x = 0; x < n; ++x) {
    seen.assign(n, 0);
    if (!augment(x)) return std::nullopt;
  }
  return match_unit;
}

struct Enumerator {
  const Instance& inst;
  std::int64_t bound;
  const std::function<void(const AllocationState&)>& visit;
  AllocationState state;
  std::vector<std::int64_t> alpha_suffix;  // demand of units x..n-1
  std::int64_t spare_capacity;             // sum over y of beta_y - col_y
  std::int64_t count = 0;

  Enumerator(const Instance& i, std::int64_t b,
             const std::function<void(const AllocationState&)>& v)
      : inst(i), bound(b), visit(v), state(i.n()) {
    alpha_suffix.assign(inst.n() + 1, 0);
    for (int x = inst.n() - 1; x >= 0; --x)
      alpha_suffix[x] = alpha_suffix[x + 1] + inst.alpha(x);
    spare_capacity = 0;
    for (int y = 0; y < inst.n(); ++y) spare_capacity += inst.beta(y);
  }

  void place(int x, std::size_t j, Count remaining) {
    if (remaining == 0) {
      unit(x + 1);
      return;
    }
    const auto& nb = inst.out_neighbors(x);
    if (j == nb.size()) return;
    const int y = nb[j];
    const Count cap = static_cast<Count>(
        std::min<std::int64_t>(remaining, inst.beta(y) - state.col_sum(y)));
    // c = 0 first keeps the visiting order lexicographic.
    place(x, j + 1, remaining);
    for (Count c = 1; c <= cap; ++c) {
      state.add_atom(x, y);
      spare_capacity -= 1;
      place(x, j + 1, static_cast<Count>(remaining - c));
    }
    for (Count c = cap; c >= 1; --c) {
      state.remove_atom(x, y);
      spare_capacity += 1;
    }
  }

  void unit(int x) {
    if (alpha_suffix[x] > spare_capacity) return;  // cannot finish from here
    if (x == inst.n()) {
      if (++count > bound)
        throw std::runtime_error("enumerate_complete_states: state space exceeds bound");
      visit(state);
      return;
    }
    place(x, 0, inst.alpha(x));
  }
};

}  // namespace

double utility(const Instance& inst, const AllocationState& state, int x, int y) {
  require(x >= 0 && x < inst.n() && y >= 0 && y < inst.n(), "utility: index out of range");
  require(inst.beta(y) > 0, "utility: beta_y is zero");
  const auto g = game_params(inst);
  return utility_term(inst, g, y, state.col_sum(y), state.at(x, y));
}

double potential(const Instance& inst, const AllocationState& state) {
  return potential_value(inst, game_params(inst), state);
}

std::vector<int> available(const Instance& inst, const FunctionalState& xi,
                           const AllocationState& state, int x) {
  std::vector<int> result;
  for (int y : inst.out_neighbors(x))
    if (xi.is_on(y) && state.col_sum(y) < inst.beta(y)) result.push_back(y);
  return result;
}

NashReport is_nash(const Instance& inst, const AllocationState& state) {
  require(is_complete(inst, state), "is_nash: state is not complete");
  const auto g = game_params(inst);
  const auto xi = FunctionalState::all_on(inst.n());
  NashReport report;
  for (int x = 0; x < inst.n(); ++x) {
    const auto avail = available(inst, xi, state, x);
    for (int y : inst.out_neighbors(x)) {
      if (state.at(x, y) == 0) continue;
      for (int yp : avail) {
        if (yp == y) continue;
        const double gain = deviation_gain(inst, g, state, x, y, yp);
        if (gain > 0.0) report.deviations.push_back({x, y, yp, gain});
      }
    }
  }
  report.nash = report.deviations.empty();
  return report;
}

std::int64_t enumerate_complete_states(const Instance& inst, std::int64_t bound,
                                       const std::function<void(const AllocationState&)>& visit) {
  Enumerator e(inst, bound, visit);
  e.unit(0);
  return e.count;
}

std::vector<AllocationState> complete_states(const Instance& inst, std::int64_t bound) {
  std::vector<AllocationState> states;
  enumerate_complete_states(inst, bound,
                            [&](const AllocationState& s) { states.push_back(s); });
  return states;
}

PotentialOptimum optimal_potential(const Instance& inst, std::int64_t bound) {
  const int n = inst.n();
  PotentialOptimum result;

  const Count a = inst.alpha(0);
  const bool homogeneous = (inst.alpha().array() == a).all() &&
                           (inst.beta().array() == inst.beta(0)).all() &&
                           (inst.lambda().array() == inst.lambda(0)).all();
  if (homogeneous && a > 0 && a <= inst.beta(0)) {
    if (auto match = perfect_matching(inst)) {
      // Column sums all equal alpha (best congestion spread) and every row
      // concentrated on one resource (best aggregation); both at once.
      const double lam = inst.lambda(0);
      const double beta = inst.beta(0);
      const double pairs = static_cast<double>(a) * (a + 1) / 2.0;
      result.value = n * (lam * (a + 1) - inst.k_c() / beta * pairs + inst.k_a() * pairs);
      AllocationState w(n);
      for (int x = 0; x < n; ++x)
        for (Count c = 0; c < a; ++c) w.add_atom(x, (*match)[x]);
      result.argmax.push_back(w.matrix());
      result.kind = PotentialOptimum::Kind::ClosedForm;
      return result;
    }
  }

  bool first = true;
  double best = 0.0;
  enumerate_complete_states(inst, bound, [&](const AllocationState& s) {
    const double v = potential(inst, s);
    if (first || v > best) {
      best = v;
      first = false;
    }
  });
  if (first) throw std::runtime_error("optimal_potential: no complete state exists");
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  enumerate_complete_states(inst, bound, [&](const AllocationState& s) {
    if (std::abs(potential(inst, s) - best) <= tol) result.argmax.push_back(s.matrix());
  });
  result.value = best;
  result.kind = PotentialOptimum::Kind::Enumerated;
  return result;
}

bool split_bound_holds(const Instance& inst, const AllocationState& state) {
  for (int x = 0; x < inst.n(); ++x) {
    const auto& nb = inst.out_neighbors(x);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const int y1 = nb[i];
      if (state.at(x, y1) == 0) continue;
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        const int y2 = nb[j];
        if (state.at(x, y2) == 0) continue;
        if (inst.beta(y1) != inst.beta(y2) || inst.lambda(y1) != inst.lambda(y2)) continue;
        const double beta = inst.beta(y1);
        if (beta <= 0 || inst.k_a() <= 1.0 / beta) continue;
        if (state.col_sum(y1) < inst.beta(y1) && state.col_sum(y2) < inst.beta(y2)) return false;
      }
    }
  }
  return true;
}

}  // namespace peerstore
