#pragma once

// Payoffs and the potential. A unit x holding atoms at y values
//     f_xy(W) = lambda_y - k_c * W^y / beta_y + k_a * w(x,y)
// with W^y the column sum at y (own atoms included). Moving one atom from y
// to y' changes the potential
//     Psi(W) = sum_y sum_{s=0..W^y} (lambda_y - k_c s / beta_y)
//            + k_a sum_{x,y} sum_{s=0..w(x,y)} s
// by exactly f_xy'(W') - f_xy(W), which is what makes the Gibbs dynamics
// reversible. Kernels are templated on the scalar so the same formulas run in
// double for simulation and in exact rationals where verdicts must not depend
// on rounding.

#include "peerstore/model.hpp"

#include <functional>
#include <vector>

namespace peerstore {

template <class Scalar>
struct GameParams {
  std::vector<Scalar> lambda;
  Scalar k_c{};
  Scalar k_a{};
};

inline GameParams<double> game_params(const Instance& inst) {
  GameParams<double> g;
  g.lambda.assign(inst.lambda().data(), inst.lambda().data() + inst.n());
  g.k_c = inst.k_c();
  g.k_a = inst.k_a();
  return g;
}

// Payoff of one atom of x stored at y when y's column sum is col_y.
// beta_y must be positive.
template <class Scalar>
Scalar utility_term(const Instance& inst, const GameParams<Scalar>& g, int y, std::int64_t col_y,
                    Count w_xy) {
  return g.lambda[y] - g.k_c * Scalar(static_cast<long long>(col_y)) /
                           Scalar(static_cast<long long>(inst.beta(y))) +
         g.k_a * Scalar(static_cast<long long>(w_xy));
}

template <class Scalar>
Scalar potential_value(const Instance& inst, const GameParams<Scalar>& g,
                       const AllocationState& state) {
  Scalar psi{0};
  for (int y = 0; y < inst.n(); ++y) {
    const std::int64_t c = state.col_sum(y);
    psi += Scalar(static_cast<long long>(c + 1)) * g.lambda[y];
    if (c > 0)
      psi -= g.k_c * Scalar(static_cast<long long>(c * (c + 1) / 2)) /
             Scalar(static_cast<long long>(inst.beta(y)));
  }
  if (!(g.k_a == Scalar{0})) {
    Scalar agg{0};
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.out_neighbors(x)) {
        const std::int64_t w = state.at(x, y);
        if (w > 0) agg += Scalar(static_cast<long long>(w * (w + 1) / 2));
      }
    psi += g.k_a * agg;
  }
  return psi;
}

// Gain for unit x of moving one atom from source y to target y' != y:
// target utility evaluated after the move, source utility before it.
template <class Scalar>
Scalar deviation_gain(const Instance& inst, const GameParams<Scalar>& g,
                      const AllocationState& state, int x, int y, int yp) {
  const Scalar before = utility_term(inst, g, y, state.col_sum(y), state.at(x, y));
  const Scalar after = utility_term(inst, g, yp, state.col_sum(yp) + 1, state.at(x, yp) + 1);
  return after - before;
}

double utility(const Instance& inst, const AllocationState& state, int x, int y);
double potential(const Instance& inst, const AllocationState& state);

// Resources unit x can currently take one more atom to: out-neighbors that
// are on and below capacity. Order is ascending.
std::vector<int> available(const Instance& inst, const FunctionalState& xi,
                           const AllocationState& state, int x);

struct Deviation {
  int unit = -1, source = -1, target = -1;
  double gain = 0.0;
};

struct NashReport {
  bool nash = false;
  std::vector<Deviation> deviations;
};

// Exact-scalar Nash verdict over all single-atom deviations with every unit
// on. The state must be complete.
template <class Scalar>
bool is_nash_exact(const Instance& inst, const GameParams<Scalar>& g,
                   const AllocationState& state) {
  const auto xi = FunctionalState::all_on(inst.n());
  for (int x = 0; x < inst.n(); ++x) {
    for (int y : inst.out_neighbors(x)) {
      if (state.at(x, y) == 0) continue;
      for (int yp : available(inst, xi, state, x)) {
        if (yp == y) continue;
        if (deviation_gain(inst, g, state, x, y, yp) > Scalar{0}) return false;
      }
    }
  }
  return true;
}

NashReport is_nash(const Instance& inst, const AllocationState& state);

// Visits every complete state in lexicographic order (unit by unit, each row
// filled over ascending neighbor indices with ascending counts). Throws when
// more than `bound` states exist. Returns the count.
std::int64_t enumerate_complete_states(const Instance& inst, std::int64_t bound,
                                       const std::function<void(const AllocationState&)>& visit);
std::vector<AllocationState> complete_states(const Instance& inst, std::int64_t bound);

struct PotentialOptimum {
  double value = 0.0;
  std::vector<CountMatrix> argmax;  // exhaustive only when kind == Enumerated
  enum class Kind { Enumerated, ClosedForm } kind = Kind::Enumerated;
};

// Maximum of Psi over complete states. Homogeneous instances (equal alpha,
// beta, lambda, alpha <= beta) with a perfect unit->resource matching get the
// closed form attained by the matching state; otherwise exhaustive
// enumeration up to `bound` states (throws beyond; callers may then fall back
// to the annealed estimate in the metrics layer).
PotentialOptimum optimal_potential(const Instance& inst, std::int64_t bound = 1000000);

// No unit splits atoms across two resources of equal lambda and equal beta
// that are both below capacity, whenever k_a > 1/beta. Returns false when a
// counterexample pair exists.
bool split_bound_holds(const Instance& inst, const AllocationState& state);

}  // namespace peerstore
