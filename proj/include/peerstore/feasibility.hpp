#pragma once

// Feasibility of complete allocations. An instance admits a complete state
// iff every unit subset D satisfies  sum_{x in D} alpha_x <= sum_{y in N(D)} beta_y,
// where N(D) is the union of out-neighborhoods. Two independent routes are
// kept deliberately (they cross-check each other in the test suite):
//   - direct subset enumeration (exponential, n <= 22),
//   - integer max-flow on the unit/resource network (any n).

#include "peerstore/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace peerstore {

struct FeasibilityReport {
  bool feasible = false;
  // When feasible: a complete allocation, (P1)-(P3) with row sums = alpha.
  std::optional<AllocationState> allocation;
  // When infeasible: a unit set D whose demand exceeds its reachable capacity.
  std::vector<int> violating_units;
  std::int64_t violating_demand = 0;
  std::int64_t violating_capacity = 0;
};

// Exhaustive Hall check; throws std::invalid_argument for n > 22. The witness
// allocation on the feasible branch comes from the flow route.
FeasibilityReport feasible_by_subsets(const Instance& inst);

// Max-flow route; witness allocation read off the middle-layer flow, witness
// subset read off the source side of a minimum cut.
FeasibilityReport feasible_by_flow(const Instance& inst);

// Strict inequality for every nonempty D. Equivalent formulation used here:
// for each unit x the instance with demand alpha + e_x stays feasible, which
// is one augmenting-path probe above the base maximum flow.
bool strictly_feasible(const Instance& inst);

// Family of unit sets sufficient for the feasibility verdict: singletons for
// units with empty out-neighborhood, plus every maximal irreducible subset
// among the rest. D is irreducible when its shared-resource graph (units
// joined if their neighborhoods intersect) is connected; D is maximal when no
// unit outside it has its whole neighborhood inside N(D). Units with empty
// neighborhoods are excluded from the maximality quantifier, otherwise no
// superset of their singleton would ever qualify. n <= 22.
std::vector<std::vector<int>> maximal_irreducible_subsets(const Instance& inst);

// Verdict taken over maximal_irreducible_subsets only (test hook for the
// reduction property).
bool feasible_by_irreducible(const Instance& inst);

}  // namespace peerstore
