#pragma once

// Exact verification on small instances. The chain lives on pairs
// (xi, W) with W a complete allocation: churn flips one unit's bit at rate
// nu_on / nu_off, an activation of an on unit x moves one of its atoms
// (source picked with probability w/alpha, target by the Gibbs law over the
// state with that atom removed). The stationary law factorizes as
//   mu(xi, W) ~ prod_{on} nu_on * prod_{off} nu_off
//             * (prod_x alpha_x! / prod_{x,y} w_xy!) * exp(gamma Psi(W))
// and the generator is reversible with respect to it; both facts are checked
// numerically here against an independent null-space solve.

#include "peerstore/model.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace peerstore {

struct StateSpace {
  int n = 0;
  std::vector<AllocationState> allocations;  // complete states, enumeration order
  std::unordered_map<std::string, int> allocation_index;

  std::int64_t size() const {
    return static_cast<std::int64_t>(allocations.size()) << n;
  }
  int index(std::uint32_t mask, int w) const {
    return static_cast<int>(mask) * static_cast<int>(allocations.size()) + w;
  }
  std::pair<std::uint32_t, int> decompose(int idx) const {
    const int m = static_cast<int>(allocations.size());
    return {static_cast<std::uint32_t>(idx / m), idx % m};
  }
  int find_allocation(const AllocationState& w) const;
};

// Enumerates complete allocations; throws when 2^n * |W| exceeds `bound`.
StateSpace build_state_space(const Instance& inst, std::int64_t bound = 100000);

struct Generator {
  StateSpace space;
  Eigen::SparseMatrix<double> rates;  // off-diagonal >= 0, zero row sums
  double gamma = 0.0;
};

Generator build_generator(const Instance& inst, double gamma, std::int64_t bound = 100000);

// Normalized closed-form stationary law on the product space.
Eigen::VectorXd stationary_closed_form(const Instance& inst, const StateSpace& space,
                                       double gamma);

// Largest relative violation of mu_i L_ij = mu_j L_ji over transition pairs.
double check_detailed_balance(const Instance& inst, const Generator& gen);

struct StationaryResult {
  bool irreducible = false;
  Eigen::VectorXd distribution;  // empty when reducible
  std::vector<std::vector<int>> recurrent_classes;
};

// Null-space solve of the generator (dense, guarded to small spaces). A
// reducible chain is reported through its recurrent classes instead of a
// distribution.
StationaryResult solve_stationary(const Generator& gen);

// Connectivity of the move graph on complete allocations with every unit on.
bool check_L_connected(const Instance& inst, std::int64_t bound = 100000);

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Marginal of a product-space distribution over the allocation coordinate.
Eigen::VectorXd allocation_marginal(const StateSpace& space, const Eigen::VectorXd& mu);

// Closed-form allocation law with churn marginalized out:
// ~ (prod alpha_x! / prod w_xy!) * exp(gamma Psi).
Eigen::VectorXd allocation_closed_form(const Instance& inst, const StateSpace& space,
                                       double gamma);

}  // namespace peerstore
