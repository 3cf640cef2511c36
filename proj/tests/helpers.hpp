#pragma once

// Shared instance builders and random generators for the test suite. All
// randomness is seeded explicitly so failures replay exactly.

#include "peerstore/model.hpp"
#include "peerstore/rng.hpp"

#include <utility>
#include <vector>

namespace peerstore::testing {

inline std::vector<std::pair<int, int>> complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y) edges.emplace_back(x, y);
  return edges;
}

inline CountVector counts(std::vector<Count> v) {
  CountVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

inline Eigen::VectorXd reals(std::vector<double> v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

// Three units in a cycle of mutual edges; the workhorse toy:
// alpha = (1,1,1), beta = (2,2,2), lambda = 1, k_c = 1, k_a = 0.
inline Instance toy3() {
  InstanceParams p;
  p.n = 3;
  p.edges = complete_graph(3);
  p.alpha = counts({1, 1, 1});
  p.beta = counts({2, 2, 2});
  p.lambda = reals({1, 1, 1});
  p.k_c = 1.0;
  p.k_a = 0.0;
  return Instance(std::move(p));
}

// The three-unit worked example: unit 1 backs up at 2 and 3, units 2 and 3
// fight over resource 1's scarce capacity. alpha = (7,35,14),
// beta = (35,21,28), lambda = (lambda1,0,0), k_c = 1.
inline Instance example3(double lambda1 = 2.0, double k_a = 0.0) {
  InstanceParams p;
  p.n = 3;
  p.edges = {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
  p.alpha = counts({7, 35, 14});
  p.beta = counts({35, 21, 28});
  p.lambda = reals({lambda1, 0.0, 0.0});
  p.k_c = 1.0;
  p.k_a = k_a;
  return Instance(std::move(p));
}

// Its complete states: unit 1 splits a = w(0,1) in [0,7] at resource 2,
// unit 2 puts b = w(1,0) in [21,35] at resource 1 (rest at 3), unit 3 puts
// 35-b at 1 and b-21 at 2.
inline AllocationState example3_state(const Instance& inst, Count a, Count b) {
  CountMatrix m = CountMatrix::Zero(3, 3);
  m(0, 1) = a;
  m(0, 2) = static_cast<Count>(7 - a);
  m(1, 0) = b;
  m(1, 2) = static_cast<Count>(35 - b);
  m(2, 0) = static_cast<Count>(35 - b);
  m(2, 1) = static_cast<Count>(b - 21);
  return AllocationState::from_matrix(inst, m);
}

// Random digraph instance for property sweeps; rejection-free, any shape.
inline Instance random_instance(Rng& rng, int n, Count alpha_max, Count beta_max,
                                double edge_prob) {
  InstanceParams p;
  p.n = n;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y && rng.bernoulli(edge_prob)) p.edges.emplace_back(x, y);
  p.alpha.resize(n);
  p.beta.resize(n);
  p.lambda.resize(n);
  for (int i = 0; i < n; ++i) {
    p.alpha[i] = static_cast<Count>(rng.uniform_below(alpha_max + 1));
    p.beta[i] = static_cast<Count>(rng.uniform_below(beta_max + 1));
    p.lambda[i] = rng.uniform01();
  }
  p.k_c = 1.0;
  p.k_a = rng.bernoulli(0.5) ? 0.1 : 0.0;
  return Instance(std::move(p));
}

}  // namespace peerstore::testing
