#include "doctest.h"
#include "helpers.hpp"

#include "peerstore/model.hpp"

#include <sstream>

using namespace peerstore;
using namespace peerstore::testing;

TEST_CASE("instance validation rejects malformed input") {
  InstanceParams p;
  p.n = 2;
  p.edges = {{0, 1}};
  p.alpha = counts({1, 0});
  p.beta = counts({0, 2});
  p.lambda = reals({0.5, 0.5});
  CHECK_NOTHROW(Instance{p});

  auto bad = p;
  bad.edges.push_back({0, 0});
  CHECK_THROWS_AS(Instance{bad}, std::invalid_argument);  // self-loop

  bad = p;
  bad.edges.push_back({0, 1});
  CHECK_THROWS_AS(Instance{bad}, std::invalid_argument);  // duplicate

  bad = p;
  bad.edges.push_back({0, 2});
  CHECK_THROWS_AS(Instance{bad}, std::invalid_argument);  // out of range

  bad = p;
  bad.alpha[0] = -1;
  CHECK_THROWS_AS(Instance{bad}, std::invalid_argument);

  bad = p;
  bad.lambda = reals({0.5});
  CHECK_THROWS_AS(Instance{bad}, std::invalid_argument);

  bad = p;
  bad.k_a = -0.2;
  CHECK_THROWS_AS(Instance{bad}, std::invalid_argument);

  bad = p;
  bad.p_on = reals({0.5, 1.2});
  CHECK_THROWS_AS(Instance{bad}, std::invalid_argument);
}

TEST_CASE("from_matrix enforces the three state constraints") {
  const Instance inst = toy3();
  CountMatrix m = CountMatrix::Zero(3, 3);
  m(0, 1) = 1;
  CHECK_NOTHROW(AllocationState::from_matrix(inst, m));

  m(0, 0) = 1;  // diagonal entry: not an edge
  CHECK_THROWS_WITH_AS(AllocationState::from_matrix(inst, m), doctest::Contains("(P1)"),
                       std::invalid_argument);

  m(0, 0) = 0;
  m(0, 2) = 1;  // row sum 2 > alpha = 1
  CHECK_THROWS_WITH_AS(AllocationState::from_matrix(inst, m), doctest::Contains("(P2)"),
                       std::invalid_argument);

  m(0, 2) = 0;
  m(1, 2) = 1;
  m(0, 1) = 0;
  m(0, 2) = 1;
  m(2, 1) = 1;
  CHECK_NOTHROW(AllocationState::from_matrix(inst, m));
}

TEST_CASE("column capacity violations are caught") {
  InstanceParams p;
  p.n = 3;
  p.edges = complete_graph(3);
  p.alpha = counts({2, 2, 0});
  p.beta = counts({1, 1, 1});
  p.lambda = reals({1, 1, 1});
  const Instance inst(p);
  CountMatrix m = CountMatrix::Zero(3, 3);
  m(0, 2) = 1;
  m(1, 2) = 1;  // column 2 sums to 2 > beta = 1
  CHECK_THROWS_WITH_AS(AllocationState::from_matrix(inst, m), doctest::Contains("(P3)"),
                       std::invalid_argument);
}

TEST_CASE("worked-example state has the expected sums") {
  const Instance inst = example3();
  const AllocationState s = example3_state(inst, 0, 35);
  CHECK(s.row_sum(0) == 7);
  CHECK(s.row_sum(1) == 35);
  CHECK(s.row_sum(2) == 14);
  // Columns: resource 1 holds b = 35, resource 2 holds a + (b-21) = 14,
  // resource 3 holds (7-a) + (35-b) = 7.
  CHECK(s.col_sum(0) == 35);
  CHECK(s.col_sum(1) == 14);
  CHECK(s.col_sum(2) == 7);
  CHECK(is_complete(inst, s));
  CHECK_NOTHROW(check_state(inst, s));
}

TEST_CASE("apply moves atoms and validates") {
  const Instance inst = toy3();
  AllocationState s(3);
  apply_in_place(inst, s, {MoveKind::Allocation, 0, -1, 1});
  CHECK(s.at(0, 1) == 1);
  CHECK(s.total() == 1);

  // Demand overflow: alpha_0 = 1.
  CHECK_THROWS_WITH_AS(apply(inst, s, {MoveKind::Allocation, 0, -1, 2}),
                       doctest::Contains("demand"), std::invalid_argument);
  // Non-edge target.
  CHECK_THROWS_WITH_AS(apply(inst, s, {MoveKind::Distribution, 0, 1, 0}),
                       doctest::Contains("neighbor"), std::invalid_argument);
  // Empty source.
  CHECK_THROWS_WITH_AS(apply(inst, s, {MoveKind::Distribution, 0, 2, 1}),
                       doctest::Contains("empty source"), std::invalid_argument);

  // Self-reselection leaves the matrix untouched.
  const AllocationState same = apply(inst, s, {MoveKind::Distribution, 0, 1, 1});
  CHECK(same == s);

  const AllocationState moved = apply(inst, s, {MoveKind::Distribution, 0, 1, 2});
  CHECK(moved.at(0, 1) == 0);
  CHECK(moved.at(0, 2) == 1);
  CHECK(moved.total() == 1);
}

TEST_CASE("capacity overflow on distribution") {
  InstanceParams p;
  p.n = 3;
  p.edges = complete_graph(3);
  p.alpha = counts({1, 1, 1});
  p.beta = counts({1, 1, 1});
  p.lambda = reals({1, 1, 1});
  const Instance inst(p);
  CountMatrix m = CountMatrix::Zero(3, 3);
  m(0, 1) = 1;
  m(1, 2) = 1;
  m(2, 0) = 1;
  AllocationState s = AllocationState::from_matrix(inst, m);
  CHECK_THROWS_WITH_AS(apply(inst, s, {MoveKind::Distribution, 0, 1, 2}),
                       doctest::Contains("capacity"), std::invalid_argument);
}

TEST_CASE("random move sequences keep the invariants and inverses cancel") {
  Rng rng(20260814);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = random_instance(rng, 2 + static_cast<int>(rng.uniform_below(5)), 3, 4,
                                          0.6);
    AllocationState s(inst.n());
    for (int step = 0; step < 200; ++step) {
      const int x = static_cast<int>(rng.uniform_below(inst.n()));
      const auto& nb = inst.out_neighbors(x);
      if (nb.empty()) continue;
      const int y = nb[rng.uniform_below(nb.size())];
      if (s.row_sum(x) < inst.alpha(x) && s.col_sum(y) < inst.beta(y) && rng.bernoulli(0.7)) {
        apply_in_place(inst, s, {MoveKind::Allocation, x, -1, y});
      } else if (s.at(x, y) > 0) {
        const int yp = nb[rng.uniform_below(nb.size())];
        if (yp == y || s.col_sum(yp) < inst.beta(yp)) {
          const AllocationState before = s;
          apply_in_place(inst, s, {MoveKind::Distribution, x, y, yp});
          AllocationState back = apply(inst, s, {MoveKind::Distribution, x, yp, y});
          CHECK(back == before);
        }
      }
    }
    CHECK_NOTHROW(check_state(inst, s));
    std::int64_t total = 0;
    for (int x = 0; x < inst.n(); ++x) total += s.row_sum(x);
    std::int64_t by_cols = 0;
    for (int y = 0; y < inst.n(); ++y) by_cols += s.col_sum(y);
    CHECK(total == by_cols);
    CHECK(total == s.total());
  }
}

TEST_CASE("state csv round-trips") {
  const Instance inst = example3();
  const AllocationState s = example3_state(inst, 3, 27);
  std::stringstream buf;
  write_state_csv(buf, s);
  const CountMatrix m = read_state_csv(buf);
  CHECK(m == s.matrix());

  std::stringstream bad("1,2\n3\n");
  CHECK_THROWS_AS(read_state_csv(bad), std::invalid_argument);
  std::stringstream junk("1,x\n2,3\n");
  CHECK_THROWS_AS(read_state_csv(junk), std::invalid_argument);
}

TEST_CASE("functional state mask round-trips") {
  const FunctionalState s = FunctionalState::from_mask(5, 0b10110u);
  CHECK(s.count_on() == 3);
  CHECK(!s.is_on(0));
  CHECK(s.is_on(1));
  CHECK(s.is_on(2));
  CHECK(!s.is_on(3));
  CHECK(s.is_on(4));
  CHECK(s.mask() == 0b10110u);
  CHECK(FunctionalState::all_on(4).mask() == 0b1111u);
}
