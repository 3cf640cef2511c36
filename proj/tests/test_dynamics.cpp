#include "doctest.h"
#include "helpers.hpp"

#include "peerstore/dynamics.hpp"
#include "peerstore/game.hpp"

#include <cmath>
#include <map>
#include <vector>

using namespace peerstore;
using namespace peerstore::testing;

namespace {

// Literal softmax oracle over the availability set, long double accumulation.
std::vector<double> softmax_oracle(const Instance& inst, const FunctionalState& xi,
                                   const AllocationState& state, int x, double gamma) {
  const auto g = game_params(inst);
  const auto support = available(inst, xi, state, x);
  std::vector<long double> e;
  long double total = 0.0L;
  for (int y : support) {
    const double f =
        utility_term(inst, g, y, state.col_sum(y) + 1, static_cast<Count>(state.at(x, y) + 1));
    e.push_back(std::exp(static_cast<long double>(gamma) * f));
    total += e.back();
  }
  std::vector<double> p;
  for (long double v : e) p.push_back(static_cast<double>(v / total));
  return p;
}

// Replays an event log from scratch and checks every event was legal.
void replay_and_check(const Instance& inst, const SimParams& params, const SimResult& result) {
  AllocationState state(inst.n());
  FunctionalState xi = FunctionalState::all_on(inst.n());
  std::vector<std::int64_t> moves(inst.n(), 0);
  std::int64_t completion = -1, activations = 0;
  const bool discrete = params.mode == SimMode::Discrete;

  for (const auto& row : result.log) {
    switch (row.kind) {
      case EventKind::SwitchOn:
        CHECK(!discrete);
        CHECK(!xi.is_on(row.unit));
        xi.on[row.unit] = 1;
        break;
      case EventKind::SwitchOff:
        CHECK(!discrete);
        CHECK(xi.is_on(row.unit));
        xi.on[row.unit] = 0;
        break;
      case EventKind::Alloc: {
        ++activations;
        CHECK(inst.has_edge(row.unit, row.target));
        CHECK(state.row_sum(row.unit) < inst.alpha(row.unit));
        CHECK(state.col_sum(row.target) < inst.beta(row.target));
        if (!discrete) CHECK(xi.is_on(row.unit));
        CHECK((xi.is_on(row.target) || discrete));
        state.add_atom(row.unit, row.target);
        ++moves[row.unit];
        if (completion < 0 && is_complete(inst, state)) completion = activations;
        break;
      }
      case EventKind::Dist: {
        ++activations;
        CHECK(state.at(row.unit, row.source) > 0);
        CHECK(inst.has_edge(row.unit, row.target));
        if (row.target != row.source) {
          CHECK(state.col_sum(row.target) < inst.beta(row.target));
          state.move_atom(row.unit, row.source, row.target);
          ++moves[row.unit];
        }
        break;
      }
      case EventKind::Noop:
        if (discrete || row.source >= 0 || row.unit >= 0) ++activations;
        break;
    }
    CHECK(row.allocated == state.total());
    CHECK_NOTHROW(check_state(inst, state));
  }

  CHECK(state == result.state);
  CHECK(result.moves == moves);
  if (inst.always_on() && discrete) {
    // Every step is an activation event, so the replay count is exact.
    CHECK(result.activation_events == activations);
    CHECK(result.completion_event == completion);
  }
  CHECK(result.psi == doctest::Approx(potential(inst, result.state)).epsilon(1e-12));
  // The incrementally tracked potential in the log stays glued to the truth.
  if (!result.log.empty())
    CHECK(result.log.back().psi == doctest::Approx(result.psi).epsilon(1e-8));
}

}  // namespace

TEST_CASE("gamma schedules") {
  SimParams p;
  p.gamma0 = 0.7;
  p.schedule = Schedule::Fixed;
  CHECK(gamma_at(p, 3.0, 12345) == 0.7);

  p.schedule = Schedule::Anneal;
  CHECK(gamma_at(p, 3.0, 0) == 0.7);
  CHECK(gamma_at(p, 3.0, 600) == doctest::Approx(0.7 + 600.0 / 300.0).epsilon(1e-15));
  CHECK_THROWS_AS(gamma_at(p, 0.0, 1), std::invalid_argument);

  p.schedule = Schedule::CustomSlope;
  p.slope = 0.25;
  CHECK(gamma_at(p, 3.0, 8) == doctest::Approx(2.7).epsilon(1e-15));
}

TEST_CASE("gibbs matches the softmax oracle and is uniform at gamma zero") {
  Rng rng(0x91bb5ull);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = random_instance(rng, 2 + static_cast<int>(rng.uniform_below(4)), 3, 4,
                                          0.7);
    // Random partial state reached by greedy random allocations.
    AllocationState s(inst.n());
    const auto all_on = FunctionalState::all_on(inst.n());
    for (int step = 0; step < 20; ++step) {
      const int x = static_cast<int>(rng.uniform_below(inst.n()));
      if (s.row_sum(x) >= inst.alpha(x)) continue;
      const auto av = available(inst, all_on, s, x);
      if (av.empty()) continue;
      s.add_atom(x, av[rng.uniform_below(av.size())]);
    }
    for (int x = 0; x < inst.n(); ++x) {
      const auto av = available(inst, all_on, s, x);
      if (av.empty()) {
        CHECK_THROWS_AS(gibbs(inst, all_on, s, x, 1.0), std::invalid_argument);
        continue;
      }
      for (double gamma : {0.0, 0.31, 2.5, 40.0}) {
        const auto choice = gibbs(inst, all_on, s, x, gamma);
        CHECK(choice.support == av);
        const auto oracle = softmax_oracle(inst, all_on, s, x, gamma);
        double total = 0.0;
        for (std::size_t i = 0; i < oracle.size(); ++i) {
          CHECK(choice.prob[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
          total += choice.prob[i];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        if (gamma == 0.0)
          for (double pr : choice.prob)
            CHECK(pr == doctest::Approx(1.0 / av.size()).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("discrete run on the toy: replay, completion, determinism") {
  const Instance inst = toy3();
  SimParams p;
  p.mode = SimMode::Discrete;
  p.gamma0 = 1.0;
  p.schedule = Schedule::Fixed;
  p.horizon = 400;
  p.seed = 42;
  p.record_events = true;

  const SimResult r = simulate(inst, p);
  CHECK(r.events == 400);
  CHECK(r.activation_events == 400);
  CHECK(is_complete(inst, r.state));
  CHECK(r.completion_event >= 3);  // three atoms need three allocations
  replay_and_check(inst, p, r);

  // With p_all = 1 a unit never redistributes before filling its row; in the
  // replayed log every Alloc therefore precedes any Dist by the same unit.
  std::vector<std::int64_t> placed(inst.n(), 0);
  for (const auto& row : r.log) {
    if (row.kind == EventKind::Alloc) ++placed[row.unit];
    if (row.kind == EventKind::Dist) CHECK(placed[row.unit] == inst.alpha(row.unit));
  }

  const SimResult again = simulate(inst, p);
  REQUIRE(again.log.size() == r.log.size());
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    CHECK(again.log[i].kind == r.log[i].kind);
    CHECK(again.log[i].unit == r.log[i].unit);
    CHECK(again.log[i].source == r.log[i].source);
    CHECK(again.log[i].target == r.log[i].target);
    CHECK(again.log[i].psi == r.log[i].psi);
  }
  CHECK(again.state == r.state);

  // Distinct seeds give distinct streams at the generator level.
  Rng a(42), b(43);
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("annealing advances gamma per activation event") {
  const Instance inst = toy3();
  SimParams p;
  p.mode = SimMode::Discrete;
  p.gamma0 = 0.0;
  p.schedule = Schedule::Anneal;
  p.horizon = 50;
  p.seed = 7;
  p.record_events = true;
  const SimResult r = simulate(inst, p);
  for (std::size_t i = 0; i < r.log.size(); ++i)
    CHECK(r.log[i].gamma ==
          doctest::Approx(static_cast<double>(i) / (100.0 * inst.lambda_max())).epsilon(1e-14));
  CHECK(r.final_gamma >= r.log.back().gamma);
}

TEST_CASE("self-reselection is logged but moves nothing") {
  // Two units, both complete from the start after two allocations; beta = 1
  // means the only candidate after removal is the source itself.
  InstanceParams ip;
  ip.n = 2;
  ip.edges = {{0, 1}, {1, 0}};
  ip.alpha = counts({1, 1});
  ip.beta = counts({1, 1});
  ip.lambda = reals({1, 1});
  const Instance inst(ip);
  SimParams p;
  p.mode = SimMode::Discrete;
  p.horizon = 30;
  p.seed = 5;
  p.record_events = true;
  const SimResult r = simulate(inst, p);
  CHECK(is_complete(inst, r.state));
  int self = 0;
  for (const auto& row : r.log)
    if (row.kind == EventKind::Dist) {
      CHECK(row.target == row.source);  // nowhere else to go
      ++self;
    }
  CHECK(self == 28);  // every event after the two allocations
  CHECK(r.moves == std::vector<std::int64_t>{1, 1});
  replay_and_check(inst, p, r);
}

TEST_CASE("unit that is never on neither acts nor receives") {
  InstanceParams ip;
  ip.n = 3;
  ip.edges = complete_graph(3);
  ip.alpha = counts({2, 2, 2});
  ip.beta = counts({3, 3, 3});
  ip.lambda = reals({1, 1, 1});
  ip.p_on = reals({1, 1, 0});
  const Instance inst(ip);
  CHECK(!inst.always_on());

  SimParams p;
  p.mode = SimMode::Discrete;
  p.gamma0 = 2.0;
  p.horizon = 300;
  p.seed = 11;
  p.record_events = true;
  const SimResult r = simulate(inst, p);
  for (const auto& row : r.log) {
    CHECK(row.unit != 2);
    CHECK(row.target != 2);
  }
  CHECK(r.state.row_sum(2) == 0);
  CHECK(r.state.col_sum(2) == 0);
  // Units 0 and 1 can only use each other and do fill up there.
  CHECK(r.state.at(0, 1) == 2);
  CHECK(r.state.at(1, 0) == 2);
  CHECK(!is_complete(inst, r.state));
  CHECK(r.completion_event == -1);
}

TEST_CASE("continuous run with churn: replay and clocks") {
  InstanceParams ip;
  ip.n = 3;
  ip.edges = complete_graph(3);
  ip.alpha = counts({1, 1, 1});
  ip.beta = counts({2, 2, 2});
  ip.lambda = reals({1, 1, 1});
  ip.nu_on = reals({2, 2, 2});
  ip.nu_off = reals({1, 1, 1});
  ip.nu_act = reals({1, 1, 1});
  const Instance inst(ip);

  SimParams p;
  p.mode = SimMode::Continuous;
  p.gamma0 = 0.8;
  p.horizon = 2000;
  p.seed = 99;
  p.record_events = true;
  const SimResult r = simulate(inst, p);
  CHECK(r.events == 2000);
  CHECK(r.activation_events < r.events);  // churn takes a share
  int on = 0, off = 0, noop_off = 0;
  double last_t = 0.0;
  for (const auto& row : r.log) {
    CHECK(row.time > last_t);
    last_t = row.time;
    if (row.kind == EventKind::SwitchOn) ++on;
    if (row.kind == EventKind::SwitchOff) ++off;
    if (row.kind == EventKind::Noop && row.unit >= 0 && row.source < 0) ++noop_off;
  }
  CHECK(on > 50);
  CHECK(off > 50);
  CHECK(noop_off > 0);  // off units do get woken and ignored
  CHECK(r.time == doctest::Approx(last_t));
  replay_and_check(inst, p, r);

  // Final on/off pattern agrees with the log replay.
  FunctionalState xi = FunctionalState::all_on(3);
  for (const auto& row : r.log) {
    if (row.kind == EventKind::SwitchOn) xi.on[row.unit] = 1;
    if (row.kind == EventKind::SwitchOff) xi.on[row.unit] = 0;
  }
  CHECK(xi.on == r.xi.on);
}

TEST_CASE("continuous mode refuses an all-dead clock set") {
  InstanceParams ip;
  ip.n = 2;
  ip.edges = complete_graph(2);
  ip.alpha = counts({1, 1});
  ip.beta = counts({1, 1});
  ip.lambda = reals({1, 1});
  ip.nu_on = reals({1, 1});
  ip.nu_off = reals({0, 0});
  ip.nu_act = reals({0, 0});
  const Instance inst(ip);
  SimParams p;
  p.mode = SimMode::Continuous;
  p.horizon = 1;
  CHECK_THROWS_AS(simulate(inst, p), std::runtime_error);
}

TEST_CASE("simulator rejects bad p_all") {
  SimParams p;
  p.p_all = 0.0;
  CHECK_THROWS_AS(simulate(toy3(), p), std::invalid_argument);
  p.p_all = 1.5;
  CHECK_THROWS_AS(simulate(toy3(), p), std::invalid_argument);
}

TEST_CASE("first-step target frequencies follow the gibbs law") {
  InstanceParams ip;
  ip.n = 3;
  ip.edges = {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
  ip.alpha = counts({1, 0, 0});
  ip.beta = counts({5, 5, 5});
  ip.lambda = reals({0.0, 0.3, 0.9});
  const Instance inst(ip);

  const double gamma = 1.7;
  const auto law = gibbs(inst, FunctionalState::all_on(3), AllocationState(3), 0, gamma);
  REQUIRE(law.support == std::vector<int>{1, 2});

  SimParams p;
  p.mode = SimMode::Discrete;
  p.gamma0 = gamma;
  p.horizon = 1;
  p.record_events = true;
  std::map<int, int> hits;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    p.seed = derive_seed(0xf1e1d5ull, static_cast<std::uint64_t>(t));
    const SimResult r = simulate(inst, p);
    REQUIRE(r.log.size() == 1);
    REQUIRE(r.log[0].kind == EventKind::Alloc);
    ++hits[r.log[0].target];
  }
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    const double freq = static_cast<double>(hits[law.support[i]]) / trials;
    CHECK(std::abs(freq - law.prob[i]) < 0.02);  // ~6 sigma at 20000 trials
  }
}

TEST_CASE("p_all below one mixes allocations with redistributions") {
  const Instance inst = example3();
  SimParams p;
  p.mode = SimMode::Discrete;
  p.gamma0 = 0.5;
  p.horizon = 3000;
  p.seed = 3;
  p.p_all = 0.5;
  p.record_events = true;
  const SimResult r = simulate(inst, p);
  replay_and_check(inst, p, r);
  bool dist_before_complete = false;
  for (const auto& row : r.log) {
    if (row.kind == EventKind::Dist && row.allocated < inst.alpha_sum())
      dist_before_complete = true;
  }
  CHECK(dist_before_complete);
  CHECK(is_complete(inst, r.state));
}
