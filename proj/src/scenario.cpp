#include "peerstore/scenario.hpp"

#include "peerstore/game.hpp"
#include "peerstore/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace peerstore {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!obj.is_object()) fail(ctx + " must be an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) fail("unknown key '" + item.key() + "' in " + ctx);
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

GraphSpec parse_graph(const json& j) {
  GraphSpec g;
  if (!j.contains("kind")) fail("graph.kind missing");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "complete") {
    check_keys(j, {"kind", "n"}, "graph");
    g.kind = GraphSpec::Kind::Complete;
    g.n = j.at("n").get<int>();
  } else if (kind == "regular") {
    check_keys(j, {"kind", "n", "degree", "graph_seed"}, "graph");
    g.kind = GraphSpec::Kind::Regular;
    g.n = j.at("n").get<int>();
    g.degree = j.at("degree").get<int>();
    g.graph_seed = get_or<std::uint64_t>(j, "graph_seed", 1);
  } else if (kind == "grid2d") {
    check_keys(j, {"kind", "side"}, "graph");
    g.kind = GraphSpec::Kind::Grid2d;
    g.side = j.at("side").get<int>();
    if (g.side <= 0) fail("graph.side must be positive");
    g.n = g.side * g.side;
  } else if (kind == "line") {
    check_keys(j, {"kind", "n"}, "graph");
    g.kind = GraphSpec::Kind::Line;
    g.n = j.at("n").get<int>();
  } else if (kind == "explicit") {
    check_keys(j, {"kind", "n", "edges"}, "graph");
    g.kind = GraphSpec::Kind::Explicit;
    g.n = j.at("n").get<int>();
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) fail("graph.edges entries must be [x, y]");
      g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  } else {
    fail("graph.kind '" + kind + "' is not one of complete/regular/grid2d/line/explicit");
  }
  if (g.n <= 0) fail("graph.n must be positive");
  return g;
}

Schedule parse_schedule(const std::string& s) {
  if (s == "fixed") return Schedule::Fixed;
  if (s == "anneal") return Schedule::Anneal;
  if (s == "slope") return Schedule::CustomSlope;
  fail("game.schedule '" + s + "' is not one of fixed/anneal/slope");
}

}  // namespace

namespace {

ScenarioConfig parse_scenario_checked(const std::string& json_text) {
  const json root = json::parse(json_text);
  check_keys(root, {"schema_version", "name", "graph", "classes", "game", "run", "output"},
             "config");
  ScenarioConfig cfg;
  if (!root.contains("schema_version")) fail("schema_version missing");
  cfg.schema_version = root.at("schema_version").get<int>();
  if (cfg.schema_version != 1) fail("unsupported schema_version");
  cfg.name = get_or<std::string>(root, "name", "");

  cfg.graph = parse_graph(root.at("graph"));

  if (!root.contains("classes") || !root.at("classes").is_array() || root.at("classes").empty())
    fail("classes must be a nonempty array");
  int total = 0;
  for (const auto& c : root.at("classes")) {
    check_keys(c, {"count", "alpha", "beta", "lambda", "p_on", "nu_on", "nu_off", "nu_act"},
               "classes[]");
    ClassBlock block;
    block.count = c.at("count").get<int>();
    block.alpha = c.at("alpha").get<Count>();
    block.beta = c.at("beta").get<Count>();
    block.lambda = c.at("lambda").get<double>();
    block.p_on = get_or<double>(c, "p_on", 1.0);
    block.nu_on = get_or<double>(c, "nu_on", 1.0);
    block.nu_off = get_or<double>(c, "nu_off", 0.0);
    block.nu_act = get_or<double>(c, "nu_act", 1.0);
    if (block.count <= 0) fail("classes[].count must be positive");
    total += block.count;
    cfg.classes.push_back(block);
  }
  if (total != cfg.graph.n) fail("class counts sum to " + std::to_string(total) +
                                 " but the graph has " + std::to_string(cfg.graph.n) + " units");

  const json& game = root.at("game");
  check_keys(game, {"k_c", "k_a", "gamma0", "schedule", "slope"}, "game");
  cfg.k_c = game.at("k_c").get<double>();
  cfg.k_a = game.at("k_a").get<double>();
  cfg.gamma0 = get_or<double>(game, "gamma0", 0.0);
  cfg.schedule = parse_schedule(get_or<std::string>(game, "schedule", "anneal"));
  if (cfg.schedule == Schedule::CustomSlope) {
    if (!game.contains("slope")) fail("game.slope required when schedule is 'slope'");
    cfg.slope = game.at("slope").get<double>();
  } else if (game.contains("slope")) {
    fail("game.slope only applies to schedule 'slope'");
  }

  const json& run = root.at("run");
  check_keys(run, {"mode", "horizon_mult", "horizon_events", "replicas", "base_seed", "p_all"},
             "run");
  const std::string mode = run.at("mode").get<std::string>();
  if (mode == "discrete") cfg.mode = SimMode::Discrete;
  else if (mode == "continuous") cfg.mode = SimMode::Continuous;
  else fail("run.mode must be 'discrete' or 'continuous'");
  if (run.contains("horizon_mult") && run.contains("horizon_events"))
    fail("run.horizon_mult and run.horizon_events are mutually exclusive");
  cfg.horizon_mult = get_or<double>(run, "horizon_mult", 10.0);
  cfg.horizon_events = get_or<std::int64_t>(run, "horizon_events", -1);
  cfg.replicas = get_or<int>(run, "replicas", 10);
  cfg.base_seed = get_or<std::uint64_t>(run, "base_seed", 1);
  cfg.p_all = get_or<double>(run, "p_all", 1.0);
  if (cfg.replicas <= 0) fail("run.replicas must be positive");
  if (cfg.horizon_mult < 0) fail("run.horizon_mult must be nonnegative");

  if (root.contains("output")) {
    check_keys(root.at("output"), {"record_trajectory"}, "output");
    cfg.record_trajectory = get_or<bool>(root.at("output"), "record_trajectory", true);
  }
  return cfg;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  try {
    return parse_scenario_checked(json_text);
  } catch (const json::exception& e) {
    fail(std::string("invalid config: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<std::pair<int, int>> complete_edges(int n) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y) edges.emplace_back(x, y);
  return edges;
}

std::vector<std::pair<int, int>> grid2d_edges(int side) {
  std::vector<std::pair<int, int>> edges;
  const auto id = [side](int i, int j) { return i * side + j; };
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      if (i + 1 < side) {
        edges.emplace_back(id(i, j), id(i + 1, j));
        edges.emplace_back(id(i + 1, j), id(i, j));
      }
      if (j + 1 < side) {
        edges.emplace_back(id(i, j), id(i, j + 1));
        edges.emplace_back(id(i, j + 1), id(i, j));
      }
    }
  return edges;
}

std::vector<std::pair<int, int>> line_edges(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int x = 0; x + 1 < n; ++x) edges.emplace_back(x, x + 1);
  return edges;
}

std::vector<std::pair<int, int>> random_regular_edges(int n, int degree, std::uint64_t seed) {
  if (degree <= 0 || degree >= n) throw std::invalid_argument("regular graph: bad degree");
  if ((static_cast<std::int64_t>(n) * degree) % 2 != 0)
    throw std::invalid_argument("regular graph: n*degree must be even");
  Rng rng(seed);

  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * degree);
  for (int x = 0; x < n; ++x)
    for (int d = 0; d < degree; ++d) stubs.push_back(x);

  const auto shuffle = [&rng](std::vector<int>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[rng.uniform_below(i)]);
  };
  const auto key = [n](int u, int v) {
    return static_cast<std::int64_t>(std::min(u, v)) * n + std::max(u, v);
  };

  shuffle(stubs);
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) pairs.emplace_back(stubs[i], stubs[i + 1]);

  // Re-match only the conflicting stubs; widen the pool when a round stalls.
  std::size_t extra = 0;
  for (int round = 0; round < 10000; ++round) {
    std::set<std::int64_t> seen;
    std::vector<std::pair<int, int>> good;
    std::vector<int> bad;
    for (const auto& [u, v] : pairs) {
      if (u != v && seen.insert(key(u, v)).second) good.push_back({u, v});
      else {
        bad.push_back(u);
        bad.push_back(v);
      }
    }
    if (bad.empty()) {
      std::vector<std::pair<int, int>> edges;
      edges.reserve(2 * good.size());
      for (const auto& [u, v] : good) {
        edges.emplace_back(u, v);
        edges.emplace_back(v, u);
      }
      std::sort(edges.begin(), edges.end());
      return edges;
    }
    for (std::size_t k = 0; k < extra && !good.empty(); ++k) {
      const std::size_t pick = rng.uniform_below(good.size());
      bad.push_back(good[pick].first);
      bad.push_back(good[pick].second);
      good[pick] = good.back();
      good.pop_back();
    }
    const std::size_t bad_before = bad.size();
    shuffle(bad);
    for (std::size_t i = 0; i + 1 < bad.size(); i += 2) good.emplace_back(bad[i], bad[i + 1]);
    pairs = std::move(good);
    extra = bad_before >= 2 ? 1 + extra : 0;  // stalling rounds enlarge the pool
  }
  throw std::runtime_error("regular graph: conflict repair did not converge");
}

Instance build_instance(const ScenarioConfig& cfg) {
  InstanceParams p;
  p.n = cfg.graph.n;
  switch (cfg.graph.kind) {
    case GraphSpec::Kind::Complete: p.edges = complete_edges(p.n); break;
    case GraphSpec::Kind::Regular:
      p.edges = random_regular_edges(p.n, cfg.graph.degree, cfg.graph.graph_seed);
      break;
    case GraphSpec::Kind::Grid2d: p.edges = grid2d_edges(cfg.graph.side); break;
    case GraphSpec::Kind::Line: p.edges = line_edges(p.n); break;
    case GraphSpec::Kind::Explicit: p.edges = cfg.graph.edges; break;
  }
  p.alpha.resize(p.n);
  p.beta.resize(p.n);
  p.lambda.resize(p.n);
  p.nu_on.resize(p.n);
  p.nu_off.resize(p.n);
  p.nu_act.resize(p.n);
  p.p_on.resize(p.n);
  int x = 0;
  for (const auto& block : cfg.classes) {
    for (int i = 0; i < block.count; ++i, ++x) {
      p.alpha[x] = block.alpha;
      p.beta[x] = block.beta;
      p.lambda[x] = block.lambda;
      p.nu_on[x] = block.nu_on;
      p.nu_off[x] = block.nu_off;
      p.nu_act[x] = block.nu_act;
      p.p_on[x] = block.p_on;
    }
  }
  p.k_c = cfg.k_c;
  p.k_a = cfg.k_a;
  return Instance(std::move(p));
}

ClassPartition class_partition(const ScenarioConfig& cfg) {
  std::vector<int> class_of;
  int c = 0;
  for (const auto& block : cfg.classes) {
    class_of.insert(class_of.end(), block.count, c);
    ++c;
  }
  return ClassPartition::from_class_of(std::move(class_of));
}

std::int64_t resolve_horizon(const ScenarioConfig& cfg, const Instance& inst) {
  if (cfg.horizon_events >= 0) return cfg.horizon_events;
  return static_cast<std::int64_t>(cfg.horizon_mult * static_cast<double>(inst.alpha_sum()));
}

PsiOptInfo resolve_psi_opt(const ScenarioConfig& cfg, const Instance& inst,
                           std::int64_t exact_bound) {
  PsiOptInfo info;
  try {
    const auto opt = optimal_potential(inst, exact_bound);
    info.value = opt.value;
    info.source = opt.kind == PotentialOptimum::Kind::ClosedForm ? PsiOptInfo::Source::ClosedForm
                                                                 : PsiOptInfo::Source::Enumerated;
    return info;
  } catch (const std::runtime_error&) {
    info.value = annealed_potential_estimate(inst, derive_seed(cfg.base_seed, 0x617070ull));
    info.source = PsiOptInfo::Source::Annealed;
    return info;
  }
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const Instance& inst, int jobs) {
  ScenarioResult result;
  result.psi_opt = resolve_psi_opt(cfg, inst);
  const std::int64_t horizon = resolve_horizon(cfg, inst);
  const ClassPartition classes = class_partition(cfg);

  result.replicas.resize(cfg.replicas);
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= cfg.replicas) return;
      try {
        SimParams params;
        params.mode = cfg.mode;
        params.gamma0 = cfg.gamma0;
        params.schedule = cfg.schedule;
        params.slope = cfg.slope;
        params.horizon = horizon;
        params.seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(r));
        params.p_all = cfg.p_all;
        params.record_events = cfg.record_trajectory;
        ReplicaOutput& out = result.replicas[r];
        out.seed = params.seed;
        out.run = simulate(inst, params);
        out.summary = summarize(inst, classes, out.run, result.psi_opt.value, params.seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, cfg.replicas));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<RunSummary> summaries;
  summaries.reserve(result.replicas.size());
  for (const auto& rep : result.replicas) summaries.push_back(rep.summary);
  result.agg = aggregate(summaries);
  return result;
}

}  // namespace peerstore
