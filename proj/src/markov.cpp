#include "peerstore/markov.hpp"

#include "peerstore/game.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace peerstore {

namespace {

std::string state_key(const AllocationState& s) {
  const auto& m = s.matrix();
  return std::string(reinterpret_cast<const char*>(m.data()), sizeof(Count) * m.size());
}

// Gibbs probabilities for unit x over its availability set in `state` with
// one atom removed from `removed_y` (pass -1 for none); all units on or per
// the mask. Mirrors the simulator's weights exactly.
struct MoveLaw {
  std::vector<int> support;
  std::vector<double> prob;
};

MoveLaw move_law(const Instance& inst, const AllocationState& state, std::uint32_t mask, int x,
                 int removed_y, double gamma) {
  MoveLaw law;
  std::vector<double> expo;
  double top = -std::numeric_limits<double>::infinity();
  for (int y : inst.out_neighbors(x)) {
    if (!(mask & (1u << y))) continue;
    const std::int64_t col = state.col_sum(y) - (y == removed_y ? 1 : 0);
    if (col >= inst.beta(y)) continue;
    const std::int64_t w = state.at(x, y) - (y == removed_y ? 1 : 0);
    const double f = inst.lambda(y) -
                     inst.k_c() * static_cast<double>(col + 1) / inst.beta(y) +
                     inst.k_a() * static_cast<double>(w + 1);
    law.support.push_back(y);
    expo.push_back(gamma * f);
    top = std::max(top, expo.back());
  }
  double total = 0.0;
  for (double e : expo) {
    law.prob.push_back(std::exp(e - top));
    total += law.prob.back();
  }
  for (double& p : law.prob) p /= total;
  return law;
}

}  // namespace

int StateSpace::find_allocation(const AllocationState& w) const {
  const auto it = allocation_index.find(state_key(w));
  return it == allocation_index.end() ? -1 : it->second;
}

StateSpace build_state_space(const Instance& inst, std::int64_t bound) {
  if (inst.n() > 20) throw std::invalid_argument("state space: n > 20");
  StateSpace space;
  space.n = inst.n();
  const std::int64_t w_bound = std::max<std::int64_t>(1, bound >> inst.n());
  enumerate_complete_states(inst, w_bound, [&](const AllocationState& s) {
    space.allocation_index.emplace(state_key(s), static_cast<int>(space.allocations.size()));
    space.allocations.push_back(s);
  });
  if (space.size() > bound)
    throw std::runtime_error("state space: 2^n * |W| exceeds bound");
  return space;
}

Generator build_generator(const Instance& inst, double gamma, std::int64_t bound) {
  Generator gen;
  gen.space = build_state_space(inst, bound);
  gen.gamma = gamma;
  const auto& space = gen.space;
  const int n = inst.n();
  const int nw = static_cast<int>(space.allocations.size());
  const auto total = static_cast<int>(space.size());

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(total);
  auto add_rate = [&](int from, int to, double rate) {
    if (rate <= 0.0) return;
    triplets.emplace_back(from, to, rate);
    diag[from] -= rate;
  };

  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (int w = 0; w < nw; ++w) {
      const int from = space.index(mask, w);
      const AllocationState& state = space.allocations[w];

      for (int x = 0; x < n; ++x) {
        const bool on = mask & (1u << x);
        add_rate(from, space.index(mask ^ (1u << x), w),
                 on ? inst.nu_off(x) : inst.nu_on(x));
      }

      for (int x = 0; x < n; ++x) {
        if (!(mask & (1u << x)) || inst.alpha(x) == 0 || inst.nu_act(x) <= 0.0) continue;
        for (int y : inst.out_neighbors(x)) {
          const Count w_xy = state.at(x, y);
          if (w_xy == 0 || !(mask & (1u << y))) continue;
          const auto law = move_law(inst, state, mask, x, y, gamma);
          const double source_prob = static_cast<double>(w_xy) / inst.alpha(x);
          for (std::size_t k = 0; k < law.support.size(); ++k) {
            const int yp = law.support[k];
            if (yp == y) continue;
            AllocationState moved = state;
            moved.move_atom(x, y, yp);
            const int widx = space.find_allocation(moved);
            if (widx < 0)
              throw std::logic_error("generator: moved state missing from the space");
            add_rate(from, space.index(mask, widx),
                     inst.nu_act(x) * source_prob * law.prob[k]);
          }
        }
      }
    }
  }
  for (int i = 0; i < total; ++i)
    if (diag[i] != 0.0) triplets.emplace_back(i, i, diag[i]);
  gen.rates.resize(total, total);
  gen.rates.setFromTriplets(triplets.begin(), triplets.end());
  return gen;
}

Eigen::VectorXd stationary_closed_form(const Instance& inst, const StateSpace& space,
                                       double gamma) {
  const int n = inst.n();
  const int nw = static_cast<int>(space.allocations.size());
  const auto total = static_cast<int>(space.size());
  const auto g = game_params(inst);

  // Allocation part: log[(prod alpha!/prod w!) e^{gamma Psi}].
  Eigen::VectorXd log_w(nw);
  double alpha_fact = 0.0;
  for (int x = 0; x < n; ++x) alpha_fact += std::lgamma(static_cast<double>(inst.alpha(x)) + 1);
  for (int w = 0; w < nw; ++w) {
    const AllocationState& s = space.allocations[w];
    double lw = alpha_fact + gamma * potential_value(inst, g, s);
    for (int x = 0; x < n; ++x)
      for (int y : inst.out_neighbors(x))
        if (s.at(x, y) > 1) lw -= std::lgamma(static_cast<double>(s.at(x, y)) + 1);
    log_w[w] = lw;
  }

  Eigen::VectorXd log_mu(total);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double churn = 0.0;
    for (int x = 0; x < n; ++x) {
      const double rate = (mask & (1u << x)) ? inst.nu_on(x) : inst.nu_off(x);
      churn += rate > 0.0 ? std::log(rate) : -std::numeric_limits<double>::infinity();
    }
    for (int w = 0; w < nw; ++w) log_mu[space.index(mask, w)] = churn + log_w[w];
  }

  const double top = log_mu.maxCoeff();
  if (!std::isfinite(top))
    throw std::runtime_error("stationary_closed_form: all weights vanish");
  Eigen::VectorXd mu = (log_mu.array() - top).exp();
  mu /= mu.sum();
  return mu;
}

double check_detailed_balance(const Instance& inst, const Generator& gen) {
  const Eigen::VectorXd mu = stationary_closed_form(inst, gen.space, gen.gamma);
  double worst = 0.0;
  for (int col = 0; col < gen.rates.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(gen.rates, col); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int j = col;
      if (i >= j) continue;  // each unordered pair once
      const double forward = mu[i] * gen.rates.coeff(i, j);
      const double backward = mu[j] * gen.rates.coeff(j, i);
      const double scale = std::max({forward, backward, 1e-300});
      worst = std::max(worst, std::abs(forward - backward) / scale);
    }
  }
  return worst;
}

namespace {

// Tarjan strongly connected components on the sparse pattern.
struct Scc {
  const Eigen::SparseMatrix<double>& m;
  std::vector<int> index, low, comp;
  std::vector<char> on_stack;
  std::vector<int> stack;
  int counter = 0, components = 0;

  explicit Scc(const Eigen::SparseMatrix<double>& mat)
      : m(mat),
        index(mat.rows(), -1),
        low(mat.rows(), 0),
        comp(mat.rows(), -1),
        on_stack(mat.rows(), 0) {}

  void run() {
    for (int v = 0; v < m.rows(); ++v)
      if (index[v] < 0) strong(v);
  }

  // Iterative to stay safe on deep chains.
  void strong(int root) {
    struct Frame {
      int v;
      Eigen::SparseMatrix<double>::InnerIterator it;
    };
    std::vector<Frame> frames;
    auto open = [&](int v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      frames.push_back({v, Eigen::SparseMatrix<double>::InnerIterator(m, v)});
    };
    open(root);
    while (!frames.empty()) {
      auto& f = frames.back();
      bool descended = false;
      // Column f.v of the matrix holds entries L(row, f.v); we need successors
      // of f.v, i.e. row f.v. Work on the transposed pattern instead: callers
      // pass a row-accessible copy (see below).
      for (; f.it; ++f.it) {
        const int to = static_cast<int>(f.it.row());
        if (to == f.v || f.it.value() == 0.0) continue;
        if (index[to] < 0) {
          ++f.it;
          open(to);
          descended = true;
          break;
        }
        if (on_stack[to]) low[f.v] = std::min(low[f.v], index[to]);
      }
      if (descended) continue;
      const int v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        for (;;) {
          const int w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = components;
          if (w == v) break;
        }
        ++components;
      }
    }
  }
};

}  // namespace

StationaryResult solve_stationary(const Generator& gen) {
  const auto total = static_cast<int>(gen.space.size());
  if (total > 4000)
    throw std::invalid_argument("solve_stationary: space too large for the dense solve");

  // Successor sets of state i sit in row i; transpose to make them columns.
  Eigen::SparseMatrix<double> transposed = gen.rates.transpose();
  Scc scc(transposed);
  scc.run();

  StationaryResult result;
  if (scc.components > 1) {
    // Recurrent classes: components with no edge leaving them.
    std::vector<char> leaks(scc.components, 0);
    for (int col = 0; col < gen.rates.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(gen.rates, col); it; ++it) {
        const int i = static_cast<int>(it.row());
        if (i != col && it.value() > 0.0 && scc.comp[i] != scc.comp[col]) leaks[scc.comp[i]] = 1;
      }
    std::vector<std::vector<int>> classes(scc.components);
    for (int v = 0; v < total; ++v) classes[scc.comp[v]].push_back(v);
    for (int c = 0; c < scc.components; ++c)
      if (!leaks[c]) result.recurrent_classes.push_back(std::move(classes[c]));
    result.irreducible = false;
    return result;
  }

  result.irreducible = true;
  result.recurrent_classes.push_back({});
  result.recurrent_classes[0].resize(total);
  for (int v = 0; v < total; ++v) result.recurrent_classes[0][v] = v;

  // pi^T L = 0 with a normalization row substituted in.
  Eigen::MatrixXd a = Eigen::MatrixXd(gen.rates.transpose());
  a.row(0).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(total);
  b[0] = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(b);
  for (int i = 0; i < total; ++i) pi[i] = std::max(pi[i], 0.0);
  pi /= pi.sum();
  result.distribution = pi;
  return result;
}

bool check_L_connected(const Instance& inst, std::int64_t bound) {
  const StateSpace space = build_state_space(inst, bound);
  const int nw = static_cast<int>(space.allocations.size());
  if (nw == 0) return false;
  std::vector<int> parent(nw);
  for (int i = 0; i < nw; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  const std::uint32_t all_on = (1u << inst.n()) - 1;
  for (int w = 0; w < nw; ++w) {
    const AllocationState& state = space.allocations[w];
    for (int x = 0; x < inst.n(); ++x) {
      for (int y : inst.out_neighbors(x)) {
        if (state.at(x, y) == 0) continue;
        const auto law = move_law(inst, state, all_on, x, y, 0.0);
        for (int yp : law.support) {
          if (yp == y) continue;
          AllocationState moved = state;
          moved.move_atom(x, y, yp);
          const int other = space.find_allocation(moved);
          if (other >= 0) parent[find(w)] = find(other);
        }
      }
    }
  }
  const int root = find(0);
  for (int i = 1; i < nw; ++i)
    if (find(i) != root) return false;
  return true;
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

Eigen::VectorXd allocation_marginal(const StateSpace& space, const Eigen::VectorXd& mu) {
  const int nw = static_cast<int>(space.allocations.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nw);
  for (int idx = 0; idx < static_cast<int>(space.size()); ++idx)
    out[space.decompose(idx).second] += mu[idx];
  return out;
}

Eigen::VectorXd allocation_closed_form(const Instance& inst, const StateSpace& space,
                                       double gamma) {
  const int nw = static_cast<int>(space.allocations.size());
  const auto g = game_params(inst);
  Eigen::VectorXd log_w(nw);
  for (int w = 0; w < nw; ++w) {
    const AllocationState& s = space.allocations[w];
    double lw = gamma * potential_value(inst, g, s);
    for (int x = 0; x < inst.n(); ++x)
      for (int y : inst.out_neighbors(x))
        if (s.at(x, y) > 1) lw -= std::lgamma(static_cast<double>(s.at(x, y)) + 1);
    log_w[w] = lw;
  }
  Eigen::VectorXd out = (log_w.array() - log_w.maxCoeff()).exp();
  out /= out.sum();
  return out;
}

}  // namespace peerstore
