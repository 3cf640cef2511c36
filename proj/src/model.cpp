#include "peerstore/model.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace peerstore {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::VectorXd defaulted(const Eigen::VectorXd& v, int n, double fill, const char* name) {
  if (v.size() == 0) return Eigen::VectorXd::Constant(n, fill);
  require(static_cast<int>(v.size()) == n, std::string(name) + ": size mismatch");
  return v;
}

}  // namespace

Instance::Instance(InstanceParams p) {
  require(p.n > 0, "instance: n must be positive");
  n_ = p.n;
  require(static_cast<int>(p.alpha.size()) == n_, "alpha: size mismatch");
  require(static_cast<int>(p.beta.size()) == n_, "beta: size mismatch");
  require(static_cast<int>(p.lambda.size()) == n_, "lambda: size mismatch");
  require((p.alpha.array() >= 0).all(), "alpha: negative entry");
  require((p.beta.array() >= 0).all(), "beta: negative entry");
  require(p.k_c >= 0.0, "k_c: negative");
  require(p.k_a >= 0.0, "k_a: negative");

  alpha_ = std::move(p.alpha);
  beta_ = std::move(p.beta);
  lambda_ = std::move(p.lambda);
  k_c_ = p.k_c;
  k_a_ = p.k_a;
  nu_on_ = defaulted(p.nu_on, n_, 1.0, "nu_on");
  nu_off_ = defaulted(p.nu_off, n_, 0.0, "nu_off");
  nu_act_ = defaulted(p.nu_act, n_, 1.0, "nu_act");
  p_on_ = defaulted(p.p_on, n_, 1.0, "p_on");
  require((nu_on_.array() >= 0).all(), "nu_on: negative entry");
  require((nu_off_.array() >= 0).all(), "nu_off: negative entry");
  require((nu_act_.array() >= 0).all(), "nu_act: negative entry");
  require((p_on_.array() >= 0).all() && (p_on_.array() <= 1).all(), "p_on: outside [0,1]");

  out_.assign(n_, {});
  in_.assign(n_, {});
  adj_.setZero(n_, n_);
  for (const auto& [x, y] : p.edges) {
    require(x >= 0 && x < n_ && y >= 0 && y < n_, "edge: index out of range");
    require(x != y, "edge: self-loop");
    require(adj_(x, y) == 0, "edge: duplicate");
    adj_(x, y) = 1;
    out_[x].push_back(y);
    in_[y].push_back(x);
    ++edge_count_;
  }
  for (auto& v : out_) std::sort(v.begin(), v.end());
  for (auto& v : in_) std::sort(v.begin(), v.end());

  alpha_sum_ = static_cast<std::int64_t>(alpha_.cast<std::int64_t>().sum());
  lambda_max_ = lambda_.size() > 0 ? lambda_.maxCoeff() : 0.0;
  always_on_ = (p_on_.array() == 1.0).all();
}

AllocationState AllocationState::from_matrix(const Instance& inst, CountMatrix m) {
  require(m.rows() == inst.n() && m.cols() == inst.n(), "state: dimension mismatch");
  AllocationState s(inst.n());
  for (int x = 0; x < inst.n(); ++x) {
    for (int y = 0; y < inst.n(); ++y) {
      const Count w = m(x, y);
      require(w >= 0, "state: negative entry");
      if (w == 0) continue;
      require(inst.has_edge(x, y), "state: (P1) violated, positive entry off the graph");
      s.w_(x, y) = w;
      s.row_[x] += w;
      s.col_[y] += w;
      s.total_ += w;
    }
  }
  for (int x = 0; x < inst.n(); ++x)
    require(s.row_[x] <= inst.alpha(x), "state: (P2) violated, row sum exceeds alpha");
  for (int y = 0; y < inst.n(); ++y)
    require(s.col_[y] <= inst.beta(y), "state: (P3) violated, column sum exceeds beta");
  return s;
}

void apply_in_place(const Instance& inst, AllocationState& state, const Move& move) {
  const int n = inst.n();
  require(move.unit >= 0 && move.unit < n, "move: unit out of range");
  require(move.target >= 0 && move.target < n, "move: target out of range");
  if (move.kind == MoveKind::Allocation) {
    require(inst.has_edge(move.unit, move.target), "move: target is not a neighbor");
    require(state.row_sum(move.unit) < inst.alpha(move.unit), "move: demand overflow");
    require(state.col_sum(move.target) < inst.beta(move.target), "move: capacity overflow");
    state.add_atom(move.unit, move.target);
  } else {
    require(move.source >= 0 && move.source < n, "move: source out of range");
    require(state.at(move.unit, move.source) > 0, "move: empty source");
    if (move.source == move.target) return;  // self-reselection, no change
    require(inst.has_edge(move.unit, move.target), "move: target is not a neighbor");
    require(state.col_sum(move.target) < inst.beta(move.target), "move: capacity overflow");
    state.move_atom(move.unit, move.source, move.target);
  }
}

AllocationState apply(const Instance& inst, AllocationState state, const Move& move) {
  apply_in_place(inst, state, move);
  return state;
}

bool is_complete(const Instance& inst, const AllocationState& state) {
  for (int x = 0; x < inst.n(); ++x)
    if (state.row_sum(x) != inst.alpha(x)) return false;
  return true;
}

void check_state(const Instance& inst, const AllocationState& state) {
  const int n = inst.n();
  require(state.n() == n, "check: dimension mismatch");
  std::int64_t total = 0;
  for (int x = 0; x < n; ++x) {
    std::int64_t row = 0;
    for (int y = 0; y < n; ++y) {
      const Count w = state.at(x, y);
      require(w >= 0, "check: negative entry");
      if (w > 0) require(inst.has_edge(x, y), "check: (P1) violated");
      row += w;
    }
    require(row == state.row_sum(x), "check: stale row sum cache");
    require(row <= inst.alpha(x), "check: (P2) violated");
    total += row;
  }
  for (int y = 0; y < n; ++y) {
    std::int64_t col = 0;
    for (int x = 0; x < n; ++x) col += state.at(x, y);
    require(col == state.col_sum(y), "check: stale column sum cache");
    require(col <= inst.beta(y), "check: (P3) violated");
  }
  require(total == state.total(), "check: stale total cache");
}

FunctionalState FunctionalState::from_mask(int n, std::uint32_t mask) {
  FunctionalState s{std::vector<std::uint8_t>(n, 0)};
  for (int x = 0; x < n; ++x)
    if (mask & (1u << x)) s.on[x] = 1;
  return s;
}

std::uint32_t FunctionalState::mask() const {
  std::uint32_t m = 0;
  for (int x = 0; x < static_cast<int>(on.size()); ++x)
    if (on[x]) m |= (1u << x);
  return m;
}

int FunctionalState::count_on() const {
  int c = 0;
  for (auto b : on) c += b != 0;
  return c;
}

void write_state_csv(std::ostream& os, const AllocationState& state) {
  const auto& m = state.matrix();
  for (int x = 0; x < m.rows(); ++x) {
    for (int y = 0; y < m.cols(); ++y) {
      if (y) os << ',';
      os << m(x, y);
    }
    os << '\n';
  }
}

CountMatrix read_state_csv(std::istream& is) {
  std::vector<std::vector<Count>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<Count> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      size_t pos = 0;
      long v = 0;
      try {
        v = std::stol(cell, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("state csv: non-integer cell '" + cell + "'");
      }
      if (pos != cell.size()) throw std::invalid_argument("state csv: trailing junk in cell");
      row.push_back(static_cast<Count>(v));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("state csv: empty file");
  const size_t n = rows.size();
  CountMatrix m(n, n);
  for (size_t x = 0; x < n; ++x) {
    if (rows[x].size() != n)
      throw std::invalid_argument("state csv: matrix is not square");
    for (size_t y = 0; y < n; ++y) m(x, y) = rows[x][y];
  }
  return m;
}

}  // namespace peerstore
