#pragma once

// Core model types: the problem instance (directed trust graph, demands,
// capacities, utility weights, churn rates) and the allocation state (integer
// matrix w, where w(x,y) counts atoms of unit x stored at unit y's resource).
//
// State constraints maintained everywhere:
//   (P1) w(x,y) > 0 only on edges of the graph,
//   (P2) sum_y w(x,y) <= alpha_x       (a unit never over-allocates),
//   (P3) sum_x w(x,y) <= beta_y        (a resource never over-commits).
// A state is complete when every row sum equals alpha_x.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace peerstore {

using Count = std::int32_t;
using CountMatrix = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<Count, Eigen::Dynamic, 1>;
using SumVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct InstanceParams {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // directed (x, y): x may store at y
  CountVector alpha;                       // per-unit demand
  CountVector beta;                        // per-unit capacity offered
  Eigen::VectorXd lambda;                  // per-unit affidability weight
  double k_c = 1.0;                        // congestion weight
  double k_a = 0.0;                        // aggregation weight
  // Churn rates and on-probabilities; empty vectors mean the defaults
  // nu_on = 1, nu_off = 0, nu_act = 1, p_on = 1 for every unit.
  Eigen::VectorXd nu_on, nu_off, nu_act, p_on;
};

class Instance {
 public:
  // Validates everything (index ranges, self-loops, duplicate edges, negative
  // or inconsistent parameters) and throws std::invalid_argument on the first
  // violation. A constructed Instance is immutable and internally consistent.
  explicit Instance(InstanceParams params);

  int n() const { return n_; }
  const std::vector<int>& out_neighbors(int x) const { return out_[x]; }
  const std::vector<int>& in_neighbors(int y) const { return in_[y]; }
  bool has_edge(int x, int y) const { return adj_(x, y) != 0; }
  int edge_count() const { return edge_count_; }

  Count alpha(int x) const { return alpha_[x]; }
  Count beta(int y) const { return beta_[y]; }
  double lambda(int y) const { return lambda_[y]; }
  const CountVector& alpha() const { return alpha_; }
  const CountVector& beta() const { return beta_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  double k_c() const { return k_c_; }
  double k_a() const { return k_a_; }
  std::int64_t alpha_sum() const { return alpha_sum_; }
  double lambda_max() const { return lambda_max_; }

  double nu_on(int x) const { return nu_on_[x]; }
  double nu_off(int x) const { return nu_off_[x]; }
  double nu_act(int x) const { return nu_act_[x]; }
  double p_on(int x) const { return p_on_[x]; }
  const Eigen::VectorXd& nu_on() const { return nu_on_; }
  const Eigen::VectorXd& nu_off() const { return nu_off_; }
  const Eigen::VectorXd& nu_act() const { return nu_act_; }
  const Eigen::VectorXd& p_on() const { return p_on_; }
  bool always_on() const { return always_on_; }

 private:
  int n_ = 0;
  int edge_count_ = 0;
  std::vector<std::vector<int>> out_, in_;  // sorted ascending
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> adj_;
  CountVector alpha_, beta_;
  Eigen::VectorXd lambda_;
  double k_c_ = 1.0, k_a_ = 0.0;
  Eigen::VectorXd nu_on_, nu_off_, nu_act_, p_on_;
  std::int64_t alpha_sum_ = 0;
  double lambda_max_ = 0.0;
  bool always_on_ = true;
};

// Allocation matrix with cached row/column sums. Mutators are unchecked (the
// callers establish legality first); `apply` below is the checked entry point.
class AllocationState {
 public:
  AllocationState() = default;
  explicit AllocationState(int n)
      : w_(CountMatrix::Zero(n, n)), row_(SumVector::Zero(n)), col_(SumVector::Zero(n)) {}

  // Checks (P1)-(P3) against the instance and throws on violation.
  static AllocationState from_matrix(const Instance& inst, CountMatrix m);

  int n() const { return static_cast<int>(w_.rows()); }
  Count at(int x, int y) const { return w_(x, y); }
  std::int64_t row_sum(int x) const { return row_[x]; }
  std::int64_t col_sum(int y) const { return col_[y]; }
  const SumVector& row_sums() const { return row_; }
  const SumVector& col_sums() const { return col_; }
  std::int64_t total() const { return total_; }
  const CountMatrix& matrix() const { return w_; }

  void add_atom(int x, int y) {
    ++w_(x, y);
    ++row_[x];
    ++col_[y];
    ++total_;
  }
  void remove_atom(int x, int y) {
    --w_(x, y);
    --row_[x];
    --col_[y];
    --total_;
  }
  void move_atom(int x, int from, int to) {
    if (from == to) return;
    --w_(x, from);
    --col_[from];
    ++w_(x, to);
    ++col_[to];
  }

  friend bool operator==(const AllocationState& a, const AllocationState& b) {
    return a.w_ == b.w_;
  }

 private:
  CountMatrix w_;
  SumVector row_, col_;
  std::int64_t total_ = 0;
};

enum class MoveKind { Allocation, Distribution };

struct Move {
  MoveKind kind = MoveKind::Allocation;
  int unit = -1;
  int source = -1;  // -1 for allocations
  int target = -1;
  // A distribution with source == target is a legal self-reselection and
  // leaves the matrix unchanged.
};

// Checked application; throws std::invalid_argument (capacity overflow,
// demand overflow, empty source, non-edge target, bad indices) and leaves
// `state` untouched on error.
void apply_in_place(const Instance& inst, AllocationState& state, const Move& move);
AllocationState apply(const Instance& inst, AllocationState state, const Move& move);

bool is_complete(const Instance& inst, const AllocationState& state);

// Full sweep of (P1)-(P3) plus cached-sum consistency; throws on violation.
// Used by tests after move sequences.
void check_state(const Instance& inst, const AllocationState& state);

// On/off pattern of the units.
struct FunctionalState {
  std::vector<std::uint8_t> on;

  static FunctionalState all_on(int n) { return FunctionalState{std::vector<std::uint8_t>(n, 1)}; }
  static FunctionalState from_mask(int n, std::uint32_t mask);
  std::uint32_t mask() const;  // n <= 32 only
  int count_on() const;
  bool is_on(int x) const { return on[x] != 0; }
};

// Plain integer CSV matrix (one row per line, comma separated, LF endings).
void write_state_csv(std::ostream& os, const AllocationState& state);
CountMatrix read_state_csv(std::istream& is);

}  // namespace peerstore
