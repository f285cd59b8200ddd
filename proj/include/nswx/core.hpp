#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nswx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sentinel for log(0) and for objectives that are undefined on the given point.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Default threshold below which a b-entry is numerical dust (support uses b > tau).
inline constexpr double kDefaultSupportThreshold = 1e-9;

/// Tolerance for the Agent/Item constraints of the feasibility polytope.
inline constexpr double kFeasibilityTol = 1e-9;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the valuation support has no matching saturating every agent.
class AssumptionViolated : public std::runtime_error {
 public:
  AssumptionViolated(const std::string& what, std::vector<int> unmatched_agents)
      : std::runtime_error(what), unmatched_(std::move(unmatched_agents)) {}
  const std::vector<int>& unmatched_agents() const { return unmatched_; }

 private:
  std::vector<int> unmatched_;
};

/// A weighted Nash Social Welfare instance. Weights are normalized on
/// construction; the applied scale factor is kept for reporting.
class Instance {
 public:
  /// Throws InvalidInput on negative/non-finite valuations, non-positive
  /// weights, or a raw weight sum below 1e-9.
  static Instance create(Matrix valuations, Vector raw_weights);

  int num_agents() const { return static_cast<int>(valuations_.rows()); }
  int num_items() const { return static_cast<int>(valuations_.cols()); }
  const Matrix& valuations() const { return valuations_; }
  const Vector& weights() const { return weights_; }
  double v(int i, int j) const { return valuations_(i, j); }
  double w(int i) const { return weights_(i); }
  /// Sum of the raw weights before normalization.
  double raw_weight_sum() const { return raw_weight_sum_; }

 private:
  Instance(Matrix v, Vector w, double raw_sum)
      : valuations_(std::move(v)), weights_(std::move(w)), raw_weight_sum_(raw_sum) {}

  Matrix valuations_;
  Vector weights_;
  double raw_weight_sum_ = 1.0;
};

/// A point b of the feasibility polytope together with its item masses
/// q_j = sum_i b_ij. q is derived from b and cannot be set independently.
class FractionalSolution {
 public:
  FractionalSolution() = default;
  explicit FractionalSolution(Matrix b);

  const Matrix& b() const { return b_; }
  const Vector& q() const { return q_; }
  double operator()(int i, int j) const { return b_(i, j); }
  int num_agents() const { return static_cast<int>(b_.rows()); }
  int num_items() const { return static_cast<int>(b_.cols()); }

 private:
  Matrix b_;
  Vector q_;
};

/// Largest violation of the Agent (row sum = 1), Item (column sum <= 1) and
/// non-negativity constraints.
double feasibility_violation(const FractionalSolution& s);
bool is_feasible(const FractionalSolution& s, double tol = kFeasibilityTol);

/// Total item -> agent map with cached bundle values.
class Assignment {
 public:
  Assignment() = default;
  Assignment(const Instance& inst, std::vector<int> owner);

  const std::vector<int>& owner() const { return owner_; }
  const std::vector<double>& bundle_value() const { return bundle_value_; }
  int owner_of(int item) const { return owner_[static_cast<std::size_t>(item)]; }
  std::vector<int> bundle(int agent) const;

 private:
  std::vector<int> owner_;
  std::vector<double> bundle_value_;
};

/// Bipartite agent/item edge set {(i, j) : b_ij > threshold}.
class SupportGraph {
 public:
  SupportGraph() = default;
  SupportGraph(int num_agents, int num_items, double threshold);

  int num_agents() const { return n_; }
  int num_items() const { return m_; }
  double threshold() const { return threshold_; }
  bool contains(int i, int j) const { return mask_[index(i, j)] != 0; }
  void add(int i, int j);
  void remove(int i, int j);
  /// Edges in (agent, item) lexicographic order.
  std::vector<std::pair<int, int>> edges() const;
  std::size_t num_edges() const;
  bool operator==(const SupportGraph& other) const {
    return n_ == other.n_ && m_ == other.m_ && mask_ == other.mask_;
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(j);
  }
  int n_ = 0;
  int m_ = 0;
  double threshold_ = kDefaultSupportThreshold;
  std::vector<char> mask_;
};

/// x log x with the 0 log 0 = 0 convention.
double xlogx(double x);

/// Weighted log Nash welfare sum_i w_i log V_i; kNegInf if some V_i = 0.
double nsw_log_objective(const Instance& inst, const Assignment& a);

/// Concave relaxation objective:
///   sum_ij w_i b_ij log v_ij - sum_j mu_j log mu_j + sum_i w_i log w_i,
/// with mu_j = sum_i w_i b_ij. Entries with v_ij = 0 and b_ij <= tau are
/// ignored; any b_ij > tau with v_ij = 0 yields kNegInf.
double f_cvx(const Instance& inst, const FractionalSolution& s, double tau = kDefaultSupportThreshold);

/// Non-convex relaxation objective:
///   sum_ij w_i b_ij log v_ij - sum_ij w_i b_ij log q_j.
double f_ncvx(const Instance& inst, const FractionalSolution& s, double tau = kDefaultSupportThreshold);

/// Gradient of f_cvx w.r.t. b, with mu_j floored at mass_floor inside the log.
/// Entries with v_ij = 0 are set to kNegInf.
Matrix f_cvx_gradient(const Instance& inst, const Matrix& b, double mass_floor);

/// Item weighted masses mu_j = sum_i w_i b_ij.
Vector weighted_item_mass(const Instance& inst, const Matrix& b);

/// sum p log(p/q). Returns kPosInf if p_x > 0 while q_x = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Vector& p, const Vector& q);

/// KL(w || uniform) = log n - sum_i w_i log(1/w_i).
double kl_to_uniform(const Vector& w);

/// b_ij = v_ij / V_i for the owner of j, 0 elsewhere. Throws InvalidInput if
/// some bundle value is zero.
FractionalSolution embed_assignment(const Instance& inst, const Assignment& a);

struct GapIdentity {
  double gap = 0.0;          // f_cvx - f_ncvx
  double kl_w = 0.0;         // KL(w || u)
  double kl_mu_theta = 0.0;  // KL(mu || theta), theta_j = q_j / n
};

/// Evaluates both sides of f_cvx - f_ncvx = KL(w||u) - KL(mu||theta).
/// Throws InvalidInput if s is infeasible.
GapIdentity gap_identity(const Instance& inst, const FractionalSolution& s);

/// True iff {(i,j) : v_ij > 0} has a matching saturating all agents.
bool check_assumption1(const Instance& inst);

/// Agents left unmatched by a maximum matching of the valuation support.
std::vector<int> assumption1_unmatched_agents(const Instance& inst);

SupportGraph support_graph(const FractionalSolution& s, double tau = kDefaultSupportThreshold);

/// Copy of inst with v_ij := 0 for every (i, j) outside mask.
Instance restrict_to(const Instance& inst, const SupportGraph& mask);

/// Checks sum(y) log sum(z) - sum(y) log sum(y) >= sum y_j log z_j - sum y_j log y_j
/// within 1e-12 (absolute, scaled by the magnitude of the terms).
bool claim_val_inequality(std::span<const double> y, std::span<const double> z);

}  // namespace nswx
