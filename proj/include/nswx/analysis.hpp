#pragma once

#include "nswx/core.hpp"
#include "nswx/rounding.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nswx {

enum class Sense { AtLeast, Equal };

/// One checked inequality. AtLeast passes iff lhs >= rhs - tolerance;
/// Equal passes iff |lhs - rhs| <= tolerance.
struct LemmaReport {
  std::string lemma;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  Sense sense = Sense::AtLeast;
  bool hypotheses_hold = true;
  bool pass = false;
  std::string note;
};

LemmaReport make_report(std::string lemma, double lhs, double rhs, double tolerance, Sense sense = Sense::AtLeast);

class OracleCapExceeded : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct OracleResult {
  Assignment assignment;
  double opt = kNegInf;
  std::uint64_t evaluated = 0;
};

inline constexpr std::uint64_t kDefaultOracleCap = 20'000'000;

/// Exhaustive maximum of nsw_log_objective over all n^m assignments. Among
/// ties the lexicographically smallest owner vector wins. Throws
/// OracleCapExceeded when n^m > cap.
OracleResult brute_force_opt(const Instance& inst, std::uint64_t cap = kDefaultOracleCap);

/// Maximum of sum_i W(i, col(i)) over injective row -> column maps avoiding
/// kNegInf entries; kNegInf if none exists. Exponential; test oracle only.
double exhaustive_matching_weight(const Matrix& W);

/// Greedy waterfill: delta_k in [0, 1] with beta_k (1 + delta_k) <= 1 and
/// sum_k beta_k delta_k = delta, filling capacity min(beta_k, 1 - beta_k) in
/// ascending k. Throws InvalidInput on violated preconditions.
std::vector<double> rebalance(double alpha, const std::vector<double>& beta, double delta);

/// Lowers b_ij by delta for the non-root agent i with parent item j and
/// repairs feasibility inside the subtree of i. Throws InvalidInput unless
/// 0 <= delta <= min(b_ij, 1 - b_ij).
FractionalSolution redistribute(const Instance& inst, const FractionalSolution& s, const RootedForest& rooted,
                                int agent, double delta);

/// Cuts every light item (q*_j < 1/2) from its children, deepest items
/// first, redistributing each child's mass inside its own subtree.
FractionalSolution construct_pruned_solution(const Instance& inst, const FractionalSolution& s_star,
                                             const RootedForest& rooted);

struct PrunedSolutionCheck {
  bool feasible = false;
  bool support_subset = false;
  bool light_items_are_leaves = false;  // and still attached to their F-parent
  double max_heavy_q_decrease = 0.0;    // max over q*_j >= 1/2 of q*_j - q_j
  double max_excess_over_double = 0.0;  // max of b - min(1, 2 b*)
  bool pass(double tol = 1e-12) const {
    return feasible && support_subset && light_items_are_leaves && max_heavy_q_decrease <= tol &&
           max_excess_over_double <= tol;
  }
};

PrunedSolutionCheck check_pruned_solution(const FractionalSolution& s_star, const RootedForest& rooted,
                                          const FractionalSolution& s_pruned);

/// f_cvx(s_pruned) >= f_cvx(s_star) - log 2, within eps.
LemmaReport check_after_pruning(const Instance& inst, const FractionalSolution& s_star,
                                const FractionalSolution& s_pruned, double eps);

/// Linear surrogate sum_i w_i (sum_{j not in S(i)} b_ij log v_ij + sum_{j in S(i)} b_ij log V(S(i))).
double fractional_surrogate(const Instance& inst, const FractionalSolution& s,
                            const std::vector<std::vector<int>>& leaf_sets);

/// surrogate >= f_ncvx(s) - log 2 - 1/(2e).
LemmaReport check_frac1(const Instance& inst, const FractionalSolution& s,
                        const std::vector<std::vector<int>>& leaf_sets, double tol);

/// matching weight >= surrogate.
LemmaReport check_frac2(const Instance& inst, const FractionalSolution& s,
                        const std::vector<std::vector<int>>& leaf_sets, double matching_weight, double tol);

/// sum_i w_i log(v_{i M(i)} + V(S(i))), with v_{i M(i)} = 0 when matched_item[i] < 0.
double augmented_matching_value(const Instance& inst, const std::vector<std::vector<int>>& leaf_sets,
                                const std::vector<int>& matched_item);

/// augmented_matching_value >= f_ncvx(s_pruned) - log 2 - 1/(2e).
LemmaReport check_fractional_matching(const Instance& inst, const FractionalSolution& s_pruned,
                                      const std::vector<std::vector<int>>& leaf_sets,
                                      const std::vector<int>& matched_item, double tol);

/// f_cvx(s*) - f_cvx(s) = sum_j mu_j log(mu_j / mu*_j), within eps. The
/// hypotheses (support inclusion, saturated items stay saturated within tau)
/// are checked and reported, not enforced.
LemmaReport check_a_change(const Instance& inst, const FractionalSolution& s_star, const FractionalSolution& s_other,
                           double eps, double tau = kDefaultSupportThreshold);

/// NSW(sigma) >= opt - 2 log 2 - 1/(2e) - 2 KL(w || u), within gap_tol.
LemmaReport verify_theorem1(const Instance& inst, const Assignment& a, double opt, double gap_tol);

}  // namespace nswx
