#pragma once

#include "nswx/core.hpp"
#include "nswx/cvx_solver.hpp"

#include <vector>

namespace nswx {

/// Support forest with every tree rooted at its lowest-index agent.
struct RootedForest {
  SupportGraph graph;
  std::vector<int> agent_parent;  // parent item, -1 for roots
  std::vector<int> item_parent;   // parent agent, -1 for isolated items
  std::vector<std::vector<int>> agent_children;  // child items, ascending
  std::vector<std::vector<int>> item_children;   // child agents, ascending
  std::vector<int> agent_depth;
  std::vector<int> item_depth;  // -1 for isolated items
  std::vector<int> roots;
  std::vector<int> isolated_items;  // items with no edge

  int num_agents() const { return static_cast<int>(agent_parent.size()); }
  int num_items() const { return static_cast<int>(item_parent.size()); }
};

struct PrunedForest {
  RootedForest rooted;  // F*
  SupportGraph pruned;  // F~: F* minus the edges below light items
  std::vector<char> light;  // q*_j < 1/2, for items with an edge
  std::vector<std::vector<int>> leaf_bundles;  // L*_i, ascending
  std::vector<int> nonleaf_items;  // items that keep a child in F~
};

bool is_forest(const SupportGraph& sg);

/// Moves mass around alternating cycles of {b > tau} until that graph is a
/// forest. Column sums are unchanged up to rounding and f_ncvx never
/// decreases (q is held fixed, so f_ncvx is linear along each cycle).
/// Entries at or below tau are left untouched.
FractionalSolution cancel_cycles(const Instance& inst, const FractionalSolution& s, double tau);

/// Throws InvalidInput if sg has a cycle.
RootedForest root_forest(const SupportGraph& sg);

/// Removes the edges from every item with q*_j < 1/2 to its children.
/// Purely structural; s_star supplies q*.
PrunedForest prune(const Instance& inst, const FractionalSolution& s_star, const RootedForest& rooted);

struct MatchingOutcome {
  Assignment assignment;
  double matching_weight = kNegInf;  // augmented weight of the chosen matching
  std::vector<int> matched_item;     // per agent; -1 if matched to its leaf bundle
  std::vector<int> leftover_items;   // assigned greedily after the matching
};

/// Agents x (nonleaf items, then one bundle node per agent). Entry (i, c)
/// for nonleaf item j is w_i log(v_ij + V(L*_i)) on edges of F~; bundle
/// entry (i, i) is w_i log V(L*_i) when positive; everything else kNegInf.
Matrix augmented_weight_matrix(const Instance& inst, const PrunedForest& pf);

/// Augmented-weight matching of agents into nonleaf items plus one bundle
/// node per agent, followed by the greedy leftover rule. Throws
/// AssumptionViolated if no finite-weight agent-saturating matching exists.
MatchingOutcome round_matching(const Instance& inst, const PrunedForest& pf);

/// Hands each unassigned item (owner -1), in index order, to an agent with
/// V_i = 0 and v_ij > 0 if any, else to the agent maximizing
/// w_i (log(V_i + v_ij) - log V_i); ties go to the lowest index.
void assign_leftovers(const Instance& inst, std::vector<int>& owner, std::vector<int>& leftovers);

struct GuaranteeReport {
  double kl_w = 0.0;
  double f_cvx_relaxed = kNegInf;  // f_cvx of the unrestricted solve
  double achieved_gap = kPosInf;   // its certified Frank-Wolfe gap
  double opt_upper_bound = kPosInf;  // f_cvx_relaxed + achieved_gap
  double dual_bound = kPosInf;     // weighted dual value from the KKT prices
  double f_ncvx_relaxed = kNegInf;
  double f_ncvx_forest = kNegInf;
  double f_cvx_star = kNegInf;     // restricted re-solve on the forest support
  double restricted_gap = kPosInf;
  double nsw = kNegInf;
  double matching_weight = kNegInf;
  double theorem1_bound = kNegInf;   // opt_upper_bound - 2 log 2 - 1/(2e) - 2 KL
  double theorem1_slack = kNegInf;   // nsw - theorem1_bound
  double acyclic_bound = kNegInf;    // f_cvx_star - KL - 2 log 2 - 1/(2e)
  double acyclic_slack = kNegInf;    // nsw - acyclic_bound
  int iterations = 0;
  int restricted_iterations = 0;
  int num_leftover_items = 0;
  bool certified = false;  // both solves reached gap_tol
};

/// Everything the pipeline produced, for reporting and lemma checks.
struct RoundingResult {
  Assignment assignment;
  GuaranteeReport report;
  FractionalSolution relaxed;   // unrestricted optimum (solve_nsw only)
  FractionalSolution s_forest;  // acyclic input to the rounding step
  FractionalSolution s_star;
  PrunedForest forest;
  MatchingOutcome matching;
};

/// 2 log 2 + 1/(2e).
double rounding_loss_constant();

/// Rounds an acyclic feasible point: restricted re-solve, root, prune,
/// match. Fills the acyclic part of the report.
RoundingResult round_acyclic(const Instance& inst, const FractionalSolution& s_forest, const SolverParams& p);

/// Full pipeline: solve, cancel cycles, round. Throws AssumptionViolated
/// naming the unmatched agents.
RoundingResult solve_nsw(const Instance& inst, const SolverParams& p);

}  // namespace nswx
