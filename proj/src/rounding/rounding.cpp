#include "nswx/rounding.hpp"

#include "nswx/matching.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nswx {

double rounding_loss_constant() { return 2.0 * std::numbers::ln2 + 0.5 / std::numbers::e; }

void assign_leftovers(const Instance& inst, std::vector<int>& owner, std::vector<int>& leftovers) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  std::vector<double> value(n, 0.0);
  for (int j = 0; j < m; ++j) {
    if (owner[j] >= 0) value[owner[j]] += inst.v(owner[j], j);
  }
  for (int j = 0; j < m; ++j) {
    if (owner[j] >= 0) continue;
    leftovers.push_back(j);
    int pick = -1;
    for (int i = 0; i < n && pick < 0; ++i) {
      if (value[i] <= 0.0 && inst.v(i, j) > 0.0) pick = i;
    }
    if (pick < 0) {
      double best = kNegInf;
      for (int i = 0; i < n; ++i) {
        const double gain =
            value[i] > 0.0 ? inst.w(i) * (std::log(value[i] + inst.v(i, j)) - std::log(value[i])) : 0.0;
        if (gain > best) {
          best = gain;
          pick = i;
        }
      }
    }
    owner[j] = pick;
    value[pick] += inst.v(pick, j);
  }
}

Matrix augmented_weight_matrix(const Instance& inst, const PrunedForest& pf) {
  const int n = inst.num_agents();
  const int k = static_cast<int>(pf.nonleaf_items.size());
  Matrix W = Matrix::Constant(n, k + n, kNegInf);
  for (int i = 0; i < n; ++i) {
    double bundle_value = 0.0;
    for (int j : pf.leaf_bundles[i]) bundle_value += inst.v(i, j);
    for (int c = 0; c < k; ++c) {
      const int j = pf.nonleaf_items[c];
      const double total = inst.v(i, j) + bundle_value;
      if (pf.pruned.contains(i, j) && total > 0.0) W(i, c) = inst.w(i) * std::log(total);
    }
    if (bundle_value > 0.0) W(i, k + i) = inst.w(i) * std::log(bundle_value);
  }
  return W;
}

MatchingOutcome round_matching(const Instance& inst, const PrunedForest& pf) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  const int k = static_cast<int>(pf.nonleaf_items.size());
  const Matrix W = augmented_weight_matrix(inst, pf);
  auto match = max_weight_row_saturating_matching(W);
  if (!match) {
    std::vector<int> unmatched;
    std::vector<char> allowed(static_cast<std::size_t>(n) * (k + n));
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k + n; ++c) allowed[static_cast<std::size_t>(i) * (k + n) + c] = W(i, c) != kNegInf;
    }
    const auto partial = max_cardinality_matching(n, k + n, allowed);
    std::ostringstream os;
    os << "pruned forest admits no finite-weight agent-saturating matching; unmatched agents:";
    for (int i = 0; i < n; ++i) {
      if (partial[i] < 0) {
        unmatched.push_back(i);
        os << ' ' << i;
      }
    }
    throw AssumptionViolated(os.str(), std::move(unmatched));
  }

  MatchingOutcome out;
  out.matching_weight = match->weight;
  out.matched_item.assign(n, -1);
  std::vector<int> owner(m, -1);
  for (int i = 0; i < n; ++i) {
    for (int j : pf.leaf_bundles[i]) owner[j] = i;
    const int c = match->column_of_row[i];
    if (c < k) {
      out.matched_item[i] = pf.nonleaf_items[c];
      owner[pf.nonleaf_items[c]] = i;
    }
  }
  assign_leftovers(inst, owner, out.leftover_items);
  out.assignment = Assignment(inst, std::move(owner));
  return out;
}

RoundingResult round_acyclic(const Instance& inst, const FractionalSolution& s_forest, const SolverParams& p) {
  const SupportGraph mask = support_graph(s_forest, 0.0);
  if (!is_forest(mask)) throw InvalidInput("round_acyclic needs an acyclic solution");
  const SolveResult restricted = solve_cvx(inst, mask, p);

  RoundingResult out;
  out.s_forest = s_forest;
  out.s_star = cancel_cycles(inst, restricted.solution, 0.0);
  out.forest = prune(inst, out.s_star, root_forest(support_graph(out.s_star, 0.0)));
  out.matching = round_matching(inst, out.forest);
  out.assignment = out.matching.assignment;

  GuaranteeReport& r = out.report;
  r.kl_w = kl_to_uniform(inst.weights());
  r.f_ncvx_forest = f_ncvx(inst, s_forest);
  r.f_cvx_star = f_cvx(inst, out.s_star);
  r.restricted_gap = restricted.achieved_gap;
  r.restricted_iterations = restricted.iterations;
  r.nsw = nsw_log_objective(inst, out.assignment);
  r.matching_weight = out.matching.matching_weight;
  r.num_leftover_items = static_cast<int>(out.matching.leftover_items.size());
  r.acyclic_bound = r.f_cvx_star - r.kl_w - rounding_loss_constant();
  r.acyclic_slack = r.nsw - r.acyclic_bound;
  r.certified = restricted.certified;
  return out;
}

RoundingResult solve_nsw(const Instance& inst, const SolverParams& p) {
  const SolveResult relaxed = solve_cvx(inst, std::nullopt, p);
  const FractionalSolution s_forest = cancel_cycles(inst, relaxed.solution, 0.0);

  RoundingResult out = round_acyclic(inst, s_forest, p);
  out.relaxed = relaxed.solution;
  GuaranteeReport& r = out.report;
  r.f_cvx_relaxed = relaxed.objective;
  r.achieved_gap = relaxed.achieved_gap;
  r.opt_upper_bound = relaxed.objective + relaxed.achieved_gap;
  r.f_ncvx_relaxed = f_ncvx(inst, relaxed.solution);
  r.iterations = relaxed.iterations;
  r.certified = r.certified && relaxed.certified;
  const DualPrices prices = kkt_prices(inst, relaxed.solution, kDefaultSupportThreshold, p.mass_floor);
  const WeightedDualPoint dual = construct_dual_point(inst, relaxed.solution, prices);
  r.dual_bound = weighted_dual_value(inst, dual.delta, dual.r, dual.gamma);
  r.theorem1_bound = r.opt_upper_bound - rounding_loss_constant() - 2.0 * r.kl_w;
  r.theorem1_slack = r.nsw - r.theorem1_bound;
  return out;
}

}  // namespace nswx
