#include "nswx/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace nswx {

LemmaReport make_report(std::string lemma, double lhs, double rhs, double tolerance, Sense sense) {
  LemmaReport r;
  r.lemma = std::move(lemma);
  r.lhs = lhs;
  r.rhs = rhs;
  r.tolerance = tolerance;
  r.sense = sense;
  r.pass = sense == Sense::AtLeast ? lhs >= rhs - tolerance : std::abs(lhs - rhs) <= tolerance;
  return r;
}

OracleResult brute_force_opt(const Instance& inst, std::uint64_t cap) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  std::uint64_t total = 1;
  for (int j = 0; j < m; ++j) {
    if (total > cap / static_cast<std::uint64_t>(n)) {
      std::ostringstream os;
      os << "oracle needs " << n << "^" << m << " assignments, above the cap of " << cap;
      throw OracleCapExceeded(os.str());
    }
    total *= static_cast<std::uint64_t>(n);
  }

  OracleResult best;
  std::vector<int> owner(m, 0), best_owner(m, 0);
  std::vector<double> value(n);
  for (std::uint64_t count = 0; count < total; ++count) {
    std::fill(value.begin(), value.end(), 0.0);
    for (int j = 0; j < m; ++j) value[owner[j]] += inst.v(owner[j], j);
    double obj = 0.0;
    for (int i = 0; i < n && obj != kNegInf; ++i) {
      obj = value[i] > 0.0 ? obj + inst.w(i) * std::log(value[i]) : kNegInf;
    }
    if (count == 0 || obj > best.opt) {
      best.opt = obj;
      best_owner = owner;
    }
    for (int j = m - 1; j >= 0; --j) {
      if (++owner[j] < n) break;
      owner[j] = 0;
    }
  }
  best.evaluated = total;
  best.assignment = Assignment(inst, best_owner);
  return best;
}

double exhaustive_matching_weight(const Matrix& W) {
  const int n = static_cast<int>(W.rows());
  const int cols = static_cast<int>(W.cols());
  std::vector<char> used(cols, 0);
  double best = kNegInf;
  std::function<void(int, double)> extend = [&](int row, double acc) {
    if (row == n) {
      best = std::max(best, acc);
      return;
    }
    for (int c = 0; c < cols; ++c) {
      if (used[c] || W(row, c) == kNegInf) continue;
      used[c] = 1;
      extend(row + 1, acc + W(row, c));
      used[c] = 0;
    }
  };
  extend(0, 0.0);
  return best;
}

std::vector<double> rebalance(double alpha, const std::vector<double>& beta, double delta) {
  double sum = alpha;
  for (double x : beta) {
    if (!(x > 0.0)) throw InvalidInput("rebalance: every beta must be positive");
    sum += x;
  }
  if (!(alpha > 0.0) || std::abs(sum - 1.0) > 1e-12) {
    throw InvalidInput("rebalance: need alpha > 0 and alpha + sum(beta) = 1");
  }
  if (delta < 0.0 || delta > std::min(alpha, 1.0 - alpha) + 1e-12) {
    throw InvalidInput("rebalance: need 0 <= delta <= min(alpha, 1 - alpha)");
  }
  std::vector<double> out(beta.size(), 0.0);
  double remaining = delta;
  for (std::size_t k = 0; k < beta.size() && remaining > 0.0; ++k) {
    const double x = std::min(remaining, std::min(beta[k], 1.0 - beta[k]));
    out[k] = std::min(1.0, x / beta[k]);
    remaining -= x;
  }
  if (remaining > 1e-12) throw InvalidInput("rebalance: capacities cannot absorb delta");
  return out;
}

namespace {

// Recursive step of the subtree repair; b is modified in place.
void redistribute_in_place(Matrix& b, const RootedForest& f, int agent, double delta) {
  const int j = f.agent_parent[agent];
  if (delta <= 0.0) return;
  const double alpha = b(agent, j);

  std::vector<int> kids;
  std::vector<double> beta;
  for (int k : f.agent_children[agent]) {
    if (b(agent, k) > 0.0) {
      kids.push_back(k);
      beta.push_back(b(agent, k));
    }
  }
  const std::vector<double> grow = rebalance(alpha, beta, delta);
  b(agent, j) = alpha - delta;

  for (std::size_t x = 0; x < kids.size(); ++x) {
    const int k = kids[x];
    b(agent, k) = beta[x] * (1.0 + grow[x]);
    const double overflow = b.col(k).sum() - 1.0;
    if (overflow <= 0.0) continue;
    double left = overflow;
    for (int child : f.item_children[k]) {
      if (left <= 0.0) break;
      const double bc = b(child, k);
      const double g = std::min({left, bc, 1.0 - bc});
      if (g <= 0.0) continue;
      redistribute_in_place(b, f, child, g);
      left -= g;
    }
  }
}

}  // namespace

FractionalSolution redistribute(const Instance& inst, const FractionalSolution& s, const RootedForest& rooted,
                                int agent, double delta) {
  if (s.num_agents() != inst.num_agents() || s.num_items() != inst.num_items() ||
      rooted.num_agents() != inst.num_agents() || rooted.num_items() != inst.num_items()) {
    throw DimensionMismatch("redistribute: dimensions differ");
  }
  if (agent < 0 || agent >= inst.num_agents() || rooted.agent_parent[agent] < 0) {
    throw InvalidInput("redistribute: agent must be a non-root node of the forest");
  }
  const double bij = s(agent, rooted.agent_parent[agent]);
  if (delta < 0.0 || delta > std::min(bij, 1.0 - bij) + 1e-12) {
    throw InvalidInput("redistribute: need 0 <= delta <= min(b_ij, 1 - b_ij)");
  }
  Matrix b = s.b();
  redistribute_in_place(b, rooted, agent, std::min(delta, bij));
  return FractionalSolution(std::move(b));
}

FractionalSolution construct_pruned_solution(const Instance& inst, const FractionalSolution& s_star,
                                             const RootedForest& rooted) {
  if (s_star.num_agents() != inst.num_agents() || s_star.num_items() != inst.num_items() ||
      rooted.num_agents() != inst.num_agents() || rooted.num_items() != inst.num_items()) {
    throw DimensionMismatch("construct_pruned_solution: dimensions differ");
  }
  std::vector<int> light;
  for (int j = 0; j < inst.num_items(); ++j) {
    if (rooted.item_parent[j] >= 0 && s_star.q()(j) < 0.5 && !rooted.item_children[j].empty()) light.push_back(j);
  }
  // Descendants first: pruning an ancestor never reaches below an item that
  // is already a leaf.
  std::stable_sort(light.begin(), light.end(),
                   [&](int a, int b) { return rooted.item_depth[a] > rooted.item_depth[b]; });

  Matrix b = s_star.b();
  for (int j : light) {
    for (int child : rooted.item_children[j]) {
      const double x = b(child, j);
      if (x <= 0.0) continue;
      redistribute_in_place(b, rooted, child, x);
      b(child, j) = 0.0;
    }
  }
  return FractionalSolution(std::move(b));
}

PrunedSolutionCheck check_pruned_solution(const FractionalSolution& s_star, const RootedForest& rooted,
                                          const FractionalSolution& s_pruned) {
  PrunedSolutionCheck c;
  const int n = s_star.num_agents();
  const int m = s_star.num_items();
  c.feasible = is_feasible(s_pruned);
  c.support_subset = true;
  c.light_items_are_leaves = true;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double x = s_pruned(i, j);
      const double star = s_star(i, j);
      if (x > 0.0 && !(star > 0.0)) c.support_subset = false;
      c.max_excess_over_double = std::max(c.max_excess_over_double, x - std::min(1.0, 2.0 * star));
    }
  }
  for (int j = 0; j < m; ++j) {
    const int parent = rooted.item_parent[j];
    if (parent < 0) continue;
    if (s_star.q()(j) >= 0.5) {
      c.max_heavy_q_decrease = std::max(c.max_heavy_q_decrease, s_star.q()(j) - s_pruned.q()(j));
      continue;
    }
    if (!(s_pruned(parent, j) > 0.0)) c.light_items_are_leaves = false;
    for (int i = 0; i < n; ++i) {
      if (i != parent && s_pruned(i, j) != 0.0) c.light_items_are_leaves = false;
    }
  }
  return c;
}

LemmaReport check_after_pruning(const Instance& inst, const FractionalSolution& s_star,
                                const FractionalSolution& s_pruned, double eps) {
  return make_report("after-pruning", f_cvx(inst, s_pruned), f_cvx(inst, s_star) - std::numbers::ln2, eps);
}

double fractional_surrogate(const Instance& inst, const FractionalSolution& s,
                            const std::vector<std::vector<int>>& leaf_sets) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  if (static_cast<int>(leaf_sets.size()) != n) throw DimensionMismatch("one leaf set per agent expected");
  double total = 0.0;
  std::vector<char> in_set(m);
  for (int i = 0; i < n; ++i) {
    std::fill(in_set.begin(), in_set.end(), 0);
    double set_value = 0.0, set_mass = 0.0;
    for (int j : leaf_sets[i]) {
      in_set[j] = 1;
      set_value += inst.v(i, j);
      set_mass += s(i, j);
    }
    double row = 0.0;
    for (int j = 0; j < m; ++j) {
      if (in_set[j] || s(i, j) <= 0.0) continue;
      row += inst.v(i, j) > 0.0 ? s(i, j) * std::log(inst.v(i, j)) : kNegInf;
    }
    if (set_mass > 0.0) row += set_value > 0.0 ? set_mass * std::log(set_value) : kNegInf;
    total += inst.w(i) * row;
  }
  return total;
}

LemmaReport check_frac1(const Instance& inst, const FractionalSolution& s,
                        const std::vector<std::vector<int>>& leaf_sets, double tol) {
  const double loss = std::numbers::ln2 + 0.5 / std::numbers::e;
  return make_report("frac-1", fractional_surrogate(inst, s, leaf_sets), f_ncvx(inst, s) - loss, tol);
}

LemmaReport check_frac2(const Instance& inst, const FractionalSolution& s,
                        const std::vector<std::vector<int>>& leaf_sets, double matching_weight, double tol) {
  return make_report("frac-2", matching_weight, fractional_surrogate(inst, s, leaf_sets), tol);
}

double augmented_matching_value(const Instance& inst, const std::vector<std::vector<int>>& leaf_sets,
                                const std::vector<int>& matched_item) {
  double total = 0.0;
  for (int i = 0; i < inst.num_agents(); ++i) {
    double value = matched_item[i] >= 0 ? inst.v(i, matched_item[i]) : 0.0;
    for (int j : leaf_sets[i]) value += inst.v(i, j);
    if (value <= 0.0) return kNegInf;
    total += inst.w(i) * std::log(value);
  }
  return total;
}

LemmaReport check_fractional_matching(const Instance& inst, const FractionalSolution& s_pruned,
                                      const std::vector<std::vector<int>>& leaf_sets,
                                      const std::vector<int>& matched_item, double tol) {
  const double loss = std::numbers::ln2 + 0.5 / std::numbers::e;
  return make_report("fractional", augmented_matching_value(inst, leaf_sets, matched_item),
                     f_ncvx(inst, s_pruned) - loss, tol);
}

LemmaReport check_a_change(const Instance& inst, const FractionalSolution& s_star, const FractionalSolution& s_other,
                           double eps, double tau) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  const Vector mu_star = weighted_item_mass(inst, s_star.b());
  const Vector mu = weighted_item_mass(inst, s_other.b());
  double rhs = 0.0;
  for (int j = 0; j < m; ++j) {
    if (mu(j) <= 0.0) continue;
    rhs += mu_star(j) > 0.0 ? mu(j) * std::log(mu(j) / mu_star(j)) : kPosInf;
  }
  LemmaReport r = make_report("a-change", f_cvx(inst, s_star) - f_cvx(inst, s_other), rhs, eps, Sense::Equal);

  std::ostringstream note;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (s_other(i, j) > tau && !(s_star(i, j) > 0.0)) {
        r.hypotheses_hold = false;
        note << "edge (" << i << "," << j << ") outside the support of s*; ";
      }
    }
  }
  for (int j = 0; j < m; ++j) {
    if (s_star.q()(j) >= 1.0 - tau && std::abs(s_other.q()(j) - 1.0) > tau) {
      r.hypotheses_hold = false;
      note << "item " << j << " saturated in s* but not in s; ";
    }
  }
  r.note = note.str();
  return r;
}

LemmaReport verify_theorem1(const Instance& inst, const Assignment& a, double opt, double gap_tol) {
  const double bound = opt - 2.0 * std::numbers::ln2 - 0.5 / std::numbers::e - 2.0 * kl_to_uniform(inst.weights());
  return make_report("theorem1", nsw_log_objective(inst, a), bound, gap_tol);
}

}  // namespace nswx
