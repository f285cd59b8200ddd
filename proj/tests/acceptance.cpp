// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "nswx/analysis.hpp"
#include "nswx/cli.hpp"
#include "nswx/cvx_solver.hpp"
#include "nswx/rounding.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

using namespace nswx;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

SolverParams default_params() { return SolverParams{}; }

struct Solved {
  Instance inst;
  RoundingResult result;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, double x) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

// Desk-scale set: n in {2,3,4}, n <= m <= 8, integer values 0..10.
std::vector<Instance> desk_instances() {
  std::vector<Instance> out;
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 3;
    const int m = n + (k / 3) % (9 - n);
    out.push_back(cli::gen_instance("uniform", n, m, 1000 + k).to_instance());
  }
  return out;
}

// Pruning set: alternates thin shared pools with generic instances.
std::vector<Instance> pruning_instances() {
  std::vector<Instance> out;
  for (int k = 0; k < 50; ++k) {
    const int n = 3 + k % 4;
    const int m = 2 * n + k % 5;
    const char* kind = k % 2 == 0 ? "adversarial-light" : "uniform";
    out.push_back(cli::gen_instance(kind, n, m, 5000 + k).to_instance());
  }
  return out;
}

Outcome criterion1(const std::vector<Instance>& desk, const std::vector<Solved>& solved, const std::vector<double>& opt,
                   double elapsed) {
  Outcome o;
  int passed = 0;
  double worst = kPosInf;
  for (std::size_t k = 0; k < desk.size(); ++k) {
    const Instance& inst = desk[k];
    const double bound = opt[k] - rounding_loss_constant() - 2.0 * kl_to_uniform(inst.weights()) - 1e-4;
    const double slack = solved[k].result.report.nsw - bound;
    worst = std::min(worst, slack);
    if (slack >= 0.0) ++passed;
  }
  o.pass = passed == static_cast<int>(desk.size()) && elapsed < 60.0;
  o.detail = std::to_string(passed) + "/" + std::to_string(desk.size()) + " within bound, min slack " +
             fmt("%.4g", worst) + ", " + fmt("%.2f", elapsed) + " s";
  return o;
}

Outcome criterion2(const std::vector<Solved>& solved, const std::vector<double>& opt) {
  Outcome o;
  double worst = kPosInf;
  for (std::size_t k = 0; k < solved.size(); ++k) {
    worst = std::min(worst, solved[k].result.report.opt_upper_bound - opt[k]);
  }
  o.pass = worst >= -1e-9;
  o.detail = "min f_cvx + gap - OPT = " + fmt("%.3g", worst);
  return o;
}

Outcome criterion3() {
  std::mt19937_64 rng(3);
  double worst_identity = 0.0, worst_low = 0.0, worst_high = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int m = n + static_cast<int>(rng() % 6);
    const Instance inst = test::random_instance(rng, n, m);
    const FractionalSolution s = test::random_feasible_point(rng, n, m, 1 + static_cast<int>(rng() % 4));
    const GapIdentity g = gap_identity(inst, s);
    const double direct = f_cvx(inst, s) - f_ncvx(inst, s);
    worst_identity = std::max(worst_identity, std::abs(direct - (g.kl_w - g.kl_mu_theta)));
    worst_low = std::max(worst_low, -direct);
    worst_high = std::max(worst_high, direct - g.kl_w);
  }
  Outcome o;
  // f_cvx - f_ncvx is a difference of O(1) sums, so "gap >= 0" is checked at
  // rounding resolution.
  o.pass = worst_identity <= 1e-9 && worst_low <= 1e-12 && worst_high <= 1e-9;
  o.detail = "1000 points, max identity error " + fmt("%.3g", worst_identity) + ", max below 0 " +
             fmt("%.3g", worst_low) + ", max above KL " + fmt("%.3g", worst_high);
  return o;
}

Outcome criterion4() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int m = n + static_cast<int>(rng() % 6);
    const Instance inst = test::random_instance(rng, n, m, 1, 10, true);
    const FractionalSolution s = test::random_feasible_point(rng, n, m, 1 + static_cast<int>(rng() % 4));
    worst = std::max(worst, std::abs(f_cvx(inst, s) - f_ncvx(inst, s)));
  }
  Outcome o;
  o.pass = worst <= 1e-12;
  o.detail = "100 points, max |f_cvx - f_ncvx| = " + fmt("%.3g", worst);
  return o;
}

Outcome criterion5() {
  std::mt19937_64 rng(5);
  int forests = 0;
  double worst_q = 0.0, worst_drop = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int m = n + static_cast<int>(rng() % 7);
    const Instance inst = test::random_instance(rng, n, m);
    const FractionalSolution s = test::random_feasible_point(rng, n, m, 2 + static_cast<int>(rng() % 4));
    const FractionalSolution out = cancel_cycles(inst, s, 0.0);
    if (is_forest(support_graph(out, 0.0))) ++forests;
    worst_q = std::max(worst_q, (out.q() - s.q()).cwiseAbs().maxCoeff());
    worst_drop = std::max(worst_drop, f_ncvx(inst, s) - f_ncvx(inst, out));
  }
  Outcome o;
  o.pass = forests == 200 && worst_q <= 1e-12 && worst_drop <= 1e-9;
  o.detail = std::to_string(forests) + "/200 forests, max q change " + fmt("%.3g", worst_q) + ", max f_ncvx drop " +
             fmt("%.3g", worst_drop);
  return o;
}

Outcome criterion6(const std::vector<Solved>& pruning) {
  int structural = 0, exercised = 0;
  double worst_q = 0.0, worst_excess = 0.0, worst_drop = kNegInf;
  for (const Solved& sv : pruning) {
    const RoundingResult& r = sv.result;
    const RootedForest& rooted = r.forest.rooted;
    for (int j = 0; j < rooted.num_items(); ++j) {
      if (r.forest.light[j] && !rooted.item_children[j].empty()) {
        ++exercised;
        break;
      }
    }
    const FractionalSolution pruned = construct_pruned_solution(sv.inst, r.s_star, rooted);
    const PrunedSolutionCheck c = check_pruned_solution(r.s_star, rooted, pruned);
    if (c.feasible && c.support_subset && c.light_items_are_leaves) ++structural;
    worst_q = std::max(worst_q, c.max_heavy_q_decrease);
    worst_excess = std::max(worst_excess, c.max_excess_over_double);
    worst_drop = std::max(worst_drop, f_cvx(sv.inst, r.s_star) - f_cvx(sv.inst, pruned));
  }
  const double gap_tol = default_params().gap_tol;
  Outcome o;
  o.pass = structural == static_cast<int>(pruning.size()) && worst_q <= 1e-12 && worst_excess <= 1e-12 &&
           worst_drop <= std::numbers::ln2 + 10.0 * gap_tol;
  o.detail = std::to_string(structural) + "/" + std::to_string(pruning.size()) + " structural (" +
             std::to_string(exercised) + " with light items that had children), max q decrease " +
             fmt("%.3g", worst_q) + ", max excess " + fmt("%.3g", worst_excess) + ", max f_cvx drop " +
             fmt("%.6f", worst_drop);
  return o;
}

Outcome criterion7(const std::vector<Solved>& pruning) {
  const double gap_tol = default_params().gap_tol;
  double worst = kPosInf;
  int small = 0, agree = 0;
  for (const Solved& sv : pruning) {
    const RoundingResult& r = sv.result;
    const FractionalSolution pruned = construct_pruned_solution(sv.inst, r.s_star, r.forest.rooted);
    const double bound = f_ncvx(sv.inst, pruned) - std::numbers::ln2 - 0.5 / std::numbers::e - 10.0 * gap_tol;
    worst = std::min(worst, r.matching.matching_weight - bound);
    if (r.forest.nonleaf_items.size() <= 8) {
      ++small;
      const double exact = exhaustive_matching_weight(augmented_weight_matrix(sv.inst, r.forest));
      const double scale = std::max(1.0, std::abs(exact));
      if (std::abs(exact - r.matching.matching_weight) <= 1e-12 * scale) ++agree;
    }
  }
  Outcome o;
  o.pass = worst >= 0.0 && agree == small && small > 0;
  o.detail = "min slack " + fmt("%.4g", worst) + ", matcher equals enumeration on " + std::to_string(agree) + "/" +
             std::to_string(small) + " small instances";
  return o;
}

Outcome criterion8(const std::vector<const Solved*>& all, double large_elapsed, int large_count) {
  const SolverParams p = default_params();
  int certified = 0, max_iters = 0;
  double worst_gap = 0.0;
  for (const Solved* sv : all) {
    const GuaranteeReport& g = sv->result.report;
    if (g.certified && g.achieved_gap <= 1e-6 && g.restricted_gap <= 1e-6) ++certified;
    worst_gap = std::max({worst_gap, g.achieved_gap, g.restricted_gap});
    max_iters = std::max({max_iters, g.iterations, g.restricted_iterations});
  }

  std::mt19937_64 rng(8);
  double worst_rel = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int m = n + static_cast<int>(rng() % 6);
    const Instance inst = test::random_instance(rng, n, m);
    const FractionalSolution vertex = test::random_feasible_point(rng, n, m, 1);
    const Matrix b = 0.5 * vertex.b() + Matrix::Constant(n, m, 0.5 / m);
    const Matrix g = f_cvx_gradient(inst, b, p.mass_floor);
    Matrix fd(n, m);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        Matrix plus = b, minus = b;
        plus(i, j) += h;
        minus(i, j) -= h;
        fd(i, j) = (f_cvx(inst, FractionalSolution(plus)) - f_cvx(inst, FractionalSolution(minus))) / (2.0 * h);
      }
    }
    worst_rel = std::max(worst_rel, (g - fd).norm() / g.norm());
  }

  Outcome o;
  o.pass = certified == static_cast<int>(all.size()) && max_iters <= p.max_iters && worst_rel <= 1e-4;
  o.detail = std::to_string(certified) + "/" + std::to_string(all.size()) + " solves certified (" +
             std::to_string(large_count) + " at 10x40 in " + fmt("%.1f", large_elapsed) + " s), max gap " +
             fmt("%.3g", worst_gap) + ", max iterations " + std::to_string(max_iters) +
             ", max gradient relative error " + fmt("%.3g", worst_rel);
  return o;
}

Outcome criterion9(const std::vector<const Solved*>& all) {
  int ok = 0;
  double worst_violation = 0.0, worst_slack = kPosInf;
  for (const Solved* sv : all) {
    const FractionalSolution& s = sv->result.relaxed;
    const WeightedDualPoint d = construct_dual_point(sv->inst, s, kkt_prices(sv->inst, s));
    const double violation = weighted_dual_violation(sv->inst, d.delta, d.r, d.gamma);
    worst_violation = std::max(worst_violation, violation);
    if (violation > 1e-9) continue;
    const double slack = weighted_dual_value(sv->inst, d.delta, d.r, d.gamma) - f_cvx(sv->inst, s);
    worst_slack = std::min(worst_slack, slack);
    if (slack >= -1e-6) ++ok;
  }
  Outcome o;
  o.pass = ok == static_cast<int>(all.size());
  o.detail = std::to_string(ok) + "/" + std::to_string(all.size()) + " dual points, max violation " +
             fmt("%.3g", worst_violation) + ", min value - f_cvx " + fmt("%.3g", worst_slack);
  return o;
}

Outcome criterion10() {
  const double factor = std::exp(rounding_loss_constant());
  Outcome o;
  o.pass = factor >= 4.80 && factor <= 4.82;
  o.detail = "e^(2 log 2 + 1/(2e)) = " + fmt("%.6f", factor);
  return o;
}

}  // namespace

int main() {
  const SolverParams p = default_params();

  const auto t_desk = std::chrono::steady_clock::now();
  const std::vector<Instance> desk = desk_instances();
  std::vector<Solved> desk_solved;
  std::vector<double> opt;
  for (const Instance& inst : desk) {
    desk_solved.push_back({inst, solve_nsw(inst, p)});
    opt.push_back(brute_force_opt(inst).opt);
  }
  const double desk_elapsed = seconds_since(t_desk);

  std::vector<Solved> pruning;
  for (const Instance& inst : pruning_instances()) pruning.push_back({inst, solve_nsw(inst, p)});

  const auto t_large = std::chrono::steady_clock::now();
  std::vector<Solved> large;
  for (int k = 0; k < 20; ++k) {
    const Instance inst = cli::gen_instance(k % 2 == 0 ? "uniform" : "adversarial-light", 10, 40, 9000 + k).to_instance();
    large.push_back({inst, solve_nsw(inst, p)});
  }
  const double large_elapsed = seconds_since(t_large);

  std::vector<const Solved*> all;
  for (const auto* set : {&desk_solved, &pruning, &large}) {
    for (const Solved& s : *set) all.push_back(&s);
  }

  const std::vector<Outcome> outcomes = {
      criterion1(desk, desk_solved, opt, desk_elapsed),
      criterion2(desk_solved, opt),
      criterion3(),
      criterion4(),
      criterion5(),
      criterion6(pruning),
      criterion7(pruning),
      criterion8(all, large_elapsed, static_cast<int>(large.size())),
      criterion9(all),
      criterion10(),
  };
  bool all_pass = true;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    std::printf("criterion %zu: %s: %s\n", k + 1, outcomes[k].pass ? "PASS" : "FAIL", outcomes[k].detail.c_str());
    all_pass = all_pass && outcomes[k].pass;
  }
  return all_pass ? 0 : 1;
}
