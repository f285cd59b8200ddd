#include "nswx/cvx_solver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

using namespace nswx;

namespace {

// Best sum of c(i, col(i)) over injective maps, by enumeration.
double enumerate_best(const Matrix& c) {
  const int n = static_cast<int>(c.rows());
  const int m = static_cast<int>(c.cols());
  std::vector<char> used(m, 0);
  double best = kNegInf;
  std::function<void(int, double)> go = [&](int i, double acc) {
    if (i == n) {
      best = std::max(best, acc);
      return;
    }
    for (int j = 0; j < m; ++j) {
      if (used[j] || c(i, j) == kNegInf) continue;
      used[j] = 1;
      go(i + 1, acc + c(i, j));
      used[j] = 0;
    }
  };
  go(0, 0.0);
  return best;
}

double inner(const Matrix& c, const Matrix& b) {
  double total = 0.0;
  for (int i = 0; i < b.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      if (b(i, j) > 0.0) total += c(i, j) * b(i, j);
    }
  }
  return total;
}

}  // namespace

TEST(Params, Validation) {
  SolverParams p;
  EXPECT_NO_THROW(p.validate());
  p.max_iters = 0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = {};
  p.gap_tol = 0.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = {};
  p.mass_floor = 0.1;
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(Lmo, MatchesEnumerationOnThreeByFive) {
  std::mt19937_64 rng(21);
  const Instance inst = test::random_instance(rng, 3, 5);
  for (int t = 0; t < 200; ++t) {
    Matrix c(3, 5);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 5; ++j) c(i, j) = rng() % 7 == 0 ? kNegInf : test::unit(rng) * 4.0 - 2.0;
    }
    const double best = enumerate_best(c);
    if (best == kNegInf) {
      EXPECT_THROW(lmo(inst, c, std::nullopt), AssumptionViolated);
      continue;
    }
    const FractionalSolution vertex = lmo(inst, c, std::nullopt);
    EXPECT_NEAR(inner(c, vertex.b()), best, 1e-12);
    EXPECT_TRUE(is_feasible(vertex));
  }
}

TEST(Lmo, RespectsMask) {
  const Instance inst = Instance::create(Matrix::Ones(2, 3), Vector::Ones(2));
  Matrix c(2, 3);
  c << 5, 1, 0, 5, 0, 1;
  SupportGraph mask(2, 3, 0.0);
  mask.add(0, 1);
  mask.add(1, 0);
  mask.add(1, 2);
  const FractionalSolution vertex = lmo(inst, c, mask);
  EXPECT_EQ(vertex(0, 1), 1.0);
  EXPECT_EQ(vertex(1, 0), 1.0);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int m = n + static_cast<int>(rng() % 5);
    const Instance inst = test::random_instance(rng, n, m);
    const Matrix b = 0.5 * test::random_feasible_point(rng, n, m, 1).b() + Matrix::Constant(n, m, 0.5 / m);
    const Matrix g = f_cvx_gradient(inst, b, 1e-12);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        Matrix plus = b, minus = b;
        plus(i, j) += h;
        minus(i, j) -= h;
        const double fd = (f_cvx(inst, FractionalSolution(plus)) - f_cvx(inst, FractionalSolution(minus))) / (2 * h);
        EXPECT_LE(std::abs(fd - g(i, j)), 1e-4 * std::max(1.0, std::abs(g(i, j))));
      }
    }
  }
}

TEST(Solver, SingleAgentOptimumIsLogOfTotalValue) {
  // With one agent, f_cvx(b) = sum_j b_j log(v_j / b_j), maximized at
  // b proportional to v with value log(sum v).
  Matrix v(1, 4);
  v << 1, 2, 3, 4;
  const Instance inst = Instance::create(v, Vector::Ones(1));
  const SolveResult r = solve_cvx(inst, std::nullopt, SolverParams{});
  ASSERT_TRUE(r.certified);
  EXPECT_NEAR(r.objective, std::log(10.0), 1e-6);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(r.solution(0, j), v(0, j) / 10.0, 1e-3);
}

TEST(Solver, CertifiesAndGapIsReproducible) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const int m = n + static_cast<int>(rng() % 15);
    const Instance inst = test::random_instance(rng, n, m, 0, 10);
    const SolveResult r = solve_cvx(inst, std::nullopt, SolverParams{});
    ASSERT_TRUE(r.certified);
    EXPECT_LE(r.achieved_gap, 1e-6);
    EXPECT_TRUE(is_feasible(r.solution));
    EXPECT_LE(frank_wolfe_gap(inst, r.solution, 1e-12), 1e-6);
    EXPECT_NEAR(r.objective, f_cvx(inst, r.solution), 1e-12);
  }
}

TEST(Solver, ObjectiveDoesNotDependOnSeed) {
  std::mt19937_64 rng(24);
  const Instance inst = test::random_instance(rng, 5, 12, 0, 10);
  SolverParams p;
  const double base = solve_cvx(inst, std::nullopt, p).objective;
  for (std::uint64_t seed = 1; seed < 5; ++seed) {
    p.rng_seed = seed;
    EXPECT_NEAR(solve_cvx(inst, std::nullopt, p).objective, base, 2e-6);
  }
}

TEST(Solver, TraceIsMonotone) {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 10; ++t) {
    const Instance inst = test::random_instance(rng, 4, 10, 0, 10);
    SolverParams p;
    p.record_trace = true;
    const SolveResult r = solve_cvx(inst, std::nullopt, p);
    for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_GE(r.trace[k], r.trace[k - 1] - 1e-12);
  }
}

TEST(Solver, MaskedSolveStaysOnMask) {
  std::mt19937_64 rng(26);
  const Instance inst = test::random_instance(rng, 3, 6);
  SupportGraph mask(3, 6, 0.0);
  for (int i = 0; i < 3; ++i) {
    mask.add(i, i);
    mask.add(i, i + 3);
  }
  mask.add(0, 4);
  const SolveResult r = solve_cvx(inst, mask, SolverParams{});
  ASSERT_TRUE(r.certified);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (!mask.contains(i, j)) {
        EXPECT_EQ(r.solution(i, j), 0.0);
      }
    }
  }
}

TEST(Solver, BudgetExhaustionIsReportedNotThrown) {
  std::mt19937_64 rng(27);
  const Instance inst = test::random_instance(rng, 8, 30, 0, 10);
  SolverParams p;
  p.max_iters = 1;
  const SolveResult r = solve_cvx(inst, std::nullopt, p);
  EXPECT_FALSE(r.certified);
  EXPECT_GT(r.achieved_gap, p.gap_tol);
  EXPECT_TRUE(is_feasible(r.solution));
}

TEST(Solver, ReportsUnmatchedAgents) {
  Matrix v(3, 3);
  v << 1, 0, 0, 2, 0, 0, 0, 1, 1;
  const Instance inst = Instance::create(v, Vector::Ones(3));
  try {
    solve_cvx(inst, std::nullopt, SolverParams{});
    FAIL() << "expected AssumptionViolated";
  } catch (const AssumptionViolated& e) {
    EXPECT_EQ(e.unmatched_agents().size(), 1u);
  }
}

TEST(Duality, WeakDualityOnSolvedInstances) {
  std::mt19937_64 rng(28);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const int m = n + static_cast<int>(rng() % 12);
    const Instance inst = test::random_instance(rng, n, m, 0, 10);
    const SolveResult r = solve_cvx(inst, std::nullopt, SolverParams{});
    const DualPrices prices = kkt_prices(inst, r.solution);
    EXPECT_GE(prices.eta.minCoeff(), 0.0);
    const WeightedDualPoint d = construct_dual_point(inst, r.solution, prices);
    EXPECT_LE(weighted_dual_violation(inst, d.delta, d.r, d.gamma), 1e-9);
    EXPECT_GE(weighted_dual_value(inst, d.delta, d.r, d.gamma), r.objective - 1e-6);
  }
}

TEST(Duality, InfeasibleDualPointThrows) {
  const Instance inst = Instance::create(Matrix::Constant(2, 2, 3.0), Vector::Ones(2));
  const Vector zeros = Vector::Zero(2);
  EXPECT_GT(weighted_dual_violation(inst, zeros, zeros, zeros), 1.0);
  EXPECT_THROW(weighted_dual_value(inst, zeros, zeros, zeros), InvalidInput);
  Vector negative(2);
  negative << -1.0, 0.0;
  const Vector big = Vector::Constant(2, 10.0);
  EXPECT_NEAR(weighted_dual_violation(inst, negative, big, big), 1.0, 1e-15);
}
