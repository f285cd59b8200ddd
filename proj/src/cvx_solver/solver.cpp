#include "nswx/cvx_solver.hpp"

#include "nswx/matching.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nswx {

namespace {

struct Vertex {
  std::vector<int> item_of_agent;
  double weight = 0.0;
};

Matrix available(const Matrix& gradient, const std::optional<SupportGraph>& mask) {
  Matrix c = gradient;
  if (!mask) return c;
  for (int i = 0; i < c.rows(); ++i) {
    for (int j = 0; j < c.cols(); ++j) {
      if (!mask->contains(i, j)) c(i, j) = kNegInf;
    }
  }
  return c;
}

[[noreturn]] void throw_unmatched(const Instance& inst) {
  std::vector<int> unmatched = assumption1_unmatched_agents(inst);
  std::ostringstream os;
  os << "no agent-saturating matching on the valuation support; unmatched agents:";
  for (int i : unmatched) os << ' ' << i;
  throw AssumptionViolated(os.str(), std::move(unmatched));
}

double inner(const Matrix& c, const std::vector<int>& items) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(items.size()); ++i) total += c(i, items[i]);
  return total;
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

Matrix assemble(const std::vector<Vertex>& active, int n, int m) {
  Matrix b = Matrix::Zero(n, m);
  for (const Vertex& vx : active) {
    for (int i = 0; i < n; ++i) b(i, vx.item_of_agent[i]) += vx.weight;
  }
  return b;
}

void add_weight(std::vector<Vertex>& active, const std::vector<int>& items, double weight) {
  for (Vertex& vx : active) {
    if (vx.item_of_agent == items) {
      vx.weight += weight;
      return;
    }
  }
  active.push_back({items, weight});
}

// Saturating matchings that greedily cover items no earlier matching used,
// averaged uniformly so every reachable item starts with positive mass.
std::vector<Vertex> covering_vertices(const Instance& inst, std::uint64_t seed) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  std::mt19937_64 rng(seed);
  const double noise_scale = 0.5 / n;
  std::vector<char> covered(m, 0);
  std::vector<Vertex> out;
  for (int pass = 0; pass < m; ++pass) {
    Matrix W(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double noise = static_cast<double>(rng() >> 11) * 0x1.0p-53 * noise_scale;
        W(i, j) = inst.v(i, j) > 0.0 ? (covered[j] ? 0.0 : 1.0) + noise : kNegInf;
      }
    }
    auto match = max_weight_row_saturating_matching(W);
    if (!match) throw_unmatched(inst);
    int fresh = 0;
    for (int j : match->column_of_row) fresh += covered[j] ? 0 : 1;
    if (fresh == 0) break;
    for (int j : match->column_of_row) covered[j] = 1;
    add_weight(out, match->column_of_row, 1.0);
  }
  for (Vertex& vx : out) vx.weight /= static_cast<double>(out.size());
  return out;
}

// Exact line search for f_cvx(b + t (s - a)) on [0, t_max]. The derivative is
// C - sum_j dmu_j log mu_j(t); sum_j dmu_j = 0 cancels the "+1" terms.
double line_search(const Instance& inst, const Vector& mu, const std::vector<int>& s, const std::vector<int>& a,
                   double t_max) {
  const int n = inst.num_agents();
  double slope = 0.0;
  std::vector<std::pair<int, double>> dmu;
  auto bump = [&](int j, double d) {
    for (auto& [k, x] : dmu) {
      if (k == j) {
        x += d;
        return;
      }
    }
    dmu.emplace_back(j, d);
  };
  for (int i = 0; i < n; ++i) {
    if (s[i] == a[i]) continue;
    slope += inst.w(i) * (std::log(inst.v(i, s[i])) - std::log(inst.v(i, a[i])));
    bump(s[i], inst.w(i));
    bump(a[i], -inst.w(i));
  }

  auto derivative = [&](double t) {
    double total = slope;
    bool up = false, down = false;
    for (const auto& [j, d] : dmu) {
      if (d == 0.0) continue;
      const double x = mu(j) + t * d;
      if (x <= 0.0) {
        (d > 0.0 ? up : down) = true;
      } else {
        total -= d * std::log(x);
      }
    }
    if (up && down) return 0.0;
    if (up) return kPosInf;
    if (down) return kNegInf;
    return total;
  };

  if (derivative(t_max) >= 0.0) return t_max;
  if (derivative(0.0) <= 0.0) return 0.0;
  double lo = 0.0, hi = t_max;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (derivative(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Active-set Newton ascent on the face {b >= 0 : b_ij = 0 off the support of
// b0}, with the saturated items held at q_j = 1. Frank-Wolfe iterates reach
// the optimal face long before the gap closes, so a few Newton steps there
// finish the job. Returns nullopt when the face degenerates.
std::optional<Matrix> polish_on_face(const Instance& inst, const Matrix& b0) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  struct Edge {
    int i, j;
    double b;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (b0(i, j) > 0.0) edges.push_back({i, j, b0(i, j)});
    }
  }
  std::vector<char> tight(m, 0);
  {
    const Vector q = b0.colwise().sum();
    for (int j = 0; j < m; ++j) tight[j] = q(j) >= 1.0 - 1e-9;
  }

  for (int step = 0; step < 200; ++step) {
    const int e_count = static_cast<int>(edges.size());
    Vector mu = Vector::Zero(m), q = Vector::Zero(m), row = Vector::Zero(n);
    for (const Edge& e : edges) {
      mu(e.j) += inst.w(e.i) * e.b;
      q(e.j) += e.b;
      row(e.i) += e.b;
    }
    std::vector<int> tight_items;
    for (int j = 0; j < m; ++j) {
      if (tight[j] && q(j) > 0.0) tight_items.push_back(j);
    }
    const int t_count = static_cast<int>(tight_items.size());
    const int dim = e_count + n + t_count;
    Matrix K = Matrix::Zero(dim, dim);
    Vector rhs(dim);
    for (int a = 0; a < e_count; ++a) {
      const Edge& e = edges[a];
      if (mu(e.j) <= 0.0) return std::nullopt;
      rhs(a) = -inst.w(e.i) * (std::log(inst.v(e.i, e.j)) - 1.0 - std::log(mu(e.j)));
      for (int c = 0; c < e_count; ++c) {
        if (edges[c].j == e.j) K(a, c) = -inst.w(e.i) * inst.w(edges[c].i) / mu(e.j);
      }
      K(a, a) -= 1e-12;
      K(a, e_count + e.i) = K(e_count + e.i, a) = 1.0;
      for (int t = 0; t < t_count; ++t) {
        if (tight_items[t] == e.j) K(a, e_count + n + t) = K(e_count + n + t, a) = 1.0;
      }
    }
    for (int i = 0; i < n; ++i) rhs(e_count + i) = 1.0 - row(i);
    for (int t = 0; t < t_count; ++t) rhs(e_count + n + t) = 1.0 - q(tight_items[t]);

    const Vector sol = K.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return std::nullopt;
    const Vector d = sol.head(e_count);

    // gradient . d is the Newton decrement. Directions in the Hessian's null
    // space with zero slope leave f unchanged, so d itself need not vanish.
    const double decrement = -rhs.head(e_count).dot(d);
    if (decrement <= 1e-14 && rhs.tail(n + t_count).lpNorm<Eigen::Infinity>() <= 1e-12) {
      // Stationary on the face; release saturated items whose price is negative.
      bool released = false;
      for (int t = 0; t < t_count; ++t) {
        if (-sol(e_count + n + t) < -1e-12) {
          tight[tight_items[t]] = 0;
          released = true;
        }
      }
      if (released) continue;
      Matrix b = Matrix::Zero(n, m);
      for (const Edge& e : edges) b(e.i, e.j) = e.b;
      return b;
    }

    Vector dq = Vector::Zero(m);
    for (int a = 0; a < e_count; ++a) dq(edges[a].j) += d(a);
    double alpha = 1.0;
    int blocking_edge = -1, blocking_item = -1;
    for (int a = 0; a < e_count; ++a) {
      if (d(a) < 0.0 && -edges[a].b / d(a) < alpha) {
        alpha = -edges[a].b / d(a);
        blocking_edge = a;
        blocking_item = -1;
      }
    }
    for (int j = 0; j < m; ++j) {
      if (!tight[j] && dq(j) > 0.0 && (1.0 - q(j)) / dq(j) < alpha) {
        alpha = std::max(0.0, (1.0 - q(j)) / dq(j));
        blocking_item = j;
        blocking_edge = -1;
      }
    }
    for (int a = 0; a < e_count; ++a) edges[a].b += alpha * d(a);
    if (blocking_item >= 0) tight[blocking_item] = 1;
    if (blocking_edge >= 0) edges[blocking_edge].b = 0.0;
    std::erase_if(edges, [](const Edge& e) { return e.b <= 0.0; });
    for (int i = 0; i < n; ++i) {
      if (std::none_of(edges.begin(), edges.end(), [i](const Edge& e) { return e.i == i; })) return std::nullopt;
    }
  }
  return std::nullopt;
}

// Polishes b on its face; when the result is not yet certified, mixes in the
// Frank-Wolfe vertex to enlarge the face and tries again. Returns the point
// and its gap once the gap is within gap_tol and f_cvx did not decrease.
std::optional<std::pair<Matrix, double>> finish_on_face(const Instance& inst, const Matrix& b, double gap_tol,
                                                        double mass_floor) {
  const double f_start = f_cvx(inst, FractionalSolution(b));
  Matrix base = b;
  for (int round = 0; round < 5; ++round) {
    auto nb = polish_on_face(inst, base);
    if (!nb) return std::nullopt;
    const Matrix c = f_cvx_gradient(inst, *nb, mass_floor);
    auto fw = max_weight_row_saturating_matching(c);
    if (!fw) return std::nullopt;
    const double gap = fw->weight - inner(c, *nb);
    const FractionalSolution candidate(*nb);
    if (gap <= gap_tol) {
      if (is_feasible(candidate) && f_cvx(inst, candidate) >= f_start) return std::pair{std::move(*nb), gap};
      return std::nullopt;
    }
    base = (1.0 - 1e-3) * *nb;
    for (int i = 0; i < inst.num_agents(); ++i) base(i, fw->column_of_row[i]) += 1e-3;
  }
  return std::nullopt;
}

}  // namespace

void SolverParams::validate() const {
  if (max_iters <= 0) throw InvalidInput("max_iters must be positive");
  if (!(gap_tol > 0.0)) throw InvalidInput("gap_tol must be positive");
  if (!(mass_floor > 0.0) || mass_floor > 1e-3) throw InvalidInput("mass_floor must lie in (0, 1e-3]");
}

FractionalSolution lmo(const Instance& inst, const Matrix& gradient, const std::optional<SupportGraph>& mask) {
  if (gradient.rows() != inst.num_agents() || gradient.cols() != inst.num_items()) {
    throw DimensionMismatch("gradient does not match the instance dimensions");
  }
  auto match = max_weight_row_saturating_matching(available(gradient, mask));
  if (!match) throw_unmatched(mask ? restrict_to(inst, *mask) : inst);
  Matrix b = Matrix::Zero(inst.num_agents(), inst.num_items());
  for (int i = 0; i < inst.num_agents(); ++i) b(i, match->column_of_row[i]) = 1.0;
  return FractionalSolution(std::move(b));
}

double frank_wolfe_gap(const Instance& inst, const FractionalSolution& s, double mass_floor) {
  const Matrix c = f_cvx_gradient(inst, s.b(), mass_floor);
  auto match = max_weight_row_saturating_matching(c);
  if (!match) throw_unmatched(inst);
  return match->weight - inner(c, s.b());
}

SolveResult solve_cvx(const Instance& inst, const std::optional<SupportGraph>& mask, const SolverParams& p) {
  p.validate();
  if (mask && (mask->num_agents() != inst.num_agents() || mask->num_items() != inst.num_items())) {
    throw DimensionMismatch("mask does not match the instance dimensions");
  }
  const Instance work = mask ? restrict_to(inst, *mask) : inst;
  if (!check_assumption1(work)) throw_unmatched(work);
  const int n = work.num_agents();
  const int m = work.num_items();

  std::vector<Vertex> active = covering_vertices(work, p.rng_seed);
  SolveResult result;
  Matrix b = assemble(active, n, m);
  std::vector<char> polished_support;
  int last_polish = 0;

  for (int iter = 0;; ++iter) {
    const Matrix c = f_cvx_gradient(work, b, p.mass_floor);
    auto fw = max_weight_row_saturating_matching(c);
    if (!fw) throw_unmatched(work);
    result.achieved_gap = fw->weight - inner(c, b);
    result.iterations = iter;
    if (result.achieved_gap <= p.gap_tol) {
      result.certified = true;
      break;
    }
    if (iter >= p.max_iters) break;

    // Every 50 iterations, try a Newton finish on the current face when the
    // face changed since the last attempt (or 1000 iterations have passed).
    if (iter > 0 && iter % 50 == 0) {
      std::vector<char> support(static_cast<std::size_t>(n) * m);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) support[static_cast<std::size_t>(i) * m + j] = b(i, j) > 0.0;
      }
      if (support != polished_support || iter - last_polish >= 1000) {
        polished_support = std::move(support);
        last_polish = iter;
        if (auto polished = finish_on_face(work, b, p.gap_tol, p.mass_floor)) {
          b = std::move(polished->first);
          result.achieved_gap = polished->second;
          result.certified = true;
          if (p.record_trace) result.trace.push_back(f_cvx(work, FractionalSolution(b)));
          break;
        }
      }
    }

    // Blended pairwise step: move weight from the worst active vertex to the
    // best active one when that beats the Frank-Wolfe vertex's gap.
    std::size_t away = 0, toward = 0;
    double away_value = kPosInf, toward_value = kNegInf;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double value = inner(c, active[k].item_of_agent);
      if (value < away_value) {
        away_value = value;
        away = k;
      }
      if (value > toward_value) {
        toward_value = value;
        toward = k;
      }
    }
    const bool local = toward != away && toward_value - away_value >= result.achieved_gap;
    const std::vector<int> s = local ? active[toward].item_of_agent : fw->column_of_row;
    const std::vector<int> a = active[away].item_of_agent;
    const double t_max = active[away].weight;
    const double t = line_search(work, weighted_item_mass(work, b), s, a, t_max);
    if (t <= 0.0) break;  // no ascent left at floating-point resolution

    if (t >= t_max) {
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(away));
    } else {
      active[away].weight -= t;
    }
    add_weight(active, s, t);
    double total = 0.0;
    for (const Vertex& vx : active) total += vx.weight;
    for (Vertex& vx : active) vx.weight /= total;
    b = assemble(active, n, m);
    if (p.record_trace) result.trace.push_back(f_cvx(work, FractionalSolution(b)));
  }

  result.solution = FractionalSolution(std::move(b));
  result.objective = f_cvx(work, result.solution);
  return result;
}

DualPrices kkt_prices(const Instance& inst, const FractionalSolution& s, double tau, double mass_floor) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  const Matrix c = f_cvx_gradient(inst, s.b(), mass_floor);

  DualPrices out;
  out.lambda = Vector::Zero(n);
  out.eta = Vector::Zero(m);
  if (auto match = max_weight_row_saturating_matching(c)) {
    out.lambda = match->row_price;
    out.eta = match->column_price.cwiseMax(0.0);
  }
  std::vector<char> saturated(m);
  for (int j = 0; j < m; ++j) {
    saturated[j] = s.q()(j) >= 1.0 - tau;
    if (!saturated[j]) out.eta(j) = 0.0;
  }

  auto on_support = [&](int i, int j) { return s(i, j) > tau && c(i, j) != kNegInf; };
  auto residual = [&](const Vector& lambda, const Vector& eta) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (on_support(i, j)) worst = std::max(worst, std::abs(c(i, j) - lambda(i) - eta(j)));
      }
    }
    return worst;
  };

  out.residual = residual(out.lambda, out.eta);
  Vector lambda = out.lambda;
  Vector eta = out.eta;
  for (int sweep = 0; sweep < 50 && out.residual > 0.0; ++sweep) {
    for (int i = 0; i < n; ++i) {
      double lo = kPosInf, hi = kNegInf;
      for (int j = 0; j < m; ++j) {
        if (!on_support(i, j)) continue;
        lo = std::min(lo, c(i, j) - eta(j));
        hi = std::max(hi, c(i, j) - eta(j));
      }
      if (lo <= hi) lambda(i) = 0.5 * (lo + hi);
    }
    for (int j = 0; j < m; ++j) {
      if (!saturated[j]) continue;
      double lo = kPosInf, hi = kNegInf;
      for (int i = 0; i < n; ++i) {
        if (!on_support(i, j)) continue;
        lo = std::min(lo, c(i, j) - lambda(i));
        hi = std::max(hi, c(i, j) - lambda(i));
      }
      if (lo <= hi) eta(j) = std::max(0.0, 0.5 * (lo + hi));
    }
    const double r = residual(lambda, eta);
    if (r >= out.residual) break;
    out.residual = r;
    out.lambda = lambda;
    out.eta = eta;
  }
  return out;
}

WeightedDualPoint construct_dual_point(const Instance& inst, const FractionalSolution& s, const DualPrices& prices,
                                       double tau) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  const Vector mu = weighted_item_mass(inst, s.b());
  WeightedDualPoint d;
  d.delta = prices.eta.cwiseMax(0.0);
  d.r.resize(m);
  for (int j = 0; j < m; ++j) d.r(j) = std::log(std::max(tau, mu(j)));
  d.gamma.resize(n);
  for (int i = 0; i < n; ++i) {
    double g = prices.lambda(i) / inst.w(i) + 1.0;
    for (int j = 0; j < m; ++j) {
      if (inst.v(i, j) > 0.0) g = std::max(g, std::log(inst.v(i, j)) - d.r(j) - d.delta(j) / inst.w(i));
    }
    d.gamma(i) = g;
  }
  return d;
}

double weighted_dual_violation(const Instance& inst, const Vector& delta, const Vector& r, const Vector& gamma) {
  if (delta.size() != inst.num_items() || r.size() != inst.num_items() || gamma.size() != inst.num_agents()) {
    throw DimensionMismatch("dual point does not match the instance dimensions");
  }
  double worst = 0.0;
  for (int j = 0; j < inst.num_items(); ++j) worst = std::max(worst, -delta(j));
  for (int i = 0; i < inst.num_agents(); ++i) {
    for (int j = 0; j < inst.num_items(); ++j) {
      if (inst.v(i, j) <= 0.0) continue;
      worst = std::max(worst, std::log(inst.v(i, j)) - r(j) - gamma(i) - delta(j) / inst.w(i));
    }
  }
  return worst;
}

double weighted_dual_value(const Instance& inst, const Vector& delta, const Vector& r, const Vector& gamma) {
  const double violation = weighted_dual_violation(inst, delta, r, gamma);
  if (violation > 1e-9) {
    std::ostringstream os;
    os << "dual point is infeasible (violation " << violation << ")";
    throw InvalidInput(os.str());
  }
  double value = 0.0;
  for (int j = 0; j < inst.num_items(); ++j) value += std::exp(r(j)) + delta(j);
  for (int i = 0; i < inst.num_agents(); ++i) value += inst.w(i) * gamma(i) + xlogx(inst.w(i)) - inst.w(i);
  return value;
}

}  // namespace nswx
