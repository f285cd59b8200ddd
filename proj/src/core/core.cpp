#include "nswx/core.hpp"

#include "nswx/matching.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nswx {

namespace {

void require_same_shape(const Instance& inst, const FractionalSolution& s) {
  if (s.num_agents() != inst.num_agents() || s.num_items() != inst.num_items()) {
    std::ostringstream os;
    os << "solution is " << s.num_agents() << "x" << s.num_items() << " but instance is "
       << inst.num_agents() << "x" << inst.num_items();
    throw DimensionMismatch(os.str());
  }
}

}  // namespace

Instance Instance::create(Matrix valuations, Vector raw_weights) {
  if (valuations.rows() < 1 || valuations.cols() < 1) {
    throw InvalidInput("instance needs at least one agent and one item");
  }
  if (raw_weights.size() != valuations.rows()) {
    throw DimensionMismatch("weight vector length differs from the number of agents");
  }
  for (Eigen::Index i = 0; i < valuations.rows(); ++i) {
    for (Eigen::Index j = 0; j < valuations.cols(); ++j) {
      const double x = valuations(i, j);
      if (!std::isfinite(x) || x < 0.0) {
        std::ostringstream os;
        os << "valuation v[" << i << "][" << j << "] = " << x << " is not a finite non-negative number";
        throw InvalidInput(os.str());
      }
    }
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < raw_weights.size(); ++i) {
    const double x = raw_weights(i);
    if (!std::isfinite(x) || x <= 0.0) {
      std::ostringstream os;
      os << "weight of agent " << i << " is " << x << "; weights must be finite and strictly positive";
      throw InvalidInput(os.str());
    }
    sum += x;
  }
  if (sum < 1e-9) throw InvalidInput("weights sum to less than 1e-9 and cannot be normalized");
  Vector w = raw_weights / sum;
  return Instance(std::move(valuations), std::move(w), sum);
}

FractionalSolution::FractionalSolution(Matrix b) : b_(std::move(b)) {
  q_ = b_.colwise().sum().transpose();
}

double feasibility_violation(const FractionalSolution& s) {
  double worst = 0.0;
  if (s.b().size() > 0) worst = std::max(worst, -s.b().minCoeff());
  for (int i = 0; i < s.num_agents(); ++i) {
    worst = std::max(worst, std::abs(s.b().row(i).sum() - 1.0));
  }
  for (int j = 0; j < s.num_items(); ++j) worst = std::max(worst, s.q()(j) - 1.0);
  return worst;
}

bool is_feasible(const FractionalSolution& s, double tol) { return feasibility_violation(s) <= tol; }

Assignment::Assignment(const Instance& inst, std::vector<int> owner) : owner_(std::move(owner)) {
  if (static_cast<int>(owner_.size()) != inst.num_items()) {
    throw DimensionMismatch("assignment must name an owner for every item");
  }
  bundle_value_.assign(inst.num_agents(), 0.0);
  for (int j = 0; j < inst.num_items(); ++j) {
    const int i = owner_[j];
    if (i < 0 || i >= inst.num_agents()) {
      std::ostringstream os;
      os << "item " << j << " is owned by unknown agent " << i;
      throw InvalidInput(os.str());
    }
    bundle_value_[i] += inst.v(i, j);
  }
}

std::vector<int> Assignment::bundle(int agent) const {
  std::vector<int> items;
  for (int j = 0; j < static_cast<int>(owner_.size()); ++j) {
    if (owner_[j] == agent) items.push_back(j);
  }
  return items;
}

SupportGraph::SupportGraph(int num_agents, int num_items, double threshold)
    : n_(num_agents), m_(num_items), threshold_(threshold),
      mask_(static_cast<std::size_t>(num_agents) * num_items, 0) {}

void SupportGraph::add(int i, int j) { mask_[index(i, j)] = 1; }
void SupportGraph::remove(int i, int j) { mask_[index(i, j)] = 0; }

std::vector<std::pair<int, int>> SupportGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < m_; ++j) {
      if (contains(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t SupportGraph::num_edges() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double nsw_log_objective(const Instance& inst, const Assignment& a) {
  if (static_cast<int>(a.owner().size()) != inst.num_items() ||
      static_cast<int>(a.bundle_value().size()) != inst.num_agents()) {
    throw DimensionMismatch("assignment does not match the instance dimensions");
  }
  double total = 0.0;
  for (int i = 0; i < inst.num_agents(); ++i) {
    const double value = a.bundle_value()[i];
    if (value <= 0.0) return kNegInf;
    total += inst.w(i) * std::log(value);
  }
  return total;
}

Vector weighted_item_mass(const Instance& inst, const Matrix& b) {
  return (inst.weights().transpose() * b).transpose();
}

namespace {

// sum_ij w_i b_ij log v_ij; kNegInf if mass above tau sits on a zero valuation.
double linear_part(const Instance& inst, const Matrix& b, double tau) {
  double total = 0.0;
  for (int i = 0; i < inst.num_agents(); ++i) {
    for (int j = 0; j < inst.num_items(); ++j) {
      const double x = b(i, j);
      if (x <= 0.0) continue;
      if (inst.v(i, j) > 0.0) {
        total += inst.w(i) * x * std::log(inst.v(i, j));
      } else if (x > tau) {
        return kNegInf;
      }
    }
  }
  return total;
}

}  // namespace

double f_cvx(const Instance& inst, const FractionalSolution& s, double tau) {
  require_same_shape(inst, s);
  const double linear = linear_part(inst, s.b(), tau);
  if (linear == kNegInf) return kNegInf;
  const Vector mu = weighted_item_mass(inst, s.b());
  double entropy = 0.0;
  for (int j = 0; j < inst.num_items(); ++j) entropy += xlogx(mu(j));
  double weight_term = 0.0;
  for (int i = 0; i < inst.num_agents(); ++i) weight_term += xlogx(inst.w(i));
  return linear - entropy + weight_term;
}

double f_ncvx(const Instance& inst, const FractionalSolution& s, double tau) {
  require_same_shape(inst, s);
  const double linear = linear_part(inst, s.b(), tau);
  if (linear == kNegInf) return kNegInf;
  double mass_term = 0.0;
  for (int i = 0; i < inst.num_agents(); ++i) {
    for (int j = 0; j < inst.num_items(); ++j) {
      const double x = s(i, j);
      if (x > 0.0) mass_term += inst.w(i) * x * std::log(s.q()(j));
    }
  }
  return linear - mass_term;
}

Matrix f_cvx_gradient(const Instance& inst, const Matrix& b, double mass_floor) {
  const Vector mu = weighted_item_mass(inst, b);
  Matrix g(inst.num_agents(), inst.num_items());
  for (int j = 0; j < inst.num_items(); ++j) {
    const double log_mu = std::log(std::max(mu(j), mass_floor));
    for (int i = 0; i < inst.num_agents(); ++i) {
      const double v = inst.v(i, j);
      g(i, j) = v > 0.0 ? inst.w(i) * (std::log(v) - 1.0 - log_mu) : kNegInf;
    }
  }
  return g;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionMismatch("kl_divergence: p and q differ in length");
  double sp = 0.0, sq = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] < 0.0 || q[x] < 0.0) throw InvalidInput("kl_divergence: negative probability");
    sp += p[x];
    sq += q[x];
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9) {
    throw InvalidInput("kl_divergence: inputs must each sum to 1 within 1e-9");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) continue;
    if (q[x] <= 0.0) return kPosInf;
    total += p[x] * std::log(p[x] / q[x]);
  }
  return total;
}

double kl_divergence(const Vector& p, const Vector& q) {
  return kl_divergence(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                       std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

double kl_to_uniform(const Vector& w) {
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) entropy -= xlogx(w(i));
  return std::log(static_cast<double>(w.size())) - entropy;
}

FractionalSolution embed_assignment(const Instance& inst, const Assignment& a) {
  Matrix b = Matrix::Zero(inst.num_agents(), inst.num_items());
  for (int i = 0; i < inst.num_agents(); ++i) {
    if (a.bundle_value()[i] <= 0.0) {
      std::ostringstream os;
      os << "cannot embed: agent " << i << " has a zero-value bundle";
      throw InvalidInput(os.str());
    }
  }
  for (int j = 0; j < inst.num_items(); ++j) {
    const int i = a.owner_of(j);
    b(i, j) = inst.v(i, j) / a.bundle_value()[i];
  }
  return FractionalSolution(std::move(b));
}

GapIdentity gap_identity(const Instance& inst, const FractionalSolution& s) {
  require_same_shape(inst, s);
  if (!is_feasible(s)) throw InvalidInput("gap_identity: solution is not feasible");
  GapIdentity out;
  out.gap = f_cvx(inst, s) - f_ncvx(inst, s);
  out.kl_w = kl_to_uniform(inst.weights());
  const Vector mu = weighted_item_mass(inst, s.b());
  const Vector theta = s.q() / static_cast<double>(inst.num_agents());
  out.kl_mu_theta = kl_divergence(mu, theta);
  return out;
}

std::vector<int> assumption1_unmatched_agents(const Instance& inst) {
  const int n = inst.num_agents();
  const int m = inst.num_items();
  std::vector<char> allowed(static_cast<std::size_t>(n) * m, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) allowed[static_cast<std::size_t>(i) * m + j] = inst.v(i, j) > 0.0;
  }
  const std::vector<int> match = max_cardinality_matching(n, m, allowed);
  std::vector<int> unmatched;
  for (int i = 0; i < n; ++i) {
    if (match[i] < 0) unmatched.push_back(i);
  }
  return unmatched;
}

bool check_assumption1(const Instance& inst) { return assumption1_unmatched_agents(inst).empty(); }

SupportGraph support_graph(const FractionalSolution& s, double tau) {
  if (tau < 0.0) throw InvalidInput("support threshold must be non-negative");
  SupportGraph g(s.num_agents(), s.num_items(), tau);
  for (int i = 0; i < s.num_agents(); ++i) {
    for (int j = 0; j < s.num_items(); ++j) {
      if (s(i, j) > tau) g.add(i, j);
    }
  }
  return g;
}

Instance restrict_to(const Instance& inst, const SupportGraph& mask) {
  if (mask.num_agents() != inst.num_agents() || mask.num_items() != inst.num_items()) {
    throw DimensionMismatch("mask does not match the instance dimensions");
  }
  Matrix v = inst.valuations();
  for (int i = 0; i < inst.num_agents(); ++i) {
    for (int j = 0; j < inst.num_items(); ++j) {
      if (!mask.contains(i, j)) v(i, j) = 0.0;
    }
  }
  return Instance::create(std::move(v), inst.weights());
}

bool claim_val_inequality(std::span<const double> y, std::span<const double> z) {
  if (y.size() != z.size()) throw DimensionMismatch("claim_val_inequality: length mismatch");
  double sy = 0.0, sz = 0.0, rhs = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k] < 0.0 || !(z[k] > 0.0)) throw InvalidInput("claim_val_inequality: need y >= 0, z > 0");
    sy += y[k];
    sz += z[k];
    if (y[k] > 0.0) rhs += y[k] * std::log(z[k]) - y[k] * std::log(y[k]);
  }
  const double lhs = sy > 0.0 ? sy * std::log(sz) - sy * std::log(sy) : 0.0;
  const double slack = 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return lhs >= rhs - slack;
}

}  // namespace nswx
