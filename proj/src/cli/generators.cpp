#include "nswx/cli.hpp"

#include <cmath>
#include <random>

namespace nswx::cli {

namespace {

// Raw engine outputs only; std distributions differ across standard libraries.
double unit(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::vector<double> draw_weights(std::mt19937_64& rng, int n, const std::string& mode) {
  std::vector<double> w(n, 1.0 / n);
  if (mode == "equal") return w;
  if (mode != "dirichlet") throw InvalidInput("unknown weight mode '" + mode + "' (expected dirichlet or equal)");
  double sum = 0.0;
  for (double& x : w) {
    x = -std::log(unit(rng));
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

Matrix random_valuations(std::mt19937_64& rng, int n, int m, int lo, int hi) {
  Matrix v(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) v(i, j) = uniform_int(rng, lo, hi);
  }
  return v;
}

bool satisfies_assumption1(const Matrix& v) {
  return check_assumption1(Instance::create(v, Vector::Ones(v.rows())));
}

}  // namespace

InstanceFile gen_instance(const std::string& kind, int n, int m, std::uint64_t seed, const GenParams& params) {
  if (n < 1) throw InvalidInput("gen: need at least one agent");
  if (m < n) throw InvalidInput("gen: need at least as many items as agents");
  std::mt19937_64 rng(seed);
  InstanceFile f;
  for (int i = 0; i < n; ++i) f.agent_ids.push_back("a" + std::to_string(i));
  for (int j = 0; j < m; ++j) f.item_ids.push_back("g" + std::to_string(j));

  if (kind == "uniform" || kind == "skewed") {
    if (kind == "skewed" && n < 3) throw InvalidInput("gen: skewed weights need n >= 3 so that 1/log n < 1");
    do {
      f.valuations = random_valuations(rng, n, m, 0, 10);
    } while (!satisfies_assumption1(f.valuations));
    if (kind == "uniform") {
      f.weights = draw_weights(rng, n, params.weights);
    } else {
      const double heavy = 1.0 / std::log(static_cast<double>(n));
      f.weights.assign(n, (1.0 - heavy) / (n - 1));
      f.weights[0] = heavy;
    }
  } else if (kind == "diagonal") {
    f.valuations = Matrix::Zero(n, m);
    for (int i = 0; i < n; ++i) f.valuations(i, i) = 100.0;
    for (int i = 0; i < n; ++i) {
      for (int j = n; j < m; ++j) f.valuations(i, j) = uniform_int(rng, 1, 10);
    }
    f.weights = draw_weights(rng, n, params.weights);
  } else if (kind == "adversarial-light") {
    // One private item per agent plus a shared pool of low-value items that
    // end up split thinly, so most pool items are light after solving.
    f.valuations = Matrix::Zero(n, m);
    for (int i = 0; i < n; ++i) f.valuations(i, i) = 10.0;
    for (int i = 0; i < n; ++i) {
      for (int j = n; j < m; ++j) f.valuations(i, j) = uniform_int(rng, 1, 3);
    }
    f.weights = draw_weights(rng, n, params.weights);
  } else {
    throw InvalidInput("gen: unknown kind '" + kind + "' (expected uniform, skewed, diagonal, adversarial-light)");
  }
  return f;
}

}  // namespace nswx::cli
