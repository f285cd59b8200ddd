#include "nswx/matching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace nswx {

std::optional<RowSaturatingMatching> max_weight_row_saturating_matching(const Matrix& weight) {
  const int n = static_cast<int>(weight.rows());
  const int m = static_cast<int>(weight.cols());
  if (n > m) return std::nullopt;

  RowSaturatingMatching result;
  result.row_price = Vector::Zero(n);
  result.column_price = Vector::Zero(m);
  result.column_of_row.assign(n, -1);
  if (n == 0) return result;

  // Minimization on cost = -weight, 1-based, column 0 is virtual.
  auto cost = [&](int i, int j) {
    const double x = weight(i - 1, j - 1);
    if (std::isnan(x) || x == kNegInf) return kPosInf;
    return -x;
  };

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> row_of_col(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (int i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kPosInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = row_of_col[j0];
      double delta = kPosInf;
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double c = cost(i0, j);
        if (c != kPosInf) {
          const double cur = c - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 < 0) return std::nullopt;  // no augmenting path avoids forbidden edges
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const int j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= m; ++j) {
    if (row_of_col[j] > 0) result.column_of_row[row_of_col[j] - 1] = j - 1;
    result.column_price(j - 1) = -v[j];
  }
  for (int i = 1; i <= n; ++i) result.row_price(i - 1) = -u[i];
  for (int i = 0; i < n; ++i) result.weight += weight(i, result.column_of_row[i]);
  return result;
}

std::vector<int> max_cardinality_matching(int rows, int cols, const std::vector<char>& allowed) {
  std::vector<int> col_of_row(rows, -1), row_of_col(cols, -1);
  std::vector<char> seen;

  std::function<bool(int)> augment = [&](int r) {
    for (int c = 0; c < cols; ++c) {
      if (!allowed[static_cast<std::size_t>(r) * cols + c] || seen[c]) continue;
      seen[c] = 1;
      if (row_of_col[c] < 0 || augment(row_of_col[c])) {
        row_of_col[c] = r;
        col_of_row[r] = c;
        return true;
      }
    }
    return false;
  };

  for (int r = 0; r < rows; ++r) {
    seen.assign(cols, 0);
    augment(r);
  }
  return col_of_row;
}

}  // namespace nswx
