#pragma once

#include "nswx/core.hpp"

#include <optional>
#include <vector>

namespace nswx {

/// Result of a maximum-weight matching that saturates every row.
struct RowSaturatingMatching {
  std::vector<int> column_of_row;  // column matched to each row
  double weight = 0.0;             // sum of matched weights, in row order
  /// LP dual of max <W, x> over {x >= 0, rows sum to 1, columns sum <= 1}:
  /// row_price_i + column_price_j >= W_ij everywhere, column_price >= 0,
  /// equality on matched pairs, column_price = 0 on unmatched columns.
  Vector row_price;
  Vector column_price;
};

/// Maximum-weight matching of all rows into distinct columns (rows <= cols).
/// Entries equal to kNegInf (or NaN) are forbidden edges. Returns nullopt when
/// no row-saturating matching avoids forbidden edges. Shortest augmenting
/// paths (Hungarian method with potentials), rows inserted in index order and
/// ties resolved toward the lowest column index.
std::optional<RowSaturatingMatching> max_weight_row_saturating_matching(const Matrix& weight);

/// Maximum cardinality matching over allowed(i, j) != 0 (Kuhn's augmenting
/// paths). Returns column_of_row with -1 for unmatched rows.
std::vector<int> max_cardinality_matching(int rows, int cols, const std::vector<char>& allowed);

}  // namespace nswx
