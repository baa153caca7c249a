#pragma once

#include "rattn/types.hpp"

#include <string_view>

namespace rattn {

// Throws std::runtime_error naming `where` if any entry is NaN or Inf.
void check_finite(const Matrix& m, std::string_view where);

// Standard matrix product; rejects a.cols != b.rows with both shapes reported.
Matrix matmul(const Matrix& a, const Matrix& b);

// Row-wise softmax with row-max subtraction; each row sums to 1.
Matrix softmax_rows(const Matrix& logits);

// Symmetric Euclidean distance matrix over the rows of `points`.
// Zero diagonal; entry (i, j) equals entry (j, i) exactly.
Matrix pairwise_distances(const Matrix& points);

}  // namespace rattn
