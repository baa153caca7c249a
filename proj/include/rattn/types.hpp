#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace rattn {

// All numerics are 64-bit. Matrices are row-major so that flattened views
// (particles, checkpoints) read in row order.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

}  // namespace rattn
