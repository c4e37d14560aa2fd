#pragma once

#include <Eigen/Dense>

namespace tabeval {

// Row-major so that a dataset row is contiguous in memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
// Square symmetric matrices (covariances) use the default column-major layout.
using SquareMatrix = Eigen::MatrixXd;

}  // namespace tabeval
