#pragma once

#include <Eigen/Core>

namespace flowlab {

/// Batches are stored one point per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<RowVector>;
using ConstVectorMap = Eigen::Map<const RowVector>;

}  // namespace flowlab
