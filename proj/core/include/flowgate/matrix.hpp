#pragma once

#include <Eigen/Core>

namespace flowgate {

// Row-major so one flow record is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MatrixMap = Eigen::Map<const Matrix>;

} // namespace flowgate
