#pragma once

#include <Eigen/Core>

namespace gradnorm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace gradnorm
