#pragma once

#include <Eigen/Dense>

namespace grdsa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace grdsa
