#pragma once

#include <Eigen/Dense>

namespace lphi {

// Inverse through an SVD; throws SingularMatrixError above the condition
// limit rather than letting NaNs through.
Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& a, const char* what, double max_condition = 1e12);
double condition_number(const Eigen::MatrixXd& a);
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a);

}  // namespace lphi
