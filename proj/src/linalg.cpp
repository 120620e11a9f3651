#include "lphi/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lphi/errors.hpp"

namespace lphi {

double condition_number(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double lo = s[s.size() - 1];
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return s[0] / lo;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& a, const char* what, double max_condition) {
  if (!a.allFinite()) throw SingularMatrixError(std::string(what) + " has non-finite entries", INFINITY);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cond = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : INFINITY;
  if (!(cond <= max_condition)) {
    throw SingularMatrixError(std::string(what) + " is singular (condition " + std::to_string(cond) + ")", cond);
  }
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace lphi
