#include "lphi/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lphi {

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw InputError("quadrature tolerances must be positive");
  if (max_subdivisions < 1) throw InputError("max_subdivisions must be positive");
  if (support_truncation && !(support_truncation->first < support_truncation->second))
    throw InputError("support truncation interval is degenerate");
}

namespace detail {

const std::array<double, 11>& Gk21::nodes() {
  static const auto a = boost::math::quadrature::gauss_kronrod<double, 21>::abscissa();
  return a;
}

const std::array<double, 11>& Gk21::kronrod() {
  static const auto w = boost::math::quadrature::gauss_kronrod<double, 21>::weights();
  return w;
}

const std::array<double, 5>& Gk21::gauss() {
  static const auto w = boost::math::quadrature::gauss<double, 10>::weights();
  return w;
}

}  // namespace detail

std::vector<double> even_breaks(double a, double b, int panels) {
  std::vector<double> br(panels + 1);
  for (int i = 0; i <= panels; ++i) br[i] = a + (b - a) * i / panels;
  br[panels] = b;
  return br;
}

}  // namespace lphi
