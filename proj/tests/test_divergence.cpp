#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "lphi/divergence.hpp"
#include "lphi/errors.hpp"
#include "support.hpp"

using namespace lphi;
using lphi::testing::normal_pdf;
using lphi::testing::rel_err;

namespace {

QuadratureSpec window(double lo, double hi) {
  QuadratureSpec q;
  q.support_truncation = std::make_pair(lo, hi);
  return q;
}

// ∫ N(m1,1)^a N(m2,1)^b dx in closed form.
double normal_power_integral(double m1, double a, double m2, double b) {
  const double s = a + b;
  return std::pow(2.0 * M_PI, -0.5 * s) * std::sqrt(2.0 * M_PI / s) * std::exp(-a * b * (m1 - m2) * (m1 - m2) / (2.0 * s));
}

}  // namespace

TEST_CASE("tuning types validate their ranges") {
  CHECK_THROWS_AS(TuningPair(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(TuningPair(1.1, 0.5), DomainError);
  CHECK_THROWS_AS(TuningPair(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(TuningPair(0.5, 1.5), DomainError);
  CHECK_NOTHROW(TuningPair(1.0, 1.0));
  CHECK_THROWS_AS(DpdAlpha(-0.1), DomainError);
  CHECK_NOTHROW(DpdAlpha(0.0));
  QuadratureSpec q;
  q.abs_tol = 0.0;
  CHECK_THROWS_AS(q.validate(), InputError);
  q = {};
  q.support_truncation = std::make_pair(1.0, 1.0);
  CHECK_THROWS_AS(q.validate(), InputError);
}

TEST_CASE("phi closed forms and the gamma to zero limit") {
  CHECK(phi(1.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(phi(2.0, 0.5) == doctest::Approx(2.0 * std::log(1.25)).epsilon(1e-14));
  CHECK(phi(2.0, 0.5) == doctest::Approx(0.446287).epsilon(1e-6));
  // x·phi(x, γ) = 1 − γ/(2x) + O(γ²), so x stays above 5e-3 here.
  for (double x : {0.01, 0.3, 1.0, 7.0}) {
    CHECK(std::abs(x * phi(x, 1e-10) - 1.0) < 1e-8);
    CHECK(x * phi(x, 0.7) < 1.0);
    CHECK(phi(x, 0.7) > 0.0);
  }
  CHECK_THROWS_AS(phi(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(phi(-1.0, 0.5), DomainError);
}

TEST_CASE("b_second closed form, monotonicity of x B'' and the rate at zero") {
  CHECK(b_second(1.0, TuningPair(1.0, 1.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const TuningPair t(0.5, 0.5);
  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double x = 5.0 * i / 1000.0;
    const double v = x * b_second(x, t);
    CHECK(v > prev);
    prev = v;
  }
  const double x = 1e-8;
  CHECK(x * b_second(x, t) / std::pow(x, t.beta) < 1e-5);
  CHECK_THROWS_AS(b_second(0.0, t), DomainError);
}

TEST_CASE("b_prime against a fine midpoint rule") {
  const TuningPair t(0.5, 0.5);
  CHECK(b_prime(0.0, t) == 0.0);
  // s = u^4 makes the integrand smooth; 10^6 midpoint panels on u in (0, 1).
  const int n = 1'000'000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    const double s = u * u * u * u;
    sum += 4.0 * u * u * u * std::sqrt(s) * std::log1p(t.gamma / s) / t.gamma;
  }
  CHECK(std::abs(b_prime(1.0, t) - sum / n) < 1e-8);
  CHECK(b_prime(1.0, t) == doctest::Approx(0.973272332336122).epsilon(1e-12));
}

TEST_CASE("b_value against the nested double integral") {
  const TuningPair t(0.5, 0.5);
  CHECK(b_value(0.0, t) == 0.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  auto inner = [&](double y) {
    if (y <= 0.0) return 0.0;
    return ts.integrate([&](double s) { return s > 0.0 ? b_second(s, t) : 0.0; }, 0.0, y);
  };
  const double nested = ts.integrate(inner, 0.0, 1.0);
  CHECK(std::abs(b_value(1.0, t) - nested) < 1e-7);
}

TEST_CASE("convexity consistency and Bregman nonnegativity") {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(1e-3, 2.0);
  for (auto t : {TuningPair(0.5, 0.5), TuningPair(0.1, 0.01), TuningPair(1.0, 0.9)}) {
    for (int i = 0; i < 100; ++i) {
      double x1 = u(eng), x2 = u(eng);
      if (x1 > x2) std::swap(x1, x2);
      // B'' rises then falls, so the mean value bound uses the smaller endpoint.
      CHECK(b_prime(x2, t) > b_prime(x1, t));
      CHECK(b_prime(x2, t) - b_prime(x1, t) >=
            std::min(b_second(x1, t), b_second(x2, t)) * (x2 - x1) * (1.0 - 1e-9));
      const double x = u(eng), y = u(eng);
      CHECK(b_value(x, t) - b_value(y, t) - (x - y) * b_prime(y, t) >= -1e-12);
    }
  }
}

TEST_CASE("C equals x B' minus B") {
  for (auto t : {TuningPair(0.3, 0.05), TuningPair(0.9, 1.0)})
    for (double x : {1e-4, 0.05, 0.4, 1.7}) {
      const double c = x * b_prime(x, t) - b_value(x, t);
      CHECK(std::abs(c_value(x, t) - c) < 1e-12 * std::max(1.0, std::abs(c)) + 1e-15);
    }
}

TEST_CASE("finite differences of B and B' match B' and B''") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(std::log(1e-3), std::log(2.0));
  const TuningPair t(0.4, 0.2);
  for (int i = 0; i < 50; ++i) {
    const double x = std::exp(u(eng));
    const double h = 1e-4 * x;
    const double d2 = (b_prime(x + h, t) - b_prime(x - h, t)) / (2 * h);
    CHECK(rel_err(d2, b_second(x, t)) < 1e-6);
    const double d1 = (b_value(x + h, t) - b_value(x - h, t)) / (2 * h);
    CHECK(rel_err(d1, b_prime(x, t)) < 1e-6);
  }
}

TEST_CASE("pointwise Bregman integrand") {
  const TuningPair t(0.3, 0.05);
  for (double c : {0.0, 1e-6, 0.2, 1.3}) CHECK(bregman_pointwise(c, c, t) == 0.0);
  for (double g : {1e-5, 0.1, 0.9}) CHECK(rel_err(bregman_pointwise(g, 0.0, t), b_value(g, t)) < 1e-12);
  const double composed = b_value(0.4, t) - b_value(0.2, t) - 0.2 * b_prime(0.2, t);
  CHECK(std::abs(bregman_pointwise(0.4, 0.2, t) - composed) < 1e-9);
  CHECK(std::abs(bregman_pointwise(0.2, 0.4, t) - (b_value(0.2, t) - b_value(0.4, t) + 0.2 * b_prime(0.4, t))) < 1e-9);
  CHECK(rel_err(bregman_pointwise(0.0, 0.3, t), c_value(0.3, t)) < 1e-12);
  CHECK_THROWS_AS(bregman_pointwise(-1.0, 0.3, t), DomainError);
}

TEST_CASE("divergence between normals") {
  auto g = [](double x) { return normal_pdf(x, 0.0, 1.0); };
  auto f = [](double x) { return normal_pdf(x, 1.0, 1.0); };
  const auto q = window(-10.0, 11.0);
  for (auto t : {TuningPair(0.5, 0.01), TuningPair(0.1, 1.0), TuningPair(1.0, 0.3)})
    CHECK(std::abs(divergence(g, g, t, q)) <= q.abs_tol);

  const TuningPair t(0.5, 0.01);
  const int n = 100'000;
  const double h = 21.0 / (n - 1);
  double trap = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -10.0 + i * h;
    trap += (i == 0 || i == n - 1 ? 0.5 : 1.0) * bregman_pointwise(g(x), f(x), t);
  }
  trap *= h;
  CHECK(std::abs(divergence(g, f, t, q) - trap) < 1e-6);
  CHECK_THROWS_AS(divergence(g, f, t, QuadratureSpec{}), InputError);
}

TEST_CASE("divergence is nonnegative on random normal pairs") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> mu(-2.0, 2.0), sd(0.5, 2.0), b(0.05, 1.0), gm(0.01, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double m1 = mu(eng), m2 = mu(eng), s1 = sd(eng), s2 = sd(eng);
    const TuningPair t(b(eng), gm(eng));
    const auto q = window(std::min(m1 - 10 * s1, m2 - 10 * s2), std::max(m1 + 10 * s1, m2 + 10 * s2));
    auto g = [&](double x) { return normal_pdf(x, m1, s1); };
    auto f = [&](double x) { return normal_pdf(x, m2, s2); };
    CHECK(divergence(g, f, t, q) >= -q.abs_tol);
  }
}

TEST_CASE("small gamma reproduces the DPD up to the factor 1 + beta") {
  auto g = [](double x) { return normal_pdf(x, 0.0, 1.0); };
  auto f = [](double x) { return normal_pdf(x, 1.0, 1.0); };
  const auto q = window(-10.0, 11.0);
  for (double b : {0.1, 0.5, 1.0}) {
    const double d = dpd_divergence(g, f, DpdAlpha(b), q);
    CHECK(rel_err((1.0 + b) * divergence(g, f, TuningPair(b, 1e-8), q), d) < 1e-4);
    CHECK(rel_err((1.0 + b) * divergence(g, f, TuningPair(b, 1e-8), q), d) < 1e-5);
  }
}

TEST_CASE("DPD against closed form and the KL limit") {
  auto g = [](double x) { return normal_pdf(x, 0.0, 1.0); };
  auto f = [](double x) { return normal_pdf(x, 1.0, 1.0); };
  const auto q = window(-10.0, 11.0);
  CHECK(std::abs(dpd_divergence(f, f, DpdAlpha(0.5), q)) <= q.abs_tol);
  const double a = 0.5;
  const double exact = normal_power_integral(1.0, 1.0 + a, 0.0, 0.0) -
                       (1.0 + 1.0 / a) * normal_power_integral(0.0, 1.0, 1.0, a) +
                       normal_power_integral(0.0, 1.0 + a, 0.0, 0.0) / a;
  CHECK(std::abs(dpd_divergence(g, f, DpdAlpha(a), q) - exact) < 1e-6);

  auto h = [](double x) { return normal_pdf(x, 0.5, 1.0); };
  const double kl = kullback_leibler(g, h, q);
  CHECK(kl == doctest::Approx(0.125).epsilon(1e-8));
  CHECK(rel_err(dpd_divergence(g, h, DpdAlpha(1e-3), q), kl) < 2e-3);
  CHECK(rel_err(dpd_divergence(g, h, DpdAlpha(1e-4), q), kl) < 2e-4);
  CHECK(rel_err(dpd_divergence(g, h, DpdAlpha(1e-4), q), kl) < rel_err(dpd_divergence(g, h, DpdAlpha(1e-3), q), kl));
}

TEST_CASE("weighting elasticity matches a finite difference") {
  for (const Tuning t : {Tuning(TuningPair(0.3, 0.05)), Tuning(DpdAlpha(0.4)), Tuning(Mle{})}) {
    const auto w = Weighting::from(t);
    for (double f : {1e-4, 0.03, 0.4, 2.0}) {
      const double h = 1e-5 * f;
      const double d = (std::log(w.weight(f + h)) - std::log(w.weight(f - h))) / (std::log(f + h) - std::log(f - h));
      CHECK(std::abs(w.elasticity(f) - d) < 1e-6);
    }
  }
}
