#include <doctest.h>

#include <cmath>

#include "lphi/errors.hpp"
#include "lphi/models.hpp"
#include "lphi/rng.hpp"
#include "support.hpp"

using namespace lphi;
using lphi::testing::fd_gradient;
using lphi::testing::rel_err;
using lphi::testing::vec;

namespace {

double total_mass(const ParametricModel& m, const Vector& th) {
  QuadratureSpec q;
  return integrate_model<double>(m, th, [](double, double f) { return f; }, q);
}

void check_model(const ParametricModel& m, const std::vector<Vector>& thetas, const std::vector<double>& xs) {
  for (const auto& th : thetas) {
    CHECK(std::abs(total_mass(m, th) - 1.0) < 1e-6);
    for (double x : xs) {
      const Vector u = m.score(th, x);
      const Vector fd = fd_gradient([&](const Vector& t) { return m.log_density(t, x); }, th, 1e-6);
      for (Eigen::Index i = 0; i < u.size(); ++i) CHECK(std::abs(u[i] - fd[i]) <= 1e-6 * std::max(1.0, std::abs(u[i])));
      const Matrix jac = m.score_jacobian(th, x);
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const Vector row = fd_gradient([&](const Vector& t) { return m.score(t, x)[i]; }, th, 1e-6);
        for (Eigen::Index j = 0; j < u.size(); ++j)
          CHECK(std::abs(jac(i, j) - row[j]) <= 1e-6 * std::max(1.0, std::abs(jac(i, j))));
      }
      CHECK(std::abs(std::log(m.density(th, x)) - m.log_density(th, x)) < 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("normal location") {
  auto m = normal_location(1.0);
  CHECK(m->density(vec({0.0}), 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
  CHECK(m->score(vec({1.0}), 1.0)[0] == 0.0);
  CHECK(m->score(vec({0.0}), 2.0)[0] == doctest::Approx(2.0));
  check_model(*m, {vec({0.0}), vec({-3.0}), vec({12.5})}, {-1.0, 0.3, 4.0});
  check_model(*normal_location(2.5), {vec({1.0})}, {-2.0, 5.0});
  CHECK_THROWS_AS(normal_location(0.0), DomainError);
}

TEST_CASE("normal location-scale") {
  auto m = normal_location_scale();
  const Vector u = m->score(vec({0.0, 1.0}), 0.0);
  CHECK(u[0] == 0.0);
  CHECK(u[1] == doctest::Approx(-1.0));
  check_model(*m, {vec({0.0, 1.0}), vec({2.0, 0.3}), vec({-5.0, 4.0})}, {-1.0, 0.3, 2.4});
  CHECK_THROWS_AS(m->check(vec({0.0, 0.0})), DomainError);
  CHECK_THROWS_AS(m->density(vec({0.0, -1.0}), 0.0), DomainError);

  Rng rng(42, 0);
  std::vector<double> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back(m->sample(vec({0.0, 1.0}), rng));
  CHECK(std::abs(lphi::testing::sample_mean(xs)) < 0.02);
}

TEST_CASE("regression observation model") {
  const Vector x = vec({1.0, 2.0, -0.5});
  auto m = regression_observation_model(x);
  CHECK(m->dim() == 4);
  CHECK(m->density(vec({0.0, 0.0, 0.0, 1.0}), 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
  const Vector th = vec({0.5, -1.0, 2.0, 0.7});
  const double mean = x.dot(th.head(3));
  const Vector u = m->score(th, mean);
  for (int i = 0; i < 3; ++i) CHECK(u[i] == 0.0);
  check_model(*m, {th, vec({1.0, 0.2, 0.1, 2.0}), vec({0.0, 0.0, 0.0, 0.3})}, {-1.0, 0.4, 3.0});
}

TEST_CASE("bernoulli model") {
  auto m = bernoulli_model();
  const Vector p = vec({264.0 / 465.0});
  CHECK(m->pmf(p, 1.0) == doctest::Approx(264.0 / 465.0).epsilon(1e-15));
  CHECK(m->score(vec({0.5}), 1.0)[0] == doctest::Approx(2.0));
  for (double q : {0.1, 0.5, 0.93}) CHECK(std::abs(m->pmf(vec({q}), 0.0) + m->pmf(vec({q}), 1.0) - 1.0) < 1e-12);
  check_model(*m, {vec({0.2}), vec({0.5}), vec({0.8})}, {0.0, 1.0});
  CHECK_THROWS_AS(m->check(vec({0.0})), DomainError);
  CHECK_THROWS_AS(m->check(vec({1.0})), DomainError);
  CHECK(m->points() == FiniteSet{0.0, 1.0});
}

TEST_CASE("mixture sampler") {
  MixtureSpec one;
  one.components.push_back({1.0, normal_location(1.0), vec({0.0})});
  const auto a = mixture_sampler(one, 100000, 9);
  const double v = lphi::testing::sample_var(a);
  CHECK(v >= 0.97);
  CHECK(v <= 1.03);

  const auto b = mixture_sampler(contaminated_normal(0.1, 5.0), 1000000, 10);
  CHECK(std::abs(lphi::testing::sample_mean(b) - 0.5) < 0.01);

  CHECK(mixture_sampler(contaminated_normal(0.2, 5.0), 500, 77) == mixture_sampler(contaminated_normal(0.2, 5.0), 500, 77));
  CHECK(mixture_sampler(contaminated_normal(0.2, 5.0), 500, 77) != mixture_sampler(contaminated_normal(0.2, 5.0), 500, 78));

  MixtureSpec bad;
  bad.components.push_back({0.7, normal_location(1.0), vec({0.0})});
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK(contaminated_normal(0.1, 5.0).density(5.0) ==
        doctest::Approx(0.9 * lphi::testing::normal_pdf(5.0, 0, 1) + 0.1 * lphi::testing::normal_pdf(5.0, 5, 1)));
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(1, 0), b(1, 0), c(1, 1);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differ = differ || x != c.uniform();
  }
  CHECK(differ);
  Rng d(3, 4);
  for (int i = 0; i < 1000; ++i) CHECK(d.below(7) < 7);
}

TEST_CASE("default truncation and window override") {
  auto m = normal_location_scale();
  const auto w = m->default_truncation(vec({2.0, 3.0}));
  CHECK(w.lo == doctest::Approx(-28.0));
  CHECK(w.hi == doctest::Approx(32.0));
  QuadratureSpec q;
  q.support_truncation = std::make_pair(-1.0, 1.0);
  const auto o = integration_window(*m, vec({2.0, 3.0}), q);
  CHECK(o.lo == -1.0);
  CHECK(o.hi == 1.0);
  auto bm = bernoulli_model();
  const auto bw = bm->default_truncation(vec({0.4}));
  CHECK(bw.lo == 0.0);
  CHECK(bw.hi == 1.0);
}
