#include <doctest.h>

#include <cmath>

#include "lphi/asymptotics.hpp"
#include "lphi/errors.hpp"
#include "lphi/hypothesis.hpp"
#include "support.hpp"

using namespace lphi;
using lphi::testing::vec;

TEST_CASE("chi-bar quantiles") {
  CHECK(std::abs(chibar_quantile({{1.0}}, 0.95) - 3.8415) < 0.02);
  CHECK(std::abs(chibar_quantile({{0.774}}, 0.95) - 2.973) < 0.02);
  CHECK(std::abs(chibar_quantile({{1.0, 1.0, 1.0}}, 0.95) - 7.815) < 0.03);
  const ChiBarSpectrum s{{0.3, 1.2}, 200000, 9};
  for (double c : {2.0, 0.25}) {
    ChiBarSpectrum sc = s;
    for (auto& l : sc.lambdas) l *= c;
    CHECK(chibar_quantile(sc, 0.9) == c * chibar_quantile(s, 0.9));
  }
  CHECK(chibar_quantile(s, 0.5) < chibar_quantile(s, 0.9));
  CHECK(chibar_quantile(s, 0.9) < chibar_quantile(s, 0.99));
  CHECK(chibar_quantile(s, 0.9) == chibar_quantile(s, 0.9));
  CHECK(chibar_tail(s, 0.0) == 1.0);
  CHECK(chibar_tail(s, 1.0) >= chibar_tail(s, 2.0));
  CHECK(std::abs(chibar_tail({{1.0}, 1'000'000, 3}, 3.8415) - 0.05) < 0.002);
}

TEST_CASE("A matrix identity, symmetry and positivity") {
  auto m = normal_location_scale();
  const Vector th = vec({0.3, 1.2});
  const TuningPair t(0.3, 0.05);
  const Matrix a = a_matrix(*m, th, t);
  const Matrix n = a_matrix_numeric(*m, th, t);
  CHECK((a - n).norm() < 1e-4 * std::max(1.0, a.norm()));
  CHECK((n - n.transpose()).norm() < 1e-8);
  CHECK((a - matrices_at_model(*m, th, t).J).norm() < 1e-10);
  auto loc = normal_location(1.0);
  CHECK(a_matrix(*loc, vec({0.0}), t)(0, 0) > 0.0);
  auto bm = bernoulli_model();
  CHECK(std::abs(a_matrix(*bm, vec({0.5}), t)(0, 0) - a_matrix_numeric(*bm, vec({0.5}), t)(0, 0)) < 1e-4);
}

TEST_CASE("tests vanish when the fit equals the null") {
  auto loc = normal_location(1.0);
  const TuningPair t(0.3, 0.05);
  const ChiBarSpectrum mc{{}, 100000, 1};
  const std::vector<double> sym = {-1.0, -0.2, 0.2, 1.0};
  const auto T = simple_null_test(sym, *loc, vec({0.0}), t, {}, mc);
  CHECK(std::abs(T.statistic) < 1e-12);
  CHECK(T.p_value == 1.0);
  CHECK(!T.reject_at_5pct);

  const auto fitted = fit(sym, *loc, t, PilotEstimate{vec({0.3})});
  const auto S = score_test(sym, *loc, fitted.theta_hat, t, {}, mc);
  CHECK(std::abs(S.statistic) < 1e-12);

  const std::vector<double> x = {0.1, 0.5, -0.3, 2.0, 1.1};
  const auto two = two_sample_test(x, x, *loc, t, {}, mc);
  CHECK(std::abs(two.statistic) < 1e-12);

  auto bm = bernoulli_model();
  const std::vector<double> counts = {7.0, 7.0};
  const auto D = ddt_test(counts, *bm, ConstrainedNull::simple(vec({0.5})), t, {}, mc);
  CHECK(std::abs(D.statistic) < 1e-12);

  const auto W = wald_test(
      sym, *loc, [](const Vector& th) { return Vector(th); }, [](const Vector&) { return Matrix(Matrix::Identity(1, 1)); },
      t);
  CHECK(std::abs(W.statistic) < 1e-12);
  CHECK(W.p_value == doctest::Approx(1.0));
}

TEST_CASE("mosquito data") {
  auto bm = bernoulli_model();
  const std::vector<double> counts = {201.0, 264.0};
  const TuningPair t(0.3, 0.05);
  const ChiBarSpectrum mc{};
  const auto D = ddt_test(counts, *bm, ConstrainedNull::simple(vec({0.5})), t, {}, mc);
  CHECK(std::abs(D.statistic - 6.62) < 0.05);
  REQUIRE(D.lambdas.size() == 1);
  CHECK(std::abs(D.lambdas[0] - 0.774) < 0.005);
  CHECK(std::abs(D.critical_value_95 - 2.97) < 0.02);
  CHECK(D.reject_at_5pct);
  CHECK(D.reject_at_5pct == (D.statistic > D.critical_value_95));
  CHECK(D.p_value >= 0.0);
  CHECK(D.p_value <= 1.0);

  const auto data = expand_counts(counts, bm->points());
  CHECK(data.size() == 465);
  const auto S = score_test(data, *bm, vec({0.5}), t, {}, mc);
  const auto T = simple_null_test(data, *bm, vec({0.5}), t, {}, mc);
  const auto W = wald_test(
      data, *bm, [](const Vector& p) { return Vector::Constant(1, p[0] - 0.5); },
      [](const Vector&) { return Matrix(Matrix::Identity(1, 1)); }, t);
  CHECK(S.reject_at_5pct == D.reject_at_5pct);
  CHECK(T.reject_at_5pct == D.reject_at_5pct);
  CHECK(W.reject_at_5pct);
  for (const auto* r : {&D, &S, &T, &W}) CHECK(r->statistic >= 0.0);
  CHECK(std::abs(T.statistic - D.statistic) < 1e-6);
}

TEST_CASE("separated alternative: all tests agree") {
  auto loc = normal_location(1.0);
  auto x = mixture_sampler(contaminated_normal(0.0, 0.0), 300, 44);
  for (auto& v : x) v += 0.6;
  const TuningPair t(0.3, 0.05);
  const ChiBarSpectrum mc{{}, 200000, 2};
  const auto T = simple_null_test(x, *loc, vec({0.0}), t, {}, mc);
  const auto S = score_test(x, *loc, vec({0.0}), t, {}, mc);
  const auto W = wald_test(
      x, *loc, [](const Vector& th) { return Vector(th); }, [](const Vector&) { return Matrix(Matrix::Identity(1, 1)); },
      t);
  CHECK(T.statistic > 3 * T.critical_value_95);
  CHECK(T.reject_at_5pct);
  CHECK(S.reject_at_5pct);
  CHECK(W.reject_at_5pct);
}

TEST_CASE("composite null with no restriction") {
  auto bm = bernoulli_model();
  const std::vector<double> counts = {12.0, 30.0};
  auto null = ConstrainedNull::composite([](const Vector& xi) { return Vector(xi); },
                                         [](const Vector&) { return Matrix(Matrix::Identity(1, 1)); }, vec({0.5}));
  const auto D = ddt_test(counts, *bm, null, TuningPair(0.3, 0.05), {}, ChiBarSpectrum{{}, 100000, 1});
  CHECK(std::abs(D.statistic) < 1e-8);
  CHECK(D.lambdas.empty());
  CHECK(D.rank_r == 0);
}

TEST_CASE("spectrum keeps the nonzero eigenvalues") {
  Matrix a = Matrix::Identity(2, 2);
  Matrix s(2, 2);
  s << 2.0, 0.0, 0.0, 0.0;
  const auto l = spectrum(a, s);
  REQUIRE(l.size() == 1);
  CHECK(l[0] == doctest::Approx(2.0));
}
