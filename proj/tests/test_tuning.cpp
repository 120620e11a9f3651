#include <doctest.h>

#include <algorithm>

#include "lphi/dataset.hpp"
#include "lphi/errors.hpp"
#include "lphi/tuning.hpp"
#include "support.hpp"

using namespace lphi;
using lphi::testing::vec;

TEST_CASE("alpha grid") {
  const auto g = alpha_grid(0.02);
  CHECK(g.size() == 51);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[15] == 0.3);
  CHECK_THROWS_AS(alpha_grid(0.0), InputError);
  const auto d = TuningConfig::default_gamma_grid();
  CHECK(d.size() == 19);
  CHECK(d.front() == 0.01);
  CHECK(d.back() == 1.0);
}

TEST_CASE("AMSE decomposition") {
  auto m = normal_location_scale();
  const auto x = mixture_sampler(contaminated_normal(0.1, 5.0), 60, 4);
  const TuningPair t(0.4, 0.2);
  EstimateResult r;
  const auto pilot = pilot_min_l2(x, *m);
  const auto a = amse(x, *m, t, pilot, {}, AmseMatrices::empirical, &r);
  CHECK(a.total == doctest::Approx(a.bias_sq + a.variance_term).epsilon(1e-12));
  CHECK(a.bias_sq >= 0.0);
  CHECK(a.variance_term >= 0.0);
  const auto self = amse(x, *m, t, PilotEstimate{r.theta_hat});
  CHECK(self.bias_sq == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(self.total == doctest::Approx(self.variance_term).epsilon(1e-15));
  const auto model = amse(x, *m, t, pilot, {}, AmseMatrices::model);
  CHECK(model.bias_sq == doctest::Approx(a.bias_sq).epsilon(1e-12));
}

TEST_CASE("selection honours its constraint, is deterministic and reports the trace minimum") {
  auto m = normal_location_scale();
  const auto x = mixture_sampler(contaminated_normal(0.15, 6.0), 50, 19);
  TuningConfig cfg;
  cfg.alpha_step = 0.1;
  cfg.beta_step = 0.1;
  cfg.gamma_grid = {0.05, 0.2, 0.6, 1.0};
  cfg.pilot_sensitivity = true;
  const auto a = select_tuning(x, *m, {}, cfg);
  const auto b = select_tuning(x, *m, {}, cfg);
  CHECK(a.chosen.beta == b.chosen.beta);
  CHECK(a.chosen.gamma == b.chosen.gamma);
  CHECK(a.amse_at_chosen.total == b.amse_at_chosen.total);
  CHECK(a.search_trace.size() == b.search_trace.size());
  if (a.constrained_satisfied) {
    CHECK(a.amse_at_chosen.total < a.amse_at_alpha_w.total);
    CHECK(a.chosen.beta < a.alpha_w.alpha);
  }
  double best = INFINITY;
  for (const auto& r : a.search_trace)
    if (r.ok && (!a.constrained_satisfied || r.beta < a.alpha_w.alpha)) best = std::min(best, r.amse.total);
  CHECK(a.amse_at_chosen.total == best);
  bool found = false;
  for (const auto& r : a.search_trace) found = found || (r.beta == a.chosen.beta && r.gamma == a.chosen.gamma);
  CHECK(found);
  CHECK(a.chosen_with_stage1_pilot.has_value());
  CHECK(a.alpha_trace.size() == 11);
  double amin = INFINITY;
  for (const auto& r : a.alpha_trace)
    if (r.ok) amin = std::min(amin, r.amse.total);
  for (const auto& r : a.alpha_trace)
    if (r.beta == a.alpha_w.alpha) CHECK(r.amse.total == amin);
}

TEST_CASE("clean large sample selects a small alpha" * doctest::may_fail()) {
  auto m = normal_location_scale();
  const auto x = mixture_sampler(contaminated_normal(0.0, 5.0), 10000, 23);
  const auto grid = alpha_grid(0.02);
  const auto a = warwick_jones_alpha(x, *m, pilot_min_l2(x, *m), {}, grid);
  CHECK(a.alpha <= 0.2);
}

TEST_CASE("regression AMSE uses the non-homogeneous sandwich") {
  const auto hr = load_dataset("hertzsprung-russel");
  RegressionData d;
  d.x = Matrix::Ones(47, 2);
  d.y = Vector(47);
  for (int i = 0; i < 47; ++i) {
    d.x(i, 1) = hr.column("log_te")[i];
    d.y[i] = hr.column("log_light")[i];
  }
  const auto pilot = pilot_lms_regression(d, 3000, 1);
  EstimateResult r;
  const auto a = amse_regression(d, TuningPair(1.0, 0.9), pilot, {}, AmseMatrices::empirical, &r);
  CHECK(a.total == doctest::Approx(a.bias_sq + a.variance_term).epsilon(1e-12));
  CHECK(a.bias_sq == doctest::Approx((r.theta_hat - pilot.theta_star).squaredNorm()));
  CHECK(a.variance_term > 0.0);
  const auto b = amse_regression(d, TuningPair(1.0, 0.9), pilot, {}, AmseMatrices::model);
  CHECK(b.variance_term > 0.0);
}
