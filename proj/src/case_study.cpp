#include "lphi/case_study.hpp"

#include <algorithm>
#include <cmath>

#include "lphi/errors.hpp"
#include "lphi/hypothesis.hpp"

namespace lphi {

const std::vector<std::string>& case_study_names() {
  static const std::vector<std::string> v = {"newcomb", "short", "hertzsprung-russel", "salinity", "mosquito"};
  return v;
}

Json CaseStudyOptions::to_json(const std::string& name) const {
  Json j = Json::object();
  j["case_study"] = name;
  j["data"] = data_path ? data_path->string() : std::string("bundled");
  j["seed"] = seed;
  j["quadrature"] = {{"abs_tol", q.abs_tol}, {"rel_tol", q.rel_tol}, {"max_subdivisions", q.max_subdivisions}};
  if (name == "hertzsprung-russel" || name == "salinity") {
    j["pair"] = describe(pair);
    j["tune"] = tune_regression;
    j["lms_subsets"] = lms_subsets;
  }
  if (name == "mosquito") {
    j["pair"] = describe(test_pair);
    j["null_p"] = null_p;
    j["mc_draws"] = mc_draws;
  }
  if (name == "newcomb" || name == "short" || tune_regression) {
    j["amse_matrices"] = matrices == AmseMatrices::empirical ? "empirical" : "model";
    j["beta_range"] = beta_range == BetaRange::unit ? "unit" : "below-alpha";
  }
  return j;
}

RegressionData regression_design(const Dataset& d) {
  std::vector<std::string> xs;
  std::string y;
  if (d.name == "hertzsprung-russel") {
    xs = {"log_te"};
    y = "log_light";
  } else if (d.name == "salinity") {
    xs = {"lagged_salinity", "trend", "discharge"};
    y = "salinity";
  } else {
    throw InputError("'" + d.name + "' is not a regression dataset");
  }
  const auto n = static_cast<Eigen::Index>(d.rows());
  RegressionData r;
  r.x = Matrix::Ones(n, static_cast<Eigen::Index>(xs.size() + 1));
  r.y = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) r.x(i, static_cast<Eigen::Index>(j + 1)) = d.column(xs[j])[i];
    r.y[i] = d.column(y)[i];
  }
  r.validate();
  return r;
}

namespace {

struct Emitter {
  Report& rep;
  void estimate(const std::string& estimator, const std::string& tuning, const std::vector<std::string>& names,
                const Vector& v) {
    for (std::size_t k = 0; k < names.size(); ++k)
      value("estimate", estimator, tuning, names[k], v[static_cast<Eigen::Index>(k)]);
  }
  void value(const std::string& item, const std::string& estimator, const std::string& tuning,
             const std::string& parameter, const Json& v) {
    Json r = Json::object();
    r["item"] = item;
    r["estimator"] = estimator;
    r["tuning"] = tuning;
    r["parameter"] = parameter;
    r["value"] = v;
    rep.records.push_back(std::move(r));
  }
  void fit_info(const std::string& estimator, const EstimateResult& e) {
    value("objective", estimator, describe(e.tuning), "", e.objective_value);
    value("eq_residual_norm", estimator, describe(e.tuning), "", e.eq_residual_norm);
    value("converged", estimator, describe(e.tuning), "", e.converged);
    value("restart_found_lower", estimator, describe(e.tuning), "", e.restart_found_lower);
    for (const auto& w : e.warnings) value("warning", estimator, describe(e.tuning), "", w);
  }
  void amse(const std::string& estimator, const std::string& tuning, const AmseValue& a) {
    value("amse", estimator, tuning, "", a.total);
    value("amse_bias_sq", estimator, tuning, "", a.bias_sq);
    value("amse_variance", estimator, tuning, "", a.variance_term);
  }
};

TuningConfig tuning_config(const CaseStudyOptions& o) {
  TuningConfig c;
  c.matrices = o.matrices;
  c.beta_range = o.beta_range;
  c.threads = o.threads;
  c.seed = o.seed;
  c.lms_subsets = o.lms_subsets;
  return c;
}

void selection_records(Emitter& em, const TuningSelection& sel, const std::vector<std::string>& names) {
  em.estimate("pilot", to_string(sel.stage1_pilot.method), names, sel.stage1_pilot.theta_star);
  em.estimate("mdpde", describe(sel.alpha_w), names, sel.fit_at_alpha_w.theta_hat);
  em.fit_info("mdpde", sel.fit_at_alpha_w);
  em.amse("mdpde", describe(sel.alpha_w), sel.amse_at_alpha_w);
  em.estimate("mlphide", describe(sel.chosen), names, sel.fit_at_chosen.theta_hat);
  em.fit_info("mlphide", sel.fit_at_chosen);
  em.amse("mlphide", describe(sel.chosen), sel.amse_at_chosen);
  em.value("alpha_w", "mdpde", describe(sel.alpha_w), "alpha", sel.alpha_w.alpha);
  em.value("selected", "mlphide", describe(sel.chosen), "beta", sel.chosen.beta);
  em.value("selected", "mlphide", describe(sel.chosen), "gamma", sel.chosen.gamma);
  em.value("constraint_satisfied", "mlphide", describe(sel.chosen), "", sel.constrained_satisfied);
}

Report location_scale_study(const std::string& name, const CaseStudyOptions& o) {
  const auto d = load_dataset(name, o.data_path);
  const auto& x = d.column(d.column_names.front());
  auto m = normal_location_scale();
  const auto names = m->param_names();
  Report rep;
  rep.kind = "case-study";
  rep.config = o.to_json(name);
  Emitter em{rep};
  em.value("n", "", "", "", x.size());
  const auto mle = fit(x, *m, Mle{}, PilotEstimate{m->moment_start(x), PilotEstimate::Method::user}, o.q);
  em.estimate("mle", "mle", names, mle.theta_hat);
  em.fit_info("mle", mle);
  selection_records(em, select_tuning(x, *m, o.q, tuning_config(o)), names);
  return rep;
}

Report regression_study(const std::string& name, const CaseStudyOptions& o) {
  const auto ds = load_dataset(name, o.data_path);
  const auto d = regression_design(ds);
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) names.push_back("eta" + std::to_string(j));
  names.push_back("sigma");
  Report rep;
  rep.kind = "case-study";
  rep.config = o.to_json(name);
  Emitter em{rep};
  em.value("n", "", "", "", d.y.size());
  em.estimate("least_squares", "mle", names, least_squares(d));
  const auto pilot = pilot_lms_regression(d, o.lms_subsets, o.seed);
  em.estimate("pilot", to_string(pilot.method), names, pilot.theta_star);
  FitOptions fo;
  fo.check_restart = true;
  const auto r = fit_nonhomogeneous(d, o.pair, pilot, o.q, fo);
  em.estimate("mlphide", describe(o.pair), names, r.theta_hat);
  em.fit_info("mlphide", r);
  if (o.tune_regression) selection_records(em, select_tuning_regression(d, o.q, tuning_config(o)), names);
  return rep;
}

Report mosquito_study(const CaseStudyOptions& o) {
  const auto ds = load_dataset("mosquito", o.data_path);
  auto bm = bernoulli_model();
  const auto& pts = bm->points();
  std::vector<double> counts(pts.size(), 0.0);
  const auto& died = ds.column("died");
  const auto& cnt = ds.column("count");
  for (std::size_t i = 0; i < died.size(); ++i) {
    auto it = std::find(pts.begin(), pts.end(), died[i]);
    if (it == pts.end()) throw InputError("mosquito: 'died' must be 0 or 1");
    if (cnt[i] < 0 || cnt[i] != std::floor(cnt[i])) throw InputError("mosquito: counts must be whole numbers");
    counts[static_cast<std::size_t>(it - pts.begin())] += cnt[i];
  }
  Vector th0(1);
  th0 << o.null_p;
  const ChiBarSpectrum mc{{}, o.mc_draws, o.seed};
  const auto data = expand_counts(counts, pts);
  std::vector<TestResult> tests;
  tests.push_back(ddt_test(counts, *bm, ConstrainedNull::simple(th0), o.test_pair, o.q, mc));
  tests.push_back(simple_null_test(data, *bm, th0, o.test_pair, o.q, mc));
  tests.push_back(score_test(data, *bm, th0, o.test_pair, o.q, mc));
  const double p0 = o.null_p;
  tests.push_back(wald_test(
      data, *bm, [p0](const Vector& t) { return Vector::Constant(1, t[0] - p0); },
      [](const Vector&) { return Matrix::Identity(1, 1); }, o.test_pair, o.q));
  Report rep;
  rep.kind = "case-study";
  rep.config = o.to_json("mosquito");
  Emitter em{rep};
  em.value("n", "", "", "", data.size());
  for (const auto& t : tests) {
    const std::string tn = describe(o.test_pair);
    em.value("statistic", t.name, tn, "", t.statistic);
    for (std::size_t i = 0; i < t.lambdas.size(); ++i)
      em.value("lambda", t.name, tn, "lambda" + std::to_string(i + 1), t.lambdas[i]);
    em.value("critical_value_95", t.name, tn, "", t.critical_value_95);
    em.value("p_value", t.name, tn, "", t.p_value);
    em.value("reject_5pct", t.name, tn, "", t.reject_at_5pct);
    if (t.theta_hat.size() > 0) em.value("estimate", t.name, tn, "p", t.theta_hat[0]);
  }
  return rep;
}

}  // namespace

Report run_case_study(const std::string& name, const CaseStudyOptions& o) {
  o.q.validate();
  if (name == "newcomb" || name == "short") return location_scale_study(name, o);
  if (name == "hertzsprung-russel" || name == "salinity") return regression_study(name, o);
  if (name == "mosquito") return mosquito_study(o);
  throw InputError("unknown case study '" + name + "'");
}

}  // namespace lphi
