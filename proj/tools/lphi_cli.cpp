// lphi: command-line front end.
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lphi/asymptotics.hpp"
#include "lphi/case_study.hpp"
#include "lphi/errors.hpp"
#include "lphi/hypothesis.hpp"
#include "lphi/simulation.hpp"
#include "lphi/tuning.hpp"

using namespace lphi;

namespace {

struct Global {
  std::uint64_t seed = 1;
  double quad_tol = 0.0;
  int threads = 1;
  std::string out;
  std::string format = "csv";
  bool timing = false;

  QuadratureSpec quad() const {
    QuadratureSpec q;
    if (quad_tol > 0.0) {
      q.rel_tol = quad_tol;
      q.abs_tol = 0.1 * quad_tol;
    }
    q.validate();
    return q;
  }
  std::optional<std::filesystem::path> out_path() const {
    if (out.empty()) return std::nullopt;
    return std::filesystem::path(out);
  }
};

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double x = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(x)) throw std::invalid_argument(item);
      v.push_back(x);
    } catch (const std::exception&) {
      throw InputError(what + ": bad number '" + item + "'");
    }
  }
  if (v.empty()) throw InputError(what + ": empty list");
  return v;
}

std::vector<double> range_list(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw InputError("bad range");
  std::vector<double> v;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) v.push_back(std::round((lo + i * step) * 1e12) / 1e12);
  return v;
}

struct TuningArgs {
  double beta = NAN, gamma = NAN, alpha = NAN;
  bool mle = false;

  void add(CLI::App* c) {
    c->add_option("--beta", beta, "beta in (0, 1]");
    c->add_option("--gamma", gamma, "gamma in (0, 1]");
    c->add_option("--alpha", alpha, "DPD alpha (MDPDE)");
    c->add_flag("--mle", mle, "maximum likelihood");
  }
  Tuning get() const {
    const int k = (!std::isnan(beta) || !std::isnan(gamma)) + !std::isnan(alpha) + mle;
    if (k != 1) throw InputError("give exactly one of --beta/--gamma, --alpha, --mle");
    if (mle) return Mle{};
    if (!std::isnan(alpha)) return DpdAlpha(alpha);
    if (std::isnan(beta) || std::isnan(gamma)) throw InputError("--beta and --gamma go together");
    return TuningPair(beta, gamma);
  }
  TuningPair pair(TuningPair dflt) const {
    if (std::isnan(beta) && std::isnan(gamma)) return dflt;
    if (std::isnan(beta) || std::isnan(gamma)) throw InputError("--beta and --gamma go together");
    return TuningPair(beta, gamma);
  }
};

struct DataArgs {
  std::string dataset, path, column, weights, x_cols, y_col;

  void add(CLI::App* c) {
    c->add_option("--dataset", dataset, "bundled dataset name");
    c->add_option("--data", path, "CSV file");
    c->add_option("--column", column, "observation column");
    c->add_option("--weights", weights, "frequency column");
    c->add_option("--x", x_cols, "comma-separated covariate columns (regression)");
    c->add_option("--y", y_col, "response column (regression)");
  }
  Dataset load() const {
    if (!dataset.empty())
      return load_dataset(dataset, path.empty() ? std::nullopt : std::optional<std::filesystem::path>(path));
    if (path.empty()) throw InputError("give --dataset or --data");
    return ingest_csv(path);
  }
  bool regression(const Dataset& d) const {
    return !y_col.empty() || d.name == "hertzsprung-russel" || d.name == "salinity";
  }
  RegressionData design(const Dataset& d) const {
    if (y_col.empty()) return regression_design(d);
    std::vector<std::string> xs;
    std::stringstream ss(x_cols);
    for (std::string s; std::getline(ss, s, ',');) xs.push_back(s);
    const auto n = static_cast<Eigen::Index>(d.rows());
    RegressionData r;
    r.x = Matrix::Ones(n, static_cast<Eigen::Index>(xs.size() + 1));
    r.y = Vector(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < xs.size(); ++j) r.x(i, static_cast<Eigen::Index>(j + 1)) = d.column(xs[j])[i];
      r.y[i] = d.column(y_col)[i];
    }
    r.validate();
    return r;
  }
  std::vector<double> values(const Dataset& d) const {
    std::string col = column;
    std::string w = weights;
    if (d.name == "mosquito") {
      if (col.empty()) col = "died";
      if (w.empty()) w = "count";
    }
    if (col.empty()) col = d.column_names.front();
    const auto& x = d.column(col);
    if (w.empty()) return x;
    const auto& c = d.column(w);
    std::vector<double> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (c[i] < 0 || c[i] != std::floor(c[i])) throw InputError("weights must be whole numbers");
      out.insert(out.end(), static_cast<std::size_t>(c[i]), x[i]);
    }
    return out;
  }
};

struct ModelArgs {
  std::string model;
  double sigma = 1.0;

  void add(CLI::App* c) {
    c->add_option("--model", model, "normal | normal-location | bernoulli")
        ->check(CLI::IsMember({"normal", "normal-location", "bernoulli"}));
    c->add_option("--sigma", sigma, "known sigma for normal-location");
  }
  ModelPtr get(const Dataset* d = nullptr) const {
    std::string m = model;
    if (m.empty()) m = d && d->name == "mosquito" ? "bernoulli" : "normal";
    if (m == "normal") return normal_location_scale();
    if (m == "normal-location") return normal_location(sigma);
    return bernoulli_model();
  }
};

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json quad_json(const QuadratureSpec& q) {
  return {{"abs_tol", q.abs_tol}, {"rel_tol", q.rel_tol}, {"max_subdivisions", q.max_subdivisions}};
}

Json estimate_record(const std::vector<std::string>& names, const EstimateResult& r) {
  Json j = Json::object();
  j["tuning"] = describe(r.tuning);
  for (std::size_t k = 0; k < names.size(); ++k) j[names[k]] = r.theta_hat[static_cast<Eigen::Index>(k)];
  j["objective"] = r.objective_value;
  j["eq_residual_norm"] = r.eq_residual_norm;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["restart_found_lower"] = r.restart_found_lower;
  std::string w;
  for (const auto& s : r.warnings) w += (w.empty() ? "" : "; ") + s;
  j["warnings"] = w;
  return j;
}

std::vector<std::string> regression_names(const RegressionData& d) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) names.push_back("eta" + std::to_string(j));
  names.push_back("sigma");
  return names;
}

Vector vector_of(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

void emit(Report rep, const Global& g, std::chrono::steady_clock::time_point t0) {
  if (g.timing) rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_report(rep, parse_format(g.format), g.out_path());
}

Json trace_json(const std::vector<TraceRow>& rows, const std::string& stage) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back({{"stage", stage},
                 {"beta", r.beta},
                 {"gamma", r.gamma},
                 {"ok", r.ok},
                 {"amse", r.ok ? Json(r.amse.total) : Json(nullptr)},
                 {"error", r.error}});
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum logarithmic phi-DPD estimation, tuning and tests"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--quad-tol", g.quad_tol, "relative quadrature tolerance");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "csv | records")->check(CLI::IsMember({"csv", "records"}));
  app.add_flag("--timing", g.timing, "record runtime in the report");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit one estimator");
  DataArgs fit_data;
  ModelArgs fit_model;
  TuningArgs fit_tuning;
  std::string fit_start = "min-l2";
  std::string fit_init;
  int lms_subsets = 3000;
  fit_data.add(fit_cmd);
  fit_model.add(fit_cmd);
  fit_tuning.add(fit_cmd);
  fit_cmd->add_option("--start", fit_start, "min-l2 | moment | lms | user")
      ->check(CLI::IsMember({"min-l2", "moment", "lms", "user"}));
  fit_cmd->add_option("--init", fit_init, "comma-separated start (with --start user)");
  fit_cmd->add_option("--lms-subsets", lms_subsets, "elemental subsets for the LMS pilot");

  // tune
  auto* tune_cmd = app.add_subcommand("tune", "select tuning parameters by AMSE");
  DataArgs tune_data;
  ModelArgs tune_model;
  TuningConfig tcfg;
  std::string beta_range = "below-alpha", matrices = "empirical", gamma_grid, trace_path;
  bool no_refine = false, keep_pilot = false, sensitivity = false;
  tune_data.add(tune_cmd);
  tune_model.add(tune_cmd);
  tune_cmd->add_option("--alpha-step", tcfg.alpha_step, "Warwick-Jones alpha grid step");
  tune_cmd->add_option("--beta-step", tcfg.beta_step, "beta grid step");
  tune_cmd->add_option("--gamma-grid", gamma_grid, "comma-separated gamma grid");
  tune_cmd->add_option("--beta-range", beta_range, "below-alpha | unit")
      ->check(CLI::IsMember({"below-alpha", "unit"}));
  tune_cmd->add_option("--matrices", matrices, "empirical | model")->check(CLI::IsMember({"empirical", "model"}));
  tune_cmd->add_flag("--no-refine", no_refine, "skip the half-step refinement");
  tune_cmd->add_flag("--keep-pilot", keep_pilot, "do not replace the pilot by the MDPDE at alpha_w");
  tune_cmd->add_flag("--pilot-sensitivity", sensitivity, "also report the choice under the stage-1 pilot");
  tune_cmd->add_option("--lms-subsets", tcfg.lms_subsets, "elemental subsets for the LMS pilot");
  tune_cmd->add_option("--trace", trace_path, "write the AMSE search trace here (csv)");

  // test
  auto* test_cmd = app.add_subcommand("test", "divergence-based hypothesis tests");
  DataArgs test_data;
  ModelArgs test_model;
  TuningArgs test_tuning;
  std::string test_kind = "ddt", null_str, data2_path, data2_column;
  std::size_t mc_draws = 1'000'000;
  test_data.add(test_cmd);
  test_model.add(test_cmd);
  test_tuning.add(test_cmd);
  test_cmd->add_option("--kind", test_kind, "divergence | two-sample | score | ddt | wald")
      ->check(CLI::IsMember({"divergence", "two-sample", "score", "ddt", "wald"}));
  test_cmd->add_option("--null", null_str, "comma-separated null parameter");
  test_cmd->add_option("--data2", data2_path, "second sample CSV (two-sample)");
  test_cmd->add_option("--column2", data2_column, "column of the second sample");
  test_cmd->add_option("--mc-draws", mc_draws, "Monte Carlo draws for the chi-bar law");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo MSE table under a contaminated normal");
  double eps = 0.1, shift = 5.0;
  std::size_t sim_n = 50;
  int reps = 1000;
  std::string sim_betas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string sim_gammas = "0,0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08";
  std::string sim_start = "mle";
  bool sim_mle = false;
  sim_cmd->add_option("--eps", eps, "contamination fraction");
  sim_cmd->add_option("--shift", shift, "contaminating mean");
  sim_cmd->add_option("--n", sim_n, "sample size");
  sim_cmd->add_option("--reps", reps, "replications");
  sim_cmd->add_option("--beta-grid", sim_betas, "comma-separated beta values");
  sim_cmd->add_option("--gamma-grid", sim_gammas, "comma-separated gamma values, 0 = DPD");
  sim_cmd->add_option("--start", sim_start, "mle | min-l2")->check(CLI::IsMember({"mle", "min-l2"}));
  sim_cmd->add_flag("--include-mle", sim_mle, "add the MLE cell");

  // are-table
  auto* are_cmd = app.add_subcommand("are-table", "asymptotic relative efficiency grid (percent)");
  std::string are_betas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string are_gammas = "0,0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08";
  double are_mu = 0.0, are_sigma = 1.0;
  are_cmd->add_option("--beta-grid", are_betas, "comma-separated beta values");
  are_cmd->add_option("--gamma-grid", are_gammas, "comma-separated gamma values, 0 = DPD");
  are_cmd->add_option("--mu", are_mu, "location");
  are_cmd->add_option("--sigma", are_sigma, "known scale");

  // influence
  auto* inf_cmd = app.add_subcommand("influence", "influence curves under N(mu, sigma^2) with known sigma");
  std::string inf_betas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1", inf_gammas = "0.001";
  double inf_mu = 1.0, inf_sigma = 1.0, y_min = -20.0, y_max = 20.0, y_step = 0.1;
  inf_cmd->add_option("--betas", inf_betas, "comma-separated beta values");
  inf_cmd->add_option("--gammas", inf_gammas, "comma-separated gamma values");
  inf_cmd->add_option("--mu", inf_mu, "location");
  inf_cmd->add_option("--sigma", inf_sigma, "known scale");
  inf_cmd->add_option("--y-min", y_min, "grid start");
  inf_cmd->add_option("--y-max", y_max, "grid end");
  inf_cmd->add_option("--y-step", y_step, "grid step");

  // case-study
  auto* cs_cmd = app.add_subcommand("case-study", "real-data pipelines");
  std::string cs_name, cs_data, cs_matrices = "empirical", cs_range = "below-alpha";
  TuningArgs cs_tuning;
  CaseStudyOptions cso;
  cs_cmd->add_option("name", cs_name, "newcomb | short | hertzsprung-russel | salinity | mosquito")
      ->required()
      ->check(CLI::IsMember(case_study_names()));
  cs_cmd->add_option("--data", cs_data, "CSV path overriding the bundled copy");
  cs_cmd->add_option("--beta", cs_tuning.beta, "beta (regression fit or test)");
  cs_cmd->add_option("--gamma", cs_tuning.gamma, "gamma (regression fit or test)");
  cs_cmd->add_flag("--tune", cso.tune_regression, "regression: also select tuning by AMSE");
  cs_cmd->add_option("--lms-subsets", cso.lms_subsets, "elemental subsets for the LMS pilot");
  cs_cmd->add_option("--matrices", cs_matrices, "empirical | model")->check(CLI::IsMember({"empirical", "model"}));
  cs_cmd->add_option("--beta-range", cs_range, "below-alpha | unit")->check(CLI::IsMember({"below-alpha", "unit"}));
  cs_cmd->add_option("--null-p", cso.null_p, "mosquito: null probability");
  cs_cmd->add_option("--mc-draws", cso.mc_draws, "Monte Carlo draws for the chi-bar law");

  // datasets
  auto* ds_cmd = app.add_subcommand("datasets", "list bundled datasets and validate them");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int status = 0;
  // The record is still written; the exit code flags the failed solve.
  auto note_fit = [&](const EstimateResult& r) -> const EstimateResult& {
    if (!r.converged) {
      std::cerr << "numerical failure: fit did not converge (best point reported)\n";
      status = 2;
    }
    return r;
  };
  try {
    const auto q = g.quad();
    if (*fit_cmd) {
      const auto d = fit_data.load();
      Report rep;
      rep.kind = "fit";
      rep.config = {{"data", d.name}, {"seed", g.seed}, {"quadrature", quad_json(q)}, {"start", fit_start}};
      const Tuning t = fit_tuning.get();
      rep.config["tuning"] = describe(t);
      if (fit_data.regression(d)) {
        const auto rd = fit_data.design(d);
        PilotEstimate init;
        if (fit_start == "user") {
          init = {vector_of(parse_list(fit_init, "--init")), PilotEstimate::Method::user};
        } else if (fit_start == "moment") {
          init = {least_squares(rd), PilotEstimate::Method::user};
        } else {
          init = pilot_lms_regression(rd, lms_subsets, g.seed);
        }
        FitOptions fo;
        fo.check_restart = true;
        rep.records.push_back(estimate_record(regression_names(rd), note_fit(fit_nonhomogeneous(rd, t, init, q, fo))));
      } else {
        const auto x = fit_data.values(d);
        const auto m = fit_model.get(&d);
        rep.config["model"] = m->name();
        PilotEstimate init;
        if (fit_start == "user") {
          init = {vector_of(parse_list(fit_init, "--init")), PilotEstimate::Method::user};
        } else if (fit_start == "moment") {
          init = {m->moment_start(x), PilotEstimate::Method::user};
        } else if (fit_start == "lms") {
          throw InputError("--start lms needs a regression design");
        } else {
          init = pilot_min_l2(x, *m, q);
        }
        FitOptions fo;
        fo.check_restart = true;
        rep.records.push_back(estimate_record(m->param_names(), note_fit(fit(x, *m, t, init, q, fo))));
      }
      emit(rep, g, t0);
    } else if (*tune_cmd) {
      const auto d = tune_data.load();
      tcfg.beta_range = beta_range == "unit" ? BetaRange::unit : BetaRange::below_alpha_w;
      tcfg.matrices = matrices == "model" ? AmseMatrices::model : AmseMatrices::empirical;
      tcfg.refine = !no_refine;
      tcfg.update_pilot = !keep_pilot;
      tcfg.pilot_sensitivity = sensitivity;
      tcfg.threads = g.threads;
      tcfg.seed = g.seed;
      if (!gamma_grid.empty()) tcfg.gamma_grid = parse_list(gamma_grid, "--gamma-grid");
      Report rep;
      rep.kind = "tune";
      rep.config = {{"data", d.name},
                    {"seed", g.seed},
                    {"quadrature", quad_json(q)},
                    {"alpha_step", tcfg.alpha_step},
                    {"beta_step", tcfg.beta_step},
                    {"gamma_grid", tcfg.gamma_grid},
                    {"beta_range", beta_range},
                    {"matrices", matrices},
                    {"refine", tcfg.refine},
                    {"update_pilot", tcfg.update_pilot}};
      TuningSelection sel;
      std::vector<std::string> names;
      if (tune_data.regression(d)) {
        const auto rd = tune_data.design(d);
        names = regression_names(rd);
        rep.config["lms_subsets"] = tcfg.lms_subsets;
        sel = select_tuning_regression(rd, q, tcfg);
      } else {
        const auto x = tune_data.values(d);
        const auto m = tune_model.get(&d);
        names = m->param_names();
        rep.config["model"] = m->name();
        sel = select_tuning(x, *m, q, tcfg);
      }
      Json r = Json::object();
      r["alpha_w"] = sel.alpha_w.alpha;
      r["beta"] = sel.chosen.beta;
      r["gamma"] = sel.chosen.gamma;
      r["constraint_satisfied"] = sel.constrained_satisfied;
      r["amse_chosen"] = sel.amse_at_chosen.total;
      r["amse_alpha_w"] = sel.amse_at_alpha_w.total;
      r["pilot_method"] = to_string(sel.stage1_pilot.method);
      for (std::size_t k = 0; k < names.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        r["pilot_" + names[k]] = sel.stage1_pilot.theta_star[i];
        r["mdpde_" + names[k]] = sel.fit_at_alpha_w.theta_hat[i];
        r["mlphide_" + names[k]] = sel.fit_at_chosen.theta_hat[i];
      }
      if (sel.chosen_with_stage1_pilot) {
        r["stage1_pilot_beta"] = sel.chosen_with_stage1_pilot->beta;
        r["stage1_pilot_gamma"] = sel.chosen_with_stage1_pilot->gamma;
      }
      rep.records.push_back(r);
      if (!trace_path.empty()) {
        Report tr;
        tr.kind = "tune-trace";
        tr.config = rep.config;
        for (const auto& j : trace_json(sel.alpha_trace, "alpha")) tr.records.push_back(j);
        for (const auto& j : trace_json(sel.search_trace, "pair")) tr.records.push_back(j);
        write_report(tr, Format::csv, std::filesystem::path(trace_path));
      }
      emit(rep, g, t0);
    } else if (*test_cmd) {
      const auto d = test_data.load();
      const auto m = test_model.get(&d);
      const auto x = test_data.values(d);
      const Tuning tu = test_tuning.get();
      const auto* pair = std::get_if<TuningPair>(&tu);
      if (!pair) throw InputError("tests need --beta and --gamma");
      const ChiBarSpectrum mc{{}, mc_draws, g.seed};
      TestResult r;
      std::optional<Vector> th0;
      if (!null_str.empty()) th0 = vector_of(parse_list(null_str, "--null"));
      auto need_null = [&]() -> const Vector& {
        if (!th0) throw InputError("this test needs --null");
        return *th0;
      };
      if (test_kind == "divergence") {
        r = simple_null_test(x, *m, need_null(), *pair, q, mc);
      } else if (test_kind == "score") {
        r = score_test(x, *m, need_null(), *pair, q, mc);
      } else if (test_kind == "two-sample") {
        if (data2_path.empty()) throw InputError("two-sample needs --data2");
        const auto d2 = ingest_csv(data2_path);
        const auto& y = d2.column(data2_column.empty() ? d2.column_names.front() : data2_column);
        r = two_sample_test(x, y, *m, *pair, q, mc);
      } else if (test_kind == "ddt") {
        const auto* dm = dynamic_cast<const DiscreteModel*>(m.get());
        if (!dm) throw InputError("ddt needs a discrete model");
        const auto pts = dm->points();
        std::vector<double> counts(pts.size(), 0.0);
        for (double v : x) {
          auto it = std::find(pts.begin(), pts.end(), v);
          if (it == pts.end()) throw InputError("observation outside the support");
          counts[static_cast<std::size_t>(it - pts.begin())] += 1.0;
        }
        r = ddt_test(counts, *dm, ConstrainedNull::simple(need_null()), *pair, q, mc);
      } else {
        const Vector n0 = need_null();
        r = wald_test(
            x, *m, [n0](const Vector& t) { return Vector(t - n0); },
            [p = n0.size()](const Vector&) { return Matrix(Matrix::Identity(p, p)); }, *pair, q);
      }
      Report rep;
      rep.kind = "test";
      rep.config = {{"data", d.name},      {"model", m->name()},     {"kind", test_kind},
                    {"tuning", describe(tu)}, {"null", null_str},     {"seed", g.seed},
                    {"mc_draws", mc_draws}, {"quadrature", quad_json(q)}};
      Json rec = Json::object();
      rec["test"] = r.name;
      rec["statistic"] = r.statistic;
      Json lam = Json::array();
      for (double l : r.lambdas) lam.push_back(l);
      rec["lambdas"] = lam;
      rec["rank"] = r.rank_r;
      rec["critical_value_95"] = r.critical_value_95;
      rec["p_value"] = r.p_value;
      rec["reject_5pct"] = r.reject_at_5pct;
      rec["theta_hat"] = vec_json(r.theta_hat);
      rep.records.push_back(rec);
      emit(rep, g, t0);
    } else if (*sim_cmd) {
      SimulationConfig c;
      c.mixture = contaminated_normal(eps, shift);
      c.n = sim_n;
      c.replications = reps;
      c.seed = g.seed;
      c.threads = g.threads;
      c.q = q;
      c.start = sim_start == "mle" ? StartRule::mle : StartRule::min_l2;
      for (double b : parse_list(sim_betas, "--beta-grid"))
        for (double gm : parse_list(sim_gammas, "--gamma-grid"))
          c.grid.push_back(gm == 0.0 ? Tuning(DpdAlpha(b)) : Tuning(TuningPair(b, gm)));
      if (sim_mle) c.grid.push_back(Mle{});
      auto rep = simulate_mse_table(c).to_report("simulate");
      emit(rep, g, t0);
    } else if (*are_cmd) {
      Vector th(1);
      th << are_mu;
      auto t = are_table(*normal_location(are_sigma), th, parse_list(are_betas, "--beta-grid"),
                         parse_list(are_gammas, "--gamma-grid"), q, g.threads);
      emit(t.to_report("are-table"), g, t0);
    } else if (*inf_cmd) {
      std::vector<TuningPair> pairs;
      for (double b : parse_list(inf_betas, "--betas"))
        for (double gm : parse_list(inf_gammas, "--gammas")) pairs.emplace_back(b, gm);
      Vector th(1);
      th << inf_mu;
      auto t = influence_curve_export(*normal_location(inf_sigma), th, pairs, range_list(y_min, y_max, y_step), q);
      emit(t.to_report("influence"), g, t0);
    } else if (*cs_cmd) {
      if (!cs_data.empty()) cso.data_path = cs_data;
      cso.seed = g.seed;
      cso.q = q;
      cso.threads = g.threads;
      cso.matrices = cs_matrices == "model" ? AmseMatrices::model : AmseMatrices::empirical;
      cso.beta_range = cs_range == "unit" ? BetaRange::unit : BetaRange::below_alpha_w;
      if (cs_name == "mosquito") {
        cso.test_pair = cs_tuning.pair(cso.test_pair);
      } else {
        cso.pair = cs_tuning.pair(cso.pair);
      }
      emit(run_case_study(cs_name, cso), g, t0);
    } else if (*ds_cmd) {
      Report rep;
      rep.kind = "datasets";
      rep.config = {{"data_dir", data_dir().string()}};
      for (const auto& b : bundled_datasets()) {
        Json r = Json::object();
        r["name"] = b.name;
        r["file"] = b.file;
        r["expected_rows"] = b.rows;
        try {
          const auto d = load_dataset(b.name);
          r["status"] = "ok";
          r["rows"] = d.rows();
        } catch (const InputError& e) {
          r["status"] = "missing or invalid";
          r["rows"] = nullptr;
        }
        r["provenance"] = b.provenance;
        rep.records.push_back(r);
      }
      emit(rep, g, t0);
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
