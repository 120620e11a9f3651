#include "lphi/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "lphi/asymptotics.hpp"
#include "lphi/errors.hpp"
#include "lphi/parallel.hpp"
#include "lphi/rng.hpp"

namespace lphi {

void SimulationConfig::validate() const {
  mixture.validate();
  if (!model) throw InputError("simulation: no model");
  if (replications < 1) throw InputError("simulation: replications must be at least 1");
  if (n < 1) throw InputError("simulation: n must be positive");
  if (grid.empty()) throw InputError("simulation: empty tuning grid");
  if (target.size() != static_cast<Eigen::Index>(model->dim())) throw InputError("simulation: target dimension");
  q.validate();
}

namespace {

Json tuning_json(const Tuning& t) { return describe(t); }

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json quad_json(const QuadratureSpec& q) {
  Json j = Json::object();
  j["abs_tol"] = q.abs_tol;
  j["rel_tol"] = q.rel_tol;
  j["max_subdivisions"] = q.max_subdivisions;
  if (q.support_truncation) j["truncation"] = {q.support_truncation->first, q.support_truncation->second};
  return j;
}

}  // namespace

Json SimulationConfig::to_json() const {
  Json j = Json::object();
  Json mix = Json::array();
  for (const auto& c : mixture.components)
    mix.push_back({{"weight", c.weight}, {"model", c.model->name()}, {"theta", vec_json(c.theta)}});
  j["mixture"] = mix;
  j["model"] = model->name();
  j["n"] = n;
  j["replications"] = replications;
  j["seed"] = seed;
  Json g = Json::array();
  for (const auto& t : grid) g.push_back(tuning_json(t));
  j["grid"] = g;
  j["target"] = vec_json(target);
  j["start"] = start == StartRule::mle ? "mle" : "min_l2";
  j["quadrature"] = quad_json(q);
  return j;
}

std::pair<std::string, std::string> table_position(const Tuning& t) {
  if (auto p = std::get_if<TuningPair>(&t)) return {label(p->beta), label(p->gamma)};
  if (auto a = std::get_if<DpdAlpha>(&t)) return {label(a->alpha), "0"};
  return {"0", "0"};
}

namespace {

// Labels in numeric order without duplicates.
std::vector<std::string> sorted_labels(std::vector<std::string> v) {
  std::sort(v.begin(), v.end(), [](const std::string& a, const std::string& b) { return std::stod(a) < std::stod(b); });
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t index_of(const std::vector<std::string>& v, const std::string& s) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), s) - v.begin());
}

}  // namespace

ReportTable simulate_mse_table(const SimulationConfig& cfg) {
  cfg.validate();
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  std::vector<std::vector<double>> samples(reps);
  parallel_for(reps, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, r);
    samples[r] = mixture_sampler(cfg.mixture, cfg.n, rng);
  });
  // Starting points depend on the sample only, so they are shared by all cells.
  std::vector<std::optional<PilotEstimate>> starts(reps);
  std::vector<std::string> start_errors(reps);
  parallel_for(reps, cfg.threads, [&](std::size_t r) {
    try {
      if (cfg.start == StartRule::mle) {
        starts[r] = PilotEstimate{cfg.model->moment_start(samples[r]), PilotEstimate::Method::user};
      } else {
        starts[r] = pilot_min_l2(samples[r], *cfg.model, cfg.q);
      }
    } catch (const NumericalError& e) {
      start_errors[r] = e.what();
    }
  });

  const std::size_t cells = cfg.grid.size();
  std::vector<double> sq(cells * reps, 0.0);
  std::vector<char> ok(cells * reps, 0);
  parallel_for(cells * reps, cfg.threads, [&](std::size_t k) {
    const std::size_t c = k / reps, r = k % reps;
    if (!starts[r]) return;
    try {
      auto fit_r = fit(samples[r], *cfg.model, cfg.grid[c], *starts[r], cfg.q);
      if (!fit_r.converged) return;
      sq[k] = (fit_r.theta_hat - cfg.target).squaredNorm();
      ok[k] = 1;
    } catch (const NumericalError&) {
    }
  });

  ReportTable t;
  t.value_name = "mse";
  t.seed = cfg.seed;
  t.config = cfg.to_json();
  std::vector<std::string> rows, cols;
  for (const auto& g : cfg.grid) {
    auto [r, c] = table_position(g);
    rows.push_back(r);
    cols.push_back(c);
  }
  t.row_labels = sorted_labels(rows);
  t.column_labels = sorted_labels(cols);
  t.cells.assign(t.row_labels.size(), std::vector<TableCell>(t.column_labels.size()));
  for (std::size_t c = 0; c < cells; ++c) {
    auto [rl, cl] = table_position(cfg.grid[c]);
    auto& cell = t.cells[index_of(t.row_labels, rl)][index_of(t.column_labels, cl)];
    if (!cell.tag.empty()) throw InputError("simulation: duplicate grid cell " + describe(cfg.grid[c]));
    double sum = 0.0;
    int good = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!ok[c * reps + r]) continue;
      sum += sq[c * reps + r];
      ++good;
    }
    cell.attempts = cfg.replications;
    cell.failures = cfg.replications - good;
    cell.tag = "reps=" + std::to_string(good);
    cell.unreliable = cell.failures > 0.01 * cfg.replications;
    cell.ok = good > 0;
    cell.value = good > 0 ? sum / good : 0.0;
    if (!cell.ok) cell.error = "every replication failed";
  }
  return t;
}

ReportTable are_table(const ParametricModel& m, const Vector& theta, const std::vector<double>& betas,
                      const std::vector<double>& gammas, const QuadratureSpec& q, int threads) {
  if (betas.empty() || gammas.empty()) throw InputError("are_table: empty grid");
  for (double b : betas)
    if (!(b > 0.0 && b <= 1.0)) throw InputError("are_table: beta must lie in (0, 1]");
  for (double g : gammas)
    if (!(g >= 0.0 && g <= 1.0)) throw InputError("are_table: gamma must lie in [0, 1]");
  m.check(theta);
  ReportTable t;
  t.value_name = "are_percent";
  for (double b : betas) t.row_labels.push_back(label(b));
  for (double g : gammas) t.column_labels.push_back(label(g));
  t.cells.assign(betas.size(), std::vector<TableCell>(gammas.size()));
  parallel_for(betas.size() * gammas.size(), threads, [&](std::size_t k) {
    const std::size_t i = k / gammas.size(), j = k % gammas.size();
    auto& cell = t.cells[i][j];
    cell.tag = "analytic";
    cell.attempts = 1;
    try {
      const Tuning tu = gammas[j] == 0.0 ? Tuning(DpdAlpha(betas[i])) : Tuning(TuningPair(betas[i], gammas[j]));
      cell.value = 100.0 * are_vs_mle(m, theta, tu, q);
    } catch (const NumericalError& e) {
      cell.ok = false;
      cell.failures = 1;
      cell.error = e.what();
    }
  });
  Json cfg = Json::object();
  cfg["model"] = m.name();
  cfg["theta"] = vec_json(theta);
  cfg["betas"] = betas;
  cfg["gammas"] = gammas;
  cfg["quadrature"] = quad_json(q);
  t.config = cfg;
  return t;
}

ReportTable influence_curve_export(const ParametricModel& m, const Vector& theta, const std::vector<TuningPair>& pairs,
                                   const std::vector<double>& ys, const QuadratureSpec& q) {
  if (pairs.empty() || ys.empty()) throw InputError("influence: empty grid");
  for (double y : ys)
    if (!std::isfinite(y)) throw InputError("influence: y grid must be finite");
  m.check(theta);
  const auto names = m.param_names();
  ReportTable t;
  t.row_name = "y";
  t.column_name = "series";
  t.value_name = "influence";
  for (double y : ys) t.row_labels.push_back(label(y));
  for (const auto& p : pairs)
    for (std::size_t k = 0; k < m.dim(); ++k)
      t.column_labels.push_back(describe(p) + (m.dim() > 1 ? "," + names[k] : ""));
  t.cells.assign(ys.size(), std::vector<TableCell>(t.column_labels.size()));
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const Vector v = influence_function(m, theta, pairs[j], ys[i], q);
      for (std::size_t k = 0; k < m.dim(); ++k) {
        auto& cell = t.cells[i][j * m.dim() + k];
        cell.value = v[static_cast<Eigen::Index>(k)];
        cell.tag = "analytic";
        cell.attempts = 1;
      }
    }
  }
  Json cfg = Json::object();
  cfg["model"] = m.name();
  cfg["theta"] = vec_json(theta);
  Json ps = Json::array();
  for (const auto& p : pairs) ps.push_back(describe(p));
  cfg["pairs"] = ps;
  cfg["y"] = ys;
  cfg["quadrature"] = quad_json(q);
  t.config = cfg;
  return t;
}

}  // namespace lphi
