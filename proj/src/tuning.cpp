#include "lphi/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <tuple>

#include "lphi/asymptotics.hpp"
#include "lphi/errors.hpp"
#include "lphi/parallel.hpp"

namespace lphi {

std::vector<double> TuningConfig::default_gamma_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 10; ++i) g.push_back(i / 100.0);
  for (int i = 2; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

std::vector<double> alpha_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw InputError("alpha grid step must lie in (0, 1]");
  std::vector<double> g;
  const int n = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int i = 0; i <= n; ++i) g.push_back(std::round(i * step * 1e12) / 1e12);
  return g;
}

AmseValue amse(std::span<const double> data, const ParametricModel& m, const Tuning& t, const PilotEstimate& pilot,
               const QuadratureSpec& q, AmseMatrices which, EstimateResult* fit_out) {
  auto r = fit(data, m, t, pilot, q);
  if (!r.converged) throw NumericalError("fit did not converge at " + describe(t));
  const auto mats = which == AmseMatrices::empirical ? matrices_empirical(m, r.theta_hat, data, t, q)
                                                     : matrices_at_model(m, r.theta_hat, t, q);
  AmseValue v;
  v.bias_sq = (r.theta_hat - pilot.theta_star).squaredNorm();
  v.variance_term = mats.sigma.trace() / static_cast<double>(data.size());
  v.total = v.bias_sq + v.variance_term;
  if (fit_out) *fit_out = std::move(r);
  return v;
}

AmseValue amse_regression(const RegressionData& d, const Tuning& t, const PilotEstimate& pilot,
                          const QuadratureSpec& q, AmseMatrices which, EstimateResult* fit_out) {
  auto r = fit_nonhomogeneous(d, t, pilot, q);
  if (!r.converged) throw NumericalError("fit did not converge at " + describe(t));
  const auto models = regression_models(d);
  std::span<const double> y(d.y.data(), static_cast<std::size_t>(d.y.size()));
  Matrix sigma;
  if (which == AmseMatrices::empirical) {
    sigma = nonhom_matrices_empirical(models, y, r.theta_hat, t, q).sigma;
  } else {
    sigma = nonhom_sigma(nonhom_matrices(models, r.theta_hat, {}, t, q));
  }
  AmseValue v;
  v.bias_sq = (r.theta_hat - pilot.theta_star).squaredNorm();
  v.variance_term = sigma.trace() / static_cast<double>(d.y.size());
  v.total = v.bias_sq + v.variance_term;
  if (fit_out) *fit_out = std::move(r);
  return v;
}

namespace {

using AmseFn = std::function<AmseValue(const Tuning&, const PilotEstimate&, EstimateResult*)>;

struct Cell {
  double beta, gamma;
};

std::vector<TraceRow> evaluate_cells(const AmseFn& f, const PilotEstimate& pilot, const std::vector<Cell>& cells,
                                     bool dpd, int threads) {
  std::vector<TraceRow> rows(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    auto& r = rows[i];
    r.beta = cells[i].beta;
    r.gamma = cells[i].gamma;
    try {
      const Tuning t = dpd ? Tuning(DpdAlpha(r.beta)) : Tuning(TuningPair(r.beta, r.gamma));
      r.amse = f(t, pilot, nullptr);
      r.ok = true;
    } catch (const NumericalError& e) {
      r.error = e.what();
    }
  });
  return rows;
}

// Minimum total, ties to the lexicographically smallest (β, γ).
const TraceRow* best_of(const std::vector<TraceRow>& rows, double below = INFINITY) {
  const TraceRow* best = nullptr;
  for (const auto& r : rows) {
    if (!r.ok || !(r.amse.total < below)) continue;
    if (!best || std::tie(r.amse.total, r.beta, r.gamma) < std::tie(best->amse.total, best->beta, best->gamma))
      best = &r;
  }
  return best;
}

double gamma_half_step(const std::vector<double>& grid, double g, int dir) {
  auto it = std::find_if(grid.begin(), grid.end(), [&](double v) { return std::abs(v - g) < 1e-12; });
  if (it == grid.end()) return 0.0;
  if (dir < 0) return it == grid.begin() ? 0.5 * *it : 0.5 * (*it - *(it - 1));
  return it + 1 == grid.end() ? 0.0 : 0.5 * (*(it + 1) - *it);
}

struct Stage3 {
  std::vector<TraceRow> trace;
  const TraceRow* best = nullptr;
  bool feasible = false;
};

// Grid over β in the range, every γ in the grid, then one step-halving pass.
Stage3 search(const AmseFn& f, const PilotEstimate& pilot, const TuningConfig& cfg, double beta_hi, bool beta_hi_open, double bound) {
  Stage3 s;
  std::vector<Cell> cells;
  auto in_beta = [&](double b) { return b > 1e-12 && (beta_hi_open ? b < beta_hi - 1e-12 : b <= beta_hi + 1e-12); };
  for (int i = 1;; ++i) {
    const double b = std::round(i * cfg.beta_step * 1e12) / 1e12;
    if (!in_beta(b)) break;
    for (double g : cfg.gamma_grid) cells.push_back({b, g});
  }
  s.trace = evaluate_cells(f, pilot, cells, false, cfg.threads);
  const TraceRow* best = best_of(s.trace, bound);
  if (best && cfg.refine) {
    const double b0 = best->beta, g0 = best->gamma, hb = 0.5 * cfg.beta_step;
    std::vector<Cell> extra;
    for (int db = -1; db <= 1; ++db) {
      for (int dg = -1; dg <= 1; ++dg) {
        if (db == 0 && dg == 0) continue;
        const double b = std::round((b0 + db * hb) * 1e12) / 1e12;
        const double hg = dg == 0 ? 0.0 : gamma_half_step(cfg.gamma_grid, g0, dg);
        if (dg != 0 && hg == 0.0) continue;
        const double g = std::round((g0 + dg * hg) * 1e12) / 1e12;
        if (!in_beta(b) || !(g > 0.0 && g <= 1.0)) continue;
        extra.push_back({b, g});
      }
    }
    auto more = evaluate_cells(f, pilot, extra, false, cfg.threads);
    s.trace.insert(s.trace.end(), more.begin(), more.end());
  }
  s.best = best_of(s.trace, bound);
  s.feasible = s.best != nullptr;
  return s;
}

struct Choice {
  TuningPair pair{1.0, 1.0};
  AmseValue value;
  bool constrained = false;
  std::vector<TraceRow> trace;
};

Choice choose(const AmseFn& f, const PilotEstimate& pilot, const TuningConfig& cfg, double alpha_w, double bound) {
  Choice c;
  const bool unit = cfg.beta_range == BetaRange::unit;
  auto s = search(f, pilot, cfg, unit ? 1.0 : alpha_w, !unit, bound);
  c.trace = s.trace;
  if (s.feasible) {
    c.pair = TuningPair(s.best->beta, s.best->gamma);
    c.value = s.best->amse;
    c.constrained = true;
    return c;
  }
  // Unrestricted minimisation over (0, 1) × (0, 1].
  auto u = search(f, pilot, cfg, 1.0, true, INFINITY);
  c.trace.insert(c.trace.end(), u.trace.begin(), u.trace.end());
  if (!u.best) throw NumericalError("tuning: every grid cell failed");
  c.pair = TuningPair(u.best->beta, u.best->gamma);
  c.value = u.best->amse;
  return c;
}

DpdAlpha alpha_by_amse(const AmseFn& f, const PilotEstimate& pilot, std::span<const double> grid, int threads,
                       std::vector<TraceRow>* trace) {
  std::vector<Cell> cells;
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw InputError("alpha grid must lie in [0, 1]");
    cells.push_back({a, 0.0});
  }
  auto rows = evaluate_cells(f, pilot, cells, true, threads);
  const TraceRow* best = best_of(rows);
  if (!best) throw NumericalError("Warwick-Jones: every fit failed");
  const DpdAlpha out(best->beta);
  if (trace) *trace = std::move(rows);
  return out;
}

TuningSelection select_with(const AmseFn& f, const PilotEstimate& stage1, const TuningConfig& cfg) {
  TuningSelection sel;
  sel.stage1_pilot = stage1;
  const auto grid = alpha_grid(cfg.alpha_step);
  sel.alpha_w = alpha_by_amse(f, sel.stage1_pilot, grid, cfg.threads, &sel.alpha_trace);

  f(sel.alpha_w, sel.stage1_pilot, &sel.fit_at_alpha_w);
  sel.pilot = cfg.update_pilot ? PilotEstimate{sel.fit_at_alpha_w.theta_hat, sel.stage1_pilot.method} : sel.stage1_pilot;
  sel.amse_at_alpha_w = f(sel.alpha_w, sel.pilot, nullptr);

  auto c = choose(f, sel.pilot, cfg, sel.alpha_w.alpha, sel.amse_at_alpha_w.total);
  sel.chosen = c.pair;
  sel.amse_at_chosen = c.value;
  sel.constrained_satisfied = c.constrained;
  sel.search_trace = std::move(c.trace);
  f(sel.chosen, sel.pilot, &sel.fit_at_chosen);

  if (cfg.pilot_sensitivity && cfg.update_pilot) {
    const double bound = f(sel.alpha_w, sel.stage1_pilot, nullptr).total;
    sel.chosen_with_stage1_pilot = choose(f, sel.stage1_pilot, cfg, sel.alpha_w.alpha, bound).pair;
  }
  return sel;
}

}  // namespace

DpdAlpha warwick_jones_alpha(std::span<const double> data, const ParametricModel& m, const PilotEstimate& pilot,
                             const QuadratureSpec& q, std::span<const double> grid, int threads,
                             std::vector<TraceRow>* trace, AmseMatrices which) {
  const AmseFn f = [&](const Tuning& t, const PilotEstimate& p, EstimateResult* out) {
    return amse(data, m, t, p, q, which, out);
  };
  return alpha_by_amse(f, pilot, grid, threads, trace);
}

TuningSelection select_tuning(std::span<const double> data, const ParametricModel& m, const QuadratureSpec& q,
                              const TuningConfig& cfg) {
  const AmseFn f = [&](const Tuning& t, const PilotEstimate& p, EstimateResult* out) {
    return amse(data, m, t, p, q, cfg.matrices, out);
  };
  return select_with(f, cfg.stage1_pilot ? *cfg.stage1_pilot : pilot_min_l2(data, m, q), cfg);
}

TuningSelection select_tuning_regression(const RegressionData& d, const QuadratureSpec& q, const TuningConfig& cfg) {
  d.validate();
  const AmseFn f = [&](const Tuning& t, const PilotEstimate& p, EstimateResult* out) {
    return amse_regression(d, t, p, q, cfg.matrices, out);
  };
  return select_with(f, cfg.stage1_pilot ? *cfg.stage1_pilot : pilot_lms_regression(d, cfg.lms_subsets, cfg.seed), cfg);
}

}  // namespace lphi
