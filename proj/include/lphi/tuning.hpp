#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lphi/estimation.hpp"

namespace lphi {

struct AmseValue {
  double bias_sq = 0.0;
  double variance_term = 0.0;
  double total = 0.0;
};

// Which J and K enter the variance term.
enum class AmseMatrices { empirical, model };

struct TraceRow {
  double beta = 0.0;  // α for the Warwick–Jones stage
  double gamma = 0.0;
  bool ok = false;
  AmseValue amse;
  std::string error;
};

enum class BetaRange { below_alpha_w, unit };

struct TuningConfig {
  double alpha_step = 0.02;
  double beta_step = 0.05;
  std::vector<double> gamma_grid = default_gamma_grid();
  bool refine = true;
  BetaRange beta_range = BetaRange::below_alpha_w;
  bool update_pilot = true;
  bool pilot_sensitivity = false;
  AmseMatrices matrices = AmseMatrices::empirical;
  std::optional<PilotEstimate> stage1_pilot;  // default: minimum L2, or LMS for regression
  int lms_subsets = 3000;
  std::uint64_t seed = 1;
  int threads = 1;

  static std::vector<double> default_gamma_grid();
};

struct TuningSelection {
  DpdAlpha alpha_w{0.0};
  TuningPair chosen{1.0, 1.0};
  AmseValue amse_at_chosen;
  AmseValue amse_at_alpha_w;
  bool constrained_satisfied = false;
  std::vector<TraceRow> search_trace;
  std::vector<TraceRow> alpha_trace;
  PilotEstimate stage1_pilot;
  PilotEstimate pilot;
  EstimateResult fit_at_alpha_w;
  EstimateResult fit_at_chosen;
  // Pair chosen when the stage-1 pilot is kept; filled on request.
  std::optional<TuningPair> chosen_with_stage1_pilot;
};

// (θ̂ − θ*)ᵀ(θ̂ − θ*) + tr(J⁻¹KJ⁻¹)/n at the fit started from the pilot.
AmseValue amse(std::span<const double> data, const ParametricModel& m, const Tuning& t, const PilotEstimate& pilot,
               const QuadratureSpec& q = {}, AmseMatrices which = AmseMatrices::empirical,
               EstimateResult* fit_out = nullptr);

// Regression analog through the non-homogeneous sandwich Ψₙ⁻¹ΩₙΨₙ⁻¹.
AmseValue amse_regression(const RegressionData& d, const Tuning& t, const PilotEstimate& pilot,
                          const QuadratureSpec& q = {}, AmseMatrices which = AmseMatrices::empirical,
                          EstimateResult* fit_out = nullptr);

std::vector<double> alpha_grid(double step);

DpdAlpha warwick_jones_alpha(std::span<const double> data, const ParametricModel& m, const PilotEstimate& pilot,
                             const QuadratureSpec& q, std::span<const double> grid, int threads = 1,
                             std::vector<TraceRow>* trace = nullptr, AmseMatrices which = AmseMatrices::empirical);

TuningSelection select_tuning(std::span<const double> data, const ParametricModel& m, const QuadratureSpec& q = {},
                              const TuningConfig& config = {});

TuningSelection select_tuning_regression(const RegressionData& d, const QuadratureSpec& q = {},
                                         const TuningConfig& config = {});

}  // namespace lphi
