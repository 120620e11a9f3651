#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lphi/divergence.hpp"
#include "lphi/models.hpp"

namespace lphi {

struct PilotEstimate {
  enum class Method { min_l2, lms_mad, user };
  Vector theta_star;
  Method method = Method::user;
};
std::string to_string(PilotEstimate::Method m);

struct EstimateResult {
  Vector theta_hat;
  double objective_value = 0.0;
  double eq_residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  Tuning tuning = Mle{};
  // Set when a restart from the MLE reached a strictly lower objective.
  bool restart_found_lower = false;
  std::vector<std::string> warnings;
};

struct FitOptions {
  int max_iterations = 500;
  double step_tol = 1e-8;
  double residual_tol = 1e-6;
  bool check_restart = false;
};

struct RegressionData {
  Matrix x;  // n×p design, intercept column included by the caller
  Vector y;
  void validate() const;
};

// Members of the family share one code path; Tuning picks the member.
// Lφ: ∫C(f) − ΣB'(f(Xᵢ))/n; DPD: ∫f^{1+α} − (1+1/α)Σf^α(Xᵢ)/n; MLE: −Σlog f(Xᵢ)/n.
double empirical_objective(std::span<const double> data, const ParametricModel& m, const Tuning& t,
                           const Vector& theta, const QuadratureSpec& q = {});
// Σ u w(f(Xᵢ))/n − ∫ u w(f) f. The objective's gradient is −s times this
// with s = 1 + α for the DPD and 1 otherwise.
Vector estimating_equation_residual(std::span<const double> data, const ParametricModel& m, const Tuning& t,
                                    const Vector& theta, const QuadratureSpec& q = {});
Vector objective_gradient(std::span<const double> data, const ParametricModel& m, const Tuning& t,
                          const Vector& theta, const QuadratureSpec& q = {});

EstimateResult fit(std::span<const double> data, const ParametricModel& m, const Tuning& t,
                   const PilotEstimate& init, const QuadratureSpec& q = {}, const FitOptions& o = {});
EstimateResult fit_mlphide(std::span<const double> data, const ParametricModel& m, const TuningPair& t,
                           const PilotEstimate& init, const QuadratureSpec& q = {}, const FitOptions& o = {});
EstimateResult fit_mdpde(std::span<const double> data, const ParametricModel& m, const DpdAlpha& a,
                         const PilotEstimate& init, const QuadratureSpec& q = {}, const FitOptions& o = {});

// Non-homogeneous objective H_n = Σᵢ [∫C(fᵢ) − B'(fᵢ(Yᵢ))]/n over one model per observation.
double nonhomogeneous_objective(std::span<const ModelPtr> models, std::span<const double> y, const Tuning& t,
                                const Vector& theta, const QuadratureSpec& q = {});
Vector nonhomogeneous_residual(std::span<const ModelPtr> models, std::span<const double> y, const Tuning& t,
                               const Vector& theta, const QuadratureSpec& q = {});

// Normal linear regression specialisation: the integral terms depend on σ only.
double regression_objective(const RegressionData& d, const Tuning& t, const Vector& theta,
                            const QuadratureSpec& q = {});
Vector regression_residual(const RegressionData& d, const Tuning& t, const Vector& theta,
                           const QuadratureSpec& q = {});
EstimateResult fit_nonhomogeneous(const RegressionData& d, const Tuning& t, const PilotEstimate& init,
                                  const QuadratureSpec& q = {}, const FitOptions& o = {});
std::vector<ModelPtr> regression_models(const RegressionData& d);
// Least squares (η, σ_ML); the MLE for the normal linear model.
Vector least_squares(const RegressionData& d);

PilotEstimate pilot_min_l2(std::span<const double> data, const ParametricModel& m, const QuadratureSpec& q = {});
PilotEstimate pilot_lms_regression(const RegressionData& d, int n_subsets = 3000, std::uint64_t seed = 1);

double median(std::vector<double> v);

}  // namespace lphi
