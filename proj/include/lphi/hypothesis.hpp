#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lphi/estimation.hpp"

namespace lphi {

// Σλᵢ Zᵢ² calibrated by seeded Monte Carlo.
struct ChiBarSpectrum {
  std::vector<double> lambdas;
  std::size_t mc_draws = 1'000'000;
  std::uint64_t seed = 1;
};

struct TestResult {
  std::string name;
  double statistic = 0.0;
  std::vector<double> lambdas;
  int rank_r = 0;
  double p_value = 1.0;
  double critical_value_95 = 0.0;
  bool reject_at_5pct = false;
  Vector theta_hat;
  Vector theta_null;
};

struct ConstrainedNull {
  std::optional<Vector> theta0;  // simple null
  std::function<Vector(const Vector&)> b;
  std::function<Matrix(const Vector&)> b_jacobian;
  Vector xi_start;

  static ConstrainedNull simple(Vector theta0);
  static ConstrainedNull composite(std::function<Vector(const Vector&)> b,
                                   std::function<Matrix(const Vector&)> b_jacobian, Vector xi_start);
};

double chibar_quantile(const ChiBarSpectrum& spec, double prob);
double chibar_tail(const ChiBarSpectrum& spec, double x);

// d(f_θ₁, f_θ₂) summed over a finite support or integrated over the union
// of both windows.
double model_divergence(const ParametricModel& m, const Vector& theta1, const Vector& theta2, const TuningPair& t,
                        const QuadratureSpec& q = {});

// Hessian of θ ↦ d(f_θ, f_θ₀) at θ₀ through the identity A = ∫uuᵀ f^{2+β}φ.
Matrix a_matrix(const ParametricModel& m, const Vector& theta0, const TuningPair& t, const QuadratureSpec& q = {});
// The same Hessian by central differences of the divergence itself.
Matrix a_matrix_numeric(const ParametricModel& m, const Vector& theta0, const TuningPair& t,
                        const QuadratureSpec& q = {}, double rel_step = 1e-3);

// Nonzero eigenvalues of A·S.
std::vector<double> spectrum(const Matrix& a, const Matrix& s);

TestResult simple_null_test(std::span<const double> data, const ParametricModel& m, const Vector& theta0,
                            const TuningPair& t, const QuadratureSpec& q, const ChiBarSpectrum& mc,
                            std::optional<PilotEstimate> init = std::nullopt);
TestResult two_sample_test(std::span<const double> data1, std::span<const double> data2, const ParametricModel& m,
                           const TuningPair& t, const QuadratureSpec& q, const ChiBarSpectrum& mc);
TestResult score_test(std::span<const double> data, const ParametricModel& m, const Vector& theta0,
                      const TuningPair& t, const QuadratureSpec& q, const ChiBarSpectrum& mc);
// counts[i] is the frequency of dmodel.points()[i].
TestResult ddt_test(std::span<const double> counts, const DiscreteModel& dm, const ConstrainedNull& null,
                    const TuningPair& t, const QuadratureSpec& q, const ChiBarSpectrum& mc);
TestResult wald_test(std::span<const double> data, const ParametricModel& m,
                     const std::function<Vector(const Vector&)>& restriction,
                     const std::function<Matrix(const Vector&)>& jacobian, const TuningPair& t,
                     const QuadratureSpec& q = {}, std::optional<PilotEstimate> init = std::nullopt);

// Observations implied by counts over the support.
std::vector<double> expand_counts(std::span<const double> counts, const FiniteSet& points);

}  // namespace lphi
