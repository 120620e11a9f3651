#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lphi/divergence.hpp"
#include "lphi/models.hpp"

namespace lphi {

struct AsymptoticMatrices {
  Matrix J;
  Matrix K;
  Vector zeta;
  Matrix sigma;  // J⁻¹KJ⁻¹
  double j_condition = 1.0;
};

struct NonHomAsymptotics {
  std::vector<Matrix> J_i;
  std::vector<Vector> xi_i;
  Matrix Psi_n;
  Matrix Omega_n;
};

// J = ∫uuᵀ w f, ζ = ∫u w f, K = ∫uuᵀ w² f − ζζᵀ, with w the downweighting factor.
AsymptoticMatrices matrices_at_model(const ParametricModel& m, const Vector& theta, const Tuning& t,
                                     const QuadratureSpec& q = {});
// Against a true density g, integrated over the model's window:
// J = ∫uuᵀ w f − ∫ w[∇u + c uuᵀ](g − f), ζ = ∫u w g, K = ∫uuᵀ w² g − ζζᵀ.
AsymptoticMatrices matrices_general(const ParametricModel& m, const Vector& theta, const DensityFn& g,
                                    const Tuning& t, const QuadratureSpec& q = {});
// Same with g replaced by the empirical distribution of data.
AsymptoticMatrices matrices_empirical(const ParametricModel& m, const Vector& theta, std::span<const double> data,
                                      const Tuning& t, const QuadratureSpec& q = {});

// κ = −[∇u + (1 + fφ'/φ)uuᵀ] at a point.
Matrix kappa(const ParametricModel& m, const Vector& theta, const TuningPair& t, double x);

Matrix fisher_information(const ParametricModel& m, const Vector& theta, const QuadratureSpec& q = {});

// (1/I)/Σ for a scalar parameter.
double are_vs_mle(const ParametricModel& m, const Vector& theta, const Tuning& t, const QuadratureSpec& q = {});

// J⁻¹[u(y) w(f(y)) − ζ] with w carrying the 1/γ factor of B''.
Vector influence_function(const ParametricModel& m, const Vector& theta, const TuningPair& t, double y,
                          const QuadratureSpec& q = {});
// The displayed form with log(1 + γ/f) in place of (1/γ)log(1 + γ/f).
Vector influence_function_unscaled(const ParametricModel& m, const Vector& theta, const TuningPair& t, double y,
                                   const QuadratureSpec& q = {});

// One model per observation; trues empty means "at the model".
NonHomAsymptotics nonhom_matrices(std::span<const ModelPtr> models, const Vector& theta,
                                  std::span<const DensityFn> trues, const Tuning& t, const QuadratureSpec& q = {});
Matrix nonhom_sigma(const NonHomAsymptotics& a);

// Plug-in Ψ̂ (in J) and Ω̂ (in K) with each gᵢ replaced by its observation:
// Ω̂ is the sample covariance of Uᵢ = uᵢ(Yᵢ)w(fᵢ(Yᵢ)) − ∫uᵢ w fᵢ.
AsymptoticMatrices nonhom_matrices_empirical(std::span<const ModelPtr> models, std::span<const double> y,
                                             const Vector& theta, const Tuning& t, const QuadratureSpec& q = {});

}  // namespace lphi
