#pragma once

#include <functional>
#include <string>
#include <variant>

#include "lphi/quadrature.hpp"

namespace lphi {

struct TuningPair {
  double beta;
  double gamma;
  TuningPair(double beta, double gamma);
};

struct DpdAlpha {
  double alpha;
  explicit DpdAlpha(double alpha);
};

struct Mle {};

// Which member of the family an estimate came from.
using Tuning = std::variant<TuningPair, DpdAlpha, Mle>;
std::string describe(const Tuning& t);

double phi(double x, double gamma);
double b_second(double x, const TuningPair& t);

// B'(x) = (1/γ)∫₀ˣ s^β log(1+γ/s) ds.
double b_prime(double x, const TuningPair& t, const QuadratureSpec& q = {});
// B(x) = (1/γ)∫₀ˣ (x−s) s^β log(1+γ/s) ds.
double b_value(double x, const TuningPair& t, const QuadratureSpec& q = {});
// C(x) = xB'(x) − B(x) = (1/γ)∫₀ˣ s^{1+β} log(1+γ/s) ds.
double c_value(double x, const TuningPair& t, const QuadratureSpec& q = {});

double bregman_pointwise(double g, double f, const TuningPair& t, const QuadratureSpec& q = {});

using DensityFn = std::function<double(double)>;

// These integrate over q.support_truncation, which must be set.
double divergence(const DensityFn& g, const DensityFn& f, const TuningPair& t, const QuadratureSpec& q);
double dpd_divergence(const DensityFn& g, const DensityFn& f, const DpdAlpha& a, const QuadratureSpec& q);
double kullback_leibler(const DensityFn& g, const DensityFn& f, const QuadratureSpec& q);

// Tight settings used for B', B, C when they sit inside an outer integral.
QuadratureSpec inner_spec();

// Downweighting factor w(f) = f·B''(f) up to a constant, and its
// elasticity c(f) = f·w'(f)/w(f). The estimating equation of every member
// of the family is Σ u w(f(Xᵢ))/n = ∫ u w(f) f.
struct Weighting {
  enum class Kind { likelihood, dpd, lphi };
  Kind kind;
  double beta = 0.0;  // α for the DPD
  double gamma = 0.0;

  static Weighting from(const Tuning& t);
  double weight(double f) const;
  double elasticity(double f) const;
};

}  // namespace lphi
