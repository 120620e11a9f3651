#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lphi/quadrature.hpp"
#include "lphi/rng.hpp"

namespace lphi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Interval {
  double lo;
  double hi;
};
using FiniteSet = std::vector<double>;
using Support = std::variant<Interval, FiniteSet>;

// How the optimizer maps a coordinate to an unconstrained one.
enum class ParamKind { free, positive, unit };

class ParametricModel {
 public:
  virtual ~ParametricModel() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> param_names() const = 0;
  virtual std::vector<ParamKind> param_kinds() const = 0;

  // Throws DomainError when theta is outside the parameter space.
  virtual void check(const Vector& theta) const = 0;

  virtual double density(const Vector& theta, double x) const = 0;
  virtual double log_density(const Vector& theta, double x) const = 0;
  virtual Vector score(const Vector& theta, double x) const = 0;
  virtual Matrix score_jacobian(const Vector& theta, double x) const = 0;

  // Interval (continuous, full support) or the finite support.
  virtual Support support(const Vector& theta) const = 0;
  // Integration window used when QuadratureSpec does not override it.
  virtual Interval default_truncation(const Vector& theta) const = 0;

  virtual double sample(const Vector& theta, Rng& rng) const = 0;

  // Cheap consistent start computed from raw data.
  virtual Vector moment_start(std::span<const double> data) const = 0;
  // Start that ignores gross outliers; defaults to moment_start.
  virtual Vector robust_start(std::span<const double> data) const { return moment_start(data); }
};

using ModelPtr = std::shared_ptr<const ParametricModel>;

class DiscreteModel : public ParametricModel {
 public:
  virtual FiniteSet points() const = 0;
  double pmf(const Vector& theta, double x) const { return density(theta, x); }
  Support support(const Vector&) const override { return points(); }
  Interval default_truncation(const Vector&) const override;
};

using DiscreteModelPtr = std::shared_ptr<const DiscreteModel>;

ModelPtr normal_location(double sigma_fixed);
ModelPtr normal_location_scale();
// y ~ N(xᵀη, σ²) with θ = (η, σ).
ModelPtr regression_observation_model(const Vector& x);
DiscreteModelPtr bernoulli_model();

struct MixtureComponent {
  double weight;
  ModelPtr model;
  Vector theta;
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;
  void validate() const;
  double density(double x) const;
};

// (1−ε)·N(0,1) + ε·N(shift,1).
MixtureSpec contaminated_normal(double eps, double shift);

std::vector<double> mixture_sampler(const MixtureSpec& spec, std::size_t n, std::uint64_t seed);
std::vector<double> mixture_sampler(const MixtureSpec& spec, std::size_t n, Rng& rng);

// The window to integrate a model over: the override in q if present.
Interval integration_window(const ParametricModel& m, const Vector& theta, const QuadratureSpec& q);

// ∫ h(x, f_θ(x)) dx over the model support, or the sum over a finite one.
template <class V, class H>
V integrate_model(const ParametricModel& m, const Vector& theta, H&& h, const QuadratureSpec& q) {
  auto sup = m.support(theta);
  if (auto pts = std::get_if<FiniteSet>(&sup)) {
    V acc = h((*pts)[0], m.density(theta, (*pts)[0]));
    for (std::size_t i = 1; i < pts->size(); ++i) acc += h((*pts)[i], m.density(theta, (*pts)[i]));
    return acc;
  }
  const auto w = integration_window(m, theta, q);
  const auto br = even_breaks(w.lo, w.hi, 8);
  auto f = [&](double x) -> V { return h(x, m.density(theta, x)); };
  return integrate<V>(f, std::span<const double>(br), q.abs_tol, q.rel_tol, std::max(q.max_subdivisions, 8))
      .value;
}

}  // namespace lphi
