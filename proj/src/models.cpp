#include "lphi/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lphi/errors.hpp"

namespace lphi {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double mean_of(std::span<const double> d) {
  if (d.empty()) throw InputError("empty data");
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double hi = *mid;
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

double mad_of(std::span<const double> d, double med) {
  std::vector<double> a(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) a[i] = std::abs(d[i] - med);
  return 1.4826 * median_of(std::move(a));
}

double sd_of(std::span<const double> d) {
  const double m = mean_of(d);
  double s = 0.0;
  for (double v : d) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(d.size()));
}

double normal_log_density(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

class NormalLocation final : public ParametricModel {
 public:
  explicit NormalLocation(double sigma) : sigma_(sigma) {}

  std::size_t dim() const override { return 1; }
  std::string name() const override { return "normal-location"; }
  std::vector<std::string> param_names() const override { return {"mu"}; }
  std::vector<ParamKind> param_kinds() const override { return {ParamKind::free}; }
  void check(const Vector& th) const override {
    if (th.size() != 1 || !std::isfinite(th[0])) throw DomainError("normal-location: bad parameter");
  }
  double density(const Vector& th, double x) const override { return std::exp(log_density(th, x)); }
  double log_density(const Vector& th, double x) const override { return normal_log_density(x, th[0], sigma_); }
  Vector score(const Vector& th, double x) const override {
    Vector u(1);
    u[0] = (x - th[0]) / (sigma_ * sigma_);
    return u;
  }
  Matrix score_jacobian(const Vector&, double) const override {
    Matrix j(1, 1);
    j(0, 0) = -1.0 / (sigma_ * sigma_);
    return j;
  }
  Support support(const Vector&) const override { return Interval{-INFINITY, INFINITY}; }
  Interval default_truncation(const Vector& th) const override {
    return {th[0] - 10.0 * sigma_, th[0] + 10.0 * sigma_};
  }
  double sample(const Vector& th, Rng& rng) const override { return th[0] + sigma_ * rng.normal(); }
  Vector moment_start(std::span<const double> d) const override {
    Vector v(1);
    v[0] = mean_of(d);
    return v;
  }
  Vector robust_start(std::span<const double> d) const override {
    Vector v(1);
    v[0] = median_of({d.begin(), d.end()});
    return v;
  }

 private:
  double sigma_;
};

class NormalLocationScale final : public ParametricModel {
 public:
  std::size_t dim() const override { return 2; }
  std::string name() const override { return "normal"; }
  std::vector<std::string> param_names() const override { return {"mu", "sigma"}; }
  std::vector<ParamKind> param_kinds() const override { return {ParamKind::free, ParamKind::positive}; }
  void check(const Vector& th) const override {
    if (th.size() != 2 || !std::isfinite(th[0]) || !std::isfinite(th[1]))
      throw DomainError("normal: bad parameter");
    if (!(th[1] > 0.0)) throw DomainError("normal: sigma must be positive");
  }
  double density(const Vector& th, double x) const override { return std::exp(log_density(th, x)); }
  double log_density(const Vector& th, double x) const override {
    if (!(th[1] > 0.0)) throw DomainError("normal: sigma must be positive");
    return normal_log_density(x, th[0], th[1]);
  }
  Vector score(const Vector& th, double x) const override {
    const double r = x - th[0], s = th[1];
    Vector u(2);
    u << r / (s * s), r * r / (s * s * s) - 1.0 / s;
    return u;
  }
  Matrix score_jacobian(const Vector& th, double x) const override {
    const double r = x - th[0], s = th[1], s2 = s * s;
    Matrix j(2, 2);
    j << -1.0 / s2, -2.0 * r / (s2 * s), -2.0 * r / (s2 * s), -3.0 * r * r / (s2 * s2) + 1.0 / s2;
    return j;
  }
  Support support(const Vector&) const override { return Interval{-INFINITY, INFINITY}; }
  Interval default_truncation(const Vector& th) const override {
    return {th[0] - 10.0 * th[1], th[0] + 10.0 * th[1]};
  }
  double sample(const Vector& th, Rng& rng) const override { return th[0] + th[1] * rng.normal(); }
  Vector moment_start(std::span<const double> d) const override {
    Vector v(2);
    v << mean_of(d), std::max(sd_of(d), 1e-8);
    return v;
  }
  Vector robust_start(std::span<const double> d) const override {
    const double med = median_of({d.begin(), d.end()});
    const double s = mad_of(d, med);
    Vector v(2);
    v << med, s > 1e-8 ? s : std::max(sd_of(d), 1e-8);
    return v;
  }
};

class RegressionObservation final : public ParametricModel {
 public:
  explicit RegressionObservation(Vector x) : x_(std::move(x)) {
    if (!x_.allFinite()) throw DomainError("regression: covariates must be finite");
  }

  std::size_t dim() const override { return static_cast<std::size_t>(x_.size()) + 1; }
  std::string name() const override { return "regression-observation"; }
  std::vector<std::string> param_names() const override {
    std::vector<std::string> n;
    for (Eigen::Index i = 0; i < x_.size(); ++i) n.push_back("eta" + std::to_string(i));
    n.push_back("sigma");
    return n;
  }
  std::vector<ParamKind> param_kinds() const override {
    std::vector<ParamKind> k(dim(), ParamKind::free);
    k.back() = ParamKind::positive;
    return k;
  }
  void check(const Vector& th) const override {
    if (static_cast<std::size_t>(th.size()) != dim() || !th.allFinite())
      throw DomainError("regression: bad parameter");
    if (!(th[th.size() - 1] > 0.0)) throw DomainError("regression: sigma must be positive");
  }
  double mean(const Vector& th) const { return x_.dot(th.head(x_.size())); }
  double density(const Vector& th, double y) const override { return std::exp(log_density(th, y)); }
  double log_density(const Vector& th, double y) const override {
    return normal_log_density(y, mean(th), th[th.size() - 1]);
  }
  Vector score(const Vector& th, double y) const override {
    const double s = th[th.size() - 1], r = y - mean(th);
    Vector u(dim());
    u.head(x_.size()) = x_ * (r / (s * s));
    u[u.size() - 1] = r * r / (s * s * s) - 1.0 / s;
    return u;
  }
  Matrix score_jacobian(const Vector& th, double y) const override {
    const auto p = x_.size();
    const double s = th[th.size() - 1], r = y - mean(th), s2 = s * s;
    Matrix j(p + 1, p + 1);
    j.topLeftCorner(p, p) = -x_ * x_.transpose() / s2;
    j.topRightCorner(p, 1) = -2.0 * r / (s2 * s) * x_;
    j.bottomLeftCorner(1, p) = j.topRightCorner(p, 1).transpose();
    j(p, p) = -3.0 * r * r / (s2 * s2) + 1.0 / s2;
    return j;
  }
  Support support(const Vector&) const override { return Interval{-INFINITY, INFINITY}; }
  Interval default_truncation(const Vector& th) const override {
    const double m = mean(th), s = th[th.size() - 1];
    return {m - 10.0 * s, m + 10.0 * s};
  }
  double sample(const Vector& th, Rng& rng) const override { return mean(th) + th[th.size() - 1] * rng.normal(); }
  Vector moment_start(std::span<const double> d) const override {
    Vector v = Vector::Zero(dim());
    v[v.size() - 1] = std::max(sd_of(d), 1e-8);
    return v;
  }

 private:
  Vector x_;
};

class Bernoulli final : public DiscreteModel {
 public:
  std::size_t dim() const override { return 1; }
  std::string name() const override { return "bernoulli"; }
  std::vector<std::string> param_names() const override { return {"p"}; }
  std::vector<ParamKind> param_kinds() const override { return {ParamKind::unit}; }
  FiniteSet points() const override { return {0.0, 1.0}; }
  void check(const Vector& th) const override {
    if (th.size() != 1 || !(th[0] > 0.0 && th[0] < 1.0)) throw DomainError("bernoulli: p must lie in (0, 1)");
  }
  double density(const Vector& th, double x) const override {
    if (x == 1.0) return th[0];
    if (x == 0.0) return 1.0 - th[0];
    return 0.0;
  }
  double log_density(const Vector& th, double x) const override { return std::log(density(th, x)); }
  Vector score(const Vector& th, double x) const override {
    const double p = th[0];
    Vector u(1);
    u[0] = (x - p) / (p * (1.0 - p));
    return u;
  }
  Matrix score_jacobian(const Vector& th, double x) const override {
    const double p = th[0], v = p * (1.0 - p);
    Matrix j(1, 1);
    j(0, 0) = (-v - (x - p) * (1.0 - 2.0 * p)) / (v * v);
    return j;
  }
  double sample(const Vector& th, Rng& rng) const override { return rng.uniform() < th[0] ? 1.0 : 0.0; }
  Vector moment_start(std::span<const double> d) const override {
    Vector v(1);
    v[0] = std::clamp(mean_of(d), 1e-3, 1.0 - 1e-3);
    return v;
  }
};

}  // namespace

Interval DiscreteModel::default_truncation(const Vector&) const {
  const auto p = points();
  return {p.front(), p.back()};
}

ModelPtr normal_location(double sigma_fixed) {
  if (!(sigma_fixed > 0.0)) throw DomainError("normal_location: sigma must be positive");
  return std::make_shared<NormalLocation>(sigma_fixed);
}

ModelPtr normal_location_scale() { return std::make_shared<NormalLocationScale>(); }

ModelPtr regression_observation_model(const Vector& x) { return std::make_shared<RegressionObservation>(x); }

DiscreteModelPtr bernoulli_model() { return std::make_shared<Bernoulli>(); }

void MixtureSpec::validate() const {
  if (components.empty()) throw InputError("mixture: no components");
  double s = 0.0;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) throw InputError("mixture: weights must lie in [0, 1]");
    if (!c.model) throw InputError("mixture: null model");
    c.model->check(c.theta);
    s += c.weight;
  }
  if (std::abs(s - 1.0) > 1e-12) throw InputError("mixture: weights must sum to 1");
}

double MixtureSpec::density(double x) const {
  double d = 0.0;
  for (const auto& c : components) d += c.weight * c.model->density(c.theta, x);
  return d;
}

MixtureSpec contaminated_normal(double eps, double shift) {
  auto m = normal_location(1.0);
  Vector a(1), b(1);
  a << 0.0;
  b << shift;
  MixtureSpec s;
  s.components.push_back({1.0 - eps, m, a});
  if (eps > 0.0) s.components.push_back({eps, m, b});
  s.validate();
  return s;
}

std::vector<double> mixture_sampler(const MixtureSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  std::vector<double> out(n);
  for (auto& v : out) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t k = 0;
    for (; k + 1 < spec.components.size(); ++k) {
      acc += spec.components[k].weight;
      if (u < acc) break;
    }
    const auto& c = spec.components[k];
    v = c.model->sample(c.theta, rng);
  }
  return out;
}

std::vector<double> mixture_sampler(const MixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 0);
  return mixture_sampler(spec, n, rng);
}

Interval integration_window(const ParametricModel& m, const Vector& theta, const QuadratureSpec& q) {
  if (q.support_truncation) return {q.support_truncation->first, q.support_truncation->second};
  return m.default_truncation(theta);
}

}  // namespace lphi
