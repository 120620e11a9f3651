#include "lphi/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "lphi/errors.hpp"
#include "lphi/optimize.hpp"

namespace lphi {

std::string to_string(PilotEstimate::Method m) {
  switch (m) {
    case PilotEstimate::Method::min_l2:
      return "min-L2";
    case PilotEstimate::Method::lms_mad:
      return "LMS+MAD";
    case PilotEstimate::Method::user:
      return "user-supplied";
  }
  return "user-supplied";
}

void RegressionData::validate() const {
  if (x.rows() != y.size()) throw InputError("regression: responses and covariate rows differ in length");
  if (x.rows() <= x.cols()) throw InputError("regression: need n > p");
  if (!x.allFinite() || !y.allFinite()) throw InputError("regression: non-finite data");
}

namespace {

struct Family {
  Weighting w;
  QuadratureSpec inner = inner_spec();
  std::optional<TuningPair> pair;

  explicit Family(const Tuning& t) : w(Weighting::from(t)) {
    if (auto p = std::get_if<TuningPair>(&t)) pair = *p;
  }
  bool is_mle() const {
    return w.kind == Weighting::Kind::likelihood || (w.kind == Weighting::Kind::dpd && w.beta == 0.0);
  }
  double integral_term(double f) const {
    if (pair) return c_value(f, *pair, inner);
    if (is_mle()) return 0.0;
    return std::pow(f, 1.0 + w.beta);
  }
  double data_term(double f, double logf) const {
    if (pair) return b_prime(f, *pair, inner);
    if (is_mle()) return logf;
    return (1.0 + 1.0 / w.beta) * std::pow(f, w.beta);
  }
  double grad_scale() const { return w.kind == Weighting::Kind::dpd && !is_mle() ? 1.0 + w.beta : 1.0; }
  double weight(double f) const { return is_mle() ? 1.0 : w.weight(f); }
};

class Reparam {
 public:
  explicit Reparam(std::vector<ParamKind> k) : kinds_(std::move(k)) {}

  Vector to_theta(const Vector& eta) const {
    Vector th = eta;
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
      if (kinds_[i] == ParamKind::positive) th[i] = std::exp(eta[i]);
      if (kinds_[i] == ParamKind::unit) th[i] = 1.0 / (1.0 + std::exp(-eta[i]));
    }
    return th;
  }
  Vector to_eta(const Vector& th) const {
    Vector eta = th;
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
      if (kinds_[i] == ParamKind::positive) eta[i] = std::log(th[i]);
      if (kinds_[i] == ParamKind::unit) eta[i] = std::log(th[i] / (1.0 - th[i]));
    }
    return eta;
  }
  // dθ/dη, diagonal.
  Vector slope(const Vector& eta) const {
    Vector th = to_theta(eta), d = Vector::Ones(eta.size());
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
      if (kinds_[i] == ParamKind::positive) d[i] = th[i];
      if (kinds_[i] == ParamKind::unit) d[i] = th[i] * (1.0 - th[i]);
    }
    return d;
  }

 private:
  std::vector<ParamKind> kinds_;
};

void check_start(const ParametricModel& m, const Vector& theta) {
  if (!theta.allFinite()) throw InputError("initial estimate has non-finite entries");
  if (static_cast<std::size_t>(theta.size()) != m.dim()) throw InputError("initial estimate has the wrong dimension");
  m.check(theta);
}

template <class Value, class Gradient, class Residual>
EstimateResult minimise(const Reparam& rp, const Vector& start, const Tuning& t, const FitOptions& o,
                        Value&& value, Gradient&& gradient, Residual&& residual) {
  SmoothObjective obj;
  obj.value = [&](const Vector& eta) { return value(rp.to_theta(eta)); };
  obj.gradient = [&](const Vector& eta) -> Vector {
    return gradient(rp.to_theta(eta)).cwiseProduct(rp.slope(eta));
  };
  MinimizeOptions mo;
  mo.max_iterations = o.max_iterations;
  mo.step_tol = o.step_tol;
  auto r = newton_minimize(obj, rp.to_eta(start), mo);
  EstimateResult res;
  res.theta_hat = rp.to_theta(r.x);
  res.objective_value = r.value;
  res.eq_residual_norm = residual(res.theta_hat).norm();
  res.iterations = r.iterations;
  res.converged = r.step_converged && res.eq_residual_norm < o.residual_tol;
  res.tuning = t;
  return res;
}

}  // namespace

double empirical_objective(std::span<const double> data, const ParametricModel& m, const Tuning& t,
                           const Vector& theta, const QuadratureSpec& q) {
  if (data.empty()) throw InputError("empty data");
  m.check(theta);
  const Family fam(t);
  double integral = 0.0;
  if (!fam.is_mle()) {
    integral = integrate_model<double>(m, theta, [&](double, double f) { return fam.integral_term(f); }, q);
  }
  double s = 0.0;
  for (double x : data) {
    const double lf = m.log_density(theta, x);
    s += fam.data_term(std::exp(lf), lf);
  }
  return integral - s / static_cast<double>(data.size());
}

Vector estimating_equation_residual(std::span<const double> data, const ParametricModel& m, const Tuning& t,
                                    const Vector& theta, const QuadratureSpec& q) {
  if (data.empty()) throw InputError("empty data");
  m.check(theta);
  const Family fam(t);
  Vector s = Vector::Zero(m.dim());
  for (double x : data) s += m.score(theta, x) * fam.weight(m.density(theta, x));
  s /= static_cast<double>(data.size());
  if (!fam.is_mle()) {
    s -= integrate_model<Vector>(
        m, theta, [&](double x, double f) -> Vector { return m.score(theta, x) * (fam.weight(f) * f); }, q);
  }
  return s;
}

Vector objective_gradient(std::span<const double> data, const ParametricModel& m, const Tuning& t,
                          const Vector& theta, const QuadratureSpec& q) {
  return -Family(t).grad_scale() * estimating_equation_residual(data, m, t, theta, q);
}

EstimateResult fit(std::span<const double> data, const ParametricModel& m, const Tuning& t,
                   const PilotEstimate& init, const QuadratureSpec& q, const FitOptions& o) {
  if (data.empty()) throw InputError("empty data");
  check_start(m, init.theta_star);
  const Reparam rp(m.param_kinds());
  auto res = minimise(
      rp, init.theta_star, t, o, [&](const Vector& th) { return empirical_objective(data, m, t, th, q); },
      [&](const Vector& th) { return objective_gradient(data, m, t, th, q); },
      [&](const Vector& th) { return estimating_equation_residual(data, m, t, th, q); });
  if (o.check_restart) {
    FitOptions inner = o;
    inner.check_restart = false;
    auto mle = fit(data, m, Mle{}, {m.moment_start(data), PilotEstimate::Method::user}, q, inner);
    auto again = fit(data, m, t, {mle.theta_hat, PilotEstimate::Method::user}, q, inner);
    res.restart_found_lower = again.objective_value < res.objective_value - 1e-10 * (1.0 + std::abs(res.objective_value));
  }
  return res;
}

EstimateResult fit_mlphide(std::span<const double> data, const ParametricModel& m, const TuningPair& t,
                           const PilotEstimate& init, const QuadratureSpec& q, const FitOptions& o) {
  return fit(data, m, t, init, q, o);
}

EstimateResult fit_mdpde(std::span<const double> data, const ParametricModel& m, const DpdAlpha& a,
                         const PilotEstimate& init, const QuadratureSpec& q, const FitOptions& o) {
  return fit(data, m, a, init, q, o);
}

double nonhomogeneous_objective(std::span<const ModelPtr> models, std::span<const double> y, const Tuning& t,
                                const Vector& theta, const QuadratureSpec& q) {
  if (models.size() != y.size() || y.empty()) throw InputError("non-homogeneous: models and responses differ");
  const Family fam(t);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto& m = *models[i];
    m.check(theta);
    if (!fam.is_mle())
      s += integrate_model<double>(m, theta, [&](double, double f) { return fam.integral_term(f); }, q);
    const double lf = m.log_density(theta, y[i]);
    s -= fam.data_term(std::exp(lf), lf);
  }
  return s / static_cast<double>(y.size());
}

Vector nonhomogeneous_residual(std::span<const ModelPtr> models, std::span<const double> y, const Tuning& t,
                               const Vector& theta, const QuadratureSpec& q) {
  if (models.size() != y.size() || y.empty()) throw InputError("non-homogeneous: models and responses differ");
  const Family fam(t);
  Vector s = Vector::Zero(theta.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto& m = *models[i];
    m.check(theta);
    s += m.score(theta, y[i]) * fam.weight(m.density(theta, y[i]));
    if (!fam.is_mle()) {
      s -= integrate_model<Vector>(
          m, theta, [&](double x, double f) -> Vector { return m.score(theta, x) * (fam.weight(f) * f); }, q);
    }
  }
  return s / static_cast<double>(y.size());
}

std::vector<ModelPtr> regression_models(const RegressionData& d) {
  std::vector<ModelPtr> ms;
  ms.reserve(d.y.size());
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) ms.push_back(regression_observation_model(d.x.row(i).transpose()));
  return ms;
}

namespace {

void check_regression_theta(const RegressionData& d, const Vector& theta) {
  if (theta.size() != d.x.cols() + 1 || !theta.allFinite()) throw DomainError("regression: bad parameter");
  if (!(theta[theta.size() - 1] > 0.0)) throw DomainError("regression: sigma must be positive");
}

Vector scale_theta(double sigma) {
  Vector v(2);
  v << 0.0, sigma;
  return v;
}

}  // namespace

double regression_objective(const RegressionData& d, const Tuning& t, const Vector& theta, const QuadratureSpec& q) {
  check_regression_theta(d, theta);
  const Family fam(t);
  const auto p = d.x.cols();
  const double sigma = theta[p];
  const auto ls = normal_location_scale();
  const Vector th0 = scale_theta(sigma);
  double integral = 0.0;
  if (!fam.is_mle())
    integral = integrate_model<double>(*ls, th0, [&](double, double f) { return fam.integral_term(f); }, q);
  const Vector r = d.y - d.x * theta.head(p);
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double lf = ls->log_density(th0, r[i]);
    s += fam.data_term(std::exp(lf), lf);
  }
  return integral - s / static_cast<double>(r.size());
}

Vector regression_residual(const RegressionData& d, const Tuning& t, const Vector& theta, const QuadratureSpec& q) {
  check_regression_theta(d, theta);
  const Family fam(t);
  const auto p = d.x.cols();
  const auto n = static_cast<double>(d.y.size());
  const double sigma = theta[p], s2 = sigma * sigma;
  const auto ls = normal_location_scale();
  const Vector th0 = scale_theta(sigma);
  const Vector r = d.y - d.x * theta.head(p);
  Vector out = Vector::Zero(p + 1);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double w = fam.weight(ls->density(th0, r[i]));
    out.head(p) += d.x.row(i).transpose() * (r[i] / s2 * w);
    out[p] += (r[i] * r[i] / (s2 * sigma) - 1.0 / sigma) * w;
  }
  out /= n;
  if (!fam.is_mle()) {
    const Vector a = integrate_model<Vector>(
        *ls, th0, [&](double x, double f) -> Vector { return ls->score(th0, x) * (fam.weight(f) * f); }, q);
    out.head(p) -= d.x.colwise().mean().transpose() * a[0];
    out[p] -= a[1];
  }
  return out;
}

EstimateResult fit_nonhomogeneous(const RegressionData& d, const Tuning& t, const PilotEstimate& init,
                                  const QuadratureSpec& q, const FitOptions& o) {
  d.validate();
  check_regression_theta(d, init.theta_star);
  std::vector<ParamKind> kinds(d.x.cols() + 1, ParamKind::free);
  kinds.back() = ParamKind::positive;
  const Reparam rp(kinds);
  const double grad_scale = Family(t).grad_scale();
  auto res = minimise(
      rp, init.theta_star, t, o, [&](const Vector& th) { return regression_objective(d, t, th, q); },
      [&](const Vector& th) -> Vector { return -grad_scale * regression_residual(d, t, th, q); },
      [&](const Vector& th) { return regression_residual(d, t, th, q); });
  Eigen::ColPivHouseholderQR<Matrix> qr(d.x);
  if (qr.rank() < d.x.cols()) res.warnings.push_back("design matrix is rank deficient");
  if (o.check_restart) {
    FitOptions inner = o;
    inner.check_restart = false;
    auto again = fit_nonhomogeneous(d, t, {least_squares(d), PilotEstimate::Method::user}, q, inner);
    res.restart_found_lower = again.objective_value < res.objective_value - 1e-10 * (1.0 + std::abs(res.objective_value));
  }
  return res;
}

Vector least_squares(const RegressionData& d) {
  d.validate();
  const Vector eta = d.x.colPivHouseholderQr().solve(d.y);
  const Vector r = d.y - d.x * eta;
  Vector th(eta.size() + 1);
  th << eta, std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  return th;
}

double median(std::vector<double> v) {
  if (v.empty()) throw InputError("median of empty set");
  const auto n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double hi = *mid;
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

PilotEstimate pilot_min_l2(std::span<const double> data, const ParametricModel& m, const QuadratureSpec& q) {
  // Two starts: the mean can sit on the flat part of the L2 objective when
  // a large share of the data is far away.
  std::optional<EstimateResult> best;
  std::string last_error;
  for (const Vector& s : {m.robust_start(data), m.moment_start(data)}) {
    if (best && s == best->theta_hat) continue;
    try {
      auto r = fit_mdpde(data, m, DpdAlpha(1.0), {s, PilotEstimate::Method::user}, q);
      if (!r.theta_hat.allFinite() || !std::isfinite(r.objective_value)) continue;
      if (!best || r.objective_value < best->objective_value) best = std::move(r);
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  if (!best) throw NumericalError("minimum L2 pilot is not finite" + (last_error.empty() ? "" : ": " + last_error));
  return {best->theta_hat, PilotEstimate::Method::min_l2};
}

namespace {

// C(n, k), saturating at cap + 1.
std::uint64_t choose_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(c);
}

}  // namespace

PilotEstimate pilot_lms_regression(const RegressionData& d, int n_subsets, std::uint64_t seed) {
  d.validate();
  if (n_subsets < 1) throw InputError("LMS: n_subsets must be >= 1");
  const auto n = static_cast<std::size_t>(d.x.rows()), p = static_cast<std::size_t>(d.x.cols());
  double best = INFINITY;
  Vector best_eta;
  std::vector<double> r2(n);
  auto try_subset = [&](const std::vector<std::size_t>& idx) {
    Matrix a(p, p);
    Vector b(p);
    for (std::size_t k = 0; k < p; ++k) {
      a.row(k) = d.x.row(idx[k]);
      b[k] = d.y[idx[k]];
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) return;
    const Vector eta = lu.solve(b);
    if (!eta.allFinite()) return;
    const Vector r = d.y - d.x * eta;
    for (std::size_t i = 0; i < n; ++i) r2[i] = r[i] * r[i];
    const double med = median(r2);
    if (med < best) {
      best = med;
      best_eta = eta;
    }
  };
  const auto total = choose_capped(n, p, static_cast<std::uint64_t>(n_subsets));
  std::vector<std::size_t> idx(p);
  if (total <= static_cast<std::uint64_t>(n_subsets)) {
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      try_subset(idx);
      std::size_t k = p;
      while (k > 0 && idx[k - 1] == n - p + (k - 1)) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t j = k; j < p; ++j) idx[j] = idx[j - 1] + 1;
    }
  } else {
    Rng rng(seed, 0);
    std::vector<std::size_t> perm(n);
    for (int s = 0; s < n_subsets; ++s) {
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t k = 0; k < p; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.below(n - k));
        std::swap(perm[k], perm[j]);
        idx[k] = perm[k];
      }
      std::sort(idx.begin(), idx.end());
      try_subset(idx);
    }
  }
  if (best_eta.size() == 0) throw NumericalError("LMS: every elemental subset was singular");
  const Vector r = d.y - d.x * best_eta;
  std::vector<double> rv(r.data(), r.data() + r.size());
  const double med = median(rv);
  for (auto& v : rv) v = std::abs(v - med);
  Vector th(p + 1);
  th << best_eta, 1.4826 * median(rv);
  return {th, PilotEstimate::Method::lms_mad};
}

}  // namespace lphi
