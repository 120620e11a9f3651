#include "lphi/hypothesis.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "lphi/asymptotics.hpp"
#include "lphi/errors.hpp"
#include "lphi/linalg.hpp"
#include "lphi/optimize.hpp"

namespace lphi {

ConstrainedNull ConstrainedNull::simple(Vector theta0) {
  ConstrainedNull c;
  c.theta0 = std::move(theta0);
  return c;
}

ConstrainedNull ConstrainedNull::composite(std::function<Vector(const Vector&)> b,
                                           std::function<Matrix(const Vector&)> b_jacobian, Vector xi_start) {
  ConstrainedNull c;
  c.b = std::move(b);
  c.b_jacobian = std::move(b_jacobian);
  c.xi_start = std::move(xi_start);
  return c;
}

namespace {

std::vector<double> chibar_draws(const ChiBarSpectrum& spec) {
  if (spec.lambdas.empty()) throw InputError("chi-bar: no weights");
  for (double l : spec.lambdas)
    if (!(l >= 0.0)) throw InputError("chi-bar: weights must be nonnegative");
  if (spec.mc_draws < 1) throw InputError("chi-bar: need at least one draw");
  Rng rng(spec.seed, 0);
  std::vector<double> d(spec.mc_draws);
  for (auto& v : d) {
    double s = 0.0;
    for (double l : spec.lambdas) {
      const double z = rng.normal();
      s += l * z * z;
    }
    v = s;
  }
  return d;
}

double quantile_of(std::vector<double>& d, double prob) {
  const auto n = d.size();
  auto k = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n) - 1;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  return d[k];
}

double tail_of(const std::vector<double>& d, double x) {
  const auto c = std::count_if(d.begin(), d.end(), [&](double v) { return v >= x; });
  return static_cast<double>(c) / static_cast<double>(d.size());
}

void calibrate(TestResult& r, const ChiBarSpectrum& mc) {
  ChiBarSpectrum s = mc;
  s.lambdas = r.lambdas;
  r.rank_r = static_cast<int>(r.lambdas.size());
  if (r.lambdas.empty()) {
    r.p_value = 1.0;
    r.critical_value_95 = 0.0;
    r.reject_at_5pct = r.statistic > 0.0;
    return;
  }
  auto d = chibar_draws(s);
  r.p_value = tail_of(d, r.statistic);
  r.critical_value_95 = quantile_of(d, 0.95);
  r.reject_at_5pct = r.statistic > r.critical_value_95;
}

PilotEstimate start_for(std::span<const double> data, const ParametricModel& m, const std::optional<PilotEstimate>& init) {
  return init ? *init : PilotEstimate{m.moment_start(data), PilotEstimate::Method::user};
}

EstimateResult fitted(std::span<const double> data, const ParametricModel& m, const TuningPair& t,
                      const PilotEstimate& start, const QuadratureSpec& q) {
  auto r = fit_mlphide(data, m, t, start, q);
  if (!r.converged) throw NumericalError("test: the estimate did not converge");
  return r;
}

std::vector<double> null_spectrum(const ParametricModel& m, const Vector& theta0, const TuningPair& t,
                                  const QuadratureSpec& q) {
  const auto mats = matrices_at_model(m, theta0, t, q);
  return spectrum(a_matrix(m, theta0, t, q), mats.sigma);
}

}  // namespace

double chibar_quantile(const ChiBarSpectrum& spec, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw InputError("chi-bar: probability must lie in (0, 1)");
  auto d = chibar_draws(spec);
  return quantile_of(d, prob);
}

double chibar_tail(const ChiBarSpectrum& spec, double x) { return tail_of(chibar_draws(spec), x); }

double model_divergence(const ParametricModel& m, const Vector& theta1, const Vector& theta2, const TuningPair& t,
                        const QuadratureSpec& q) {
  m.check(theta1);
  m.check(theta2);
  const auto in = inner_spec();
  auto sup = m.support(theta1);
  if (auto pts = std::get_if<FiniteSet>(&sup)) {
    double s = 0.0;
    for (double x : *pts) s += bregman_pointwise(m.density(theta1, x), m.density(theta2, x), t, in);
    return s;
  }
  const auto w1 = integration_window(m, theta1, q), w2 = integration_window(m, theta2, q);
  const auto br = even_breaks(std::min(w1.lo, w2.lo), std::max(w1.hi, w2.hi), 16);
  auto h = [&](double x) { return bregman_pointwise(m.density(theta1, x), m.density(theta2, x), t, in); };
  return integrate<double>(h, std::span<const double>(br), q.abs_tol * 1e-3, q.rel_tol,
                           std::max(q.max_subdivisions, 16))
      .value;
}

Matrix a_matrix(const ParametricModel& m, const Vector& theta0, const TuningPair& t, const QuadratureSpec& q) {
  return matrices_at_model(m, theta0, t, q).J;
}

Matrix a_matrix_numeric(const ParametricModel& m, const Vector& theta0, const TuningPair& t, const QuadratureSpec& q,
                        double rel_step) {
  QuadratureSpec tight = q;
  tight.rel_tol = std::min(q.rel_tol, 1e-11);
  tight.abs_tol = std::min(q.abs_tol, 1e-14);
  const auto p = theta0.size();
  Vector h(p);
  for (Eigen::Index j = 0; j < p; ++j) h[j] = rel_step * std::max(1.0, std::abs(theta0[j]));
  auto d = [&](const Vector& th) { return model_divergence(m, th, theta0, t, tight); };
  Matrix a(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j; k < p; ++k) {
      Vector pp = theta0, pm = theta0, mp = theta0, mm = theta0;
      pp[j] += h[j], pp[k] += h[k];
      pm[j] += h[j], pm[k] -= h[k];
      mp[j] -= h[j], mp[k] += h[k];
      mm[j] -= h[j], mm[k] -= h[k];
      a(j, k) = a(k, j) = (d(pp) - d(pm) - d(mp) + d(mm)) / (4.0 * h[j] * h[k]);
    }
  }
  return a;
}

std::vector<double> spectrum(const Matrix& a, const Matrix& s) {
  // AS is similar to S^{1/2} A S^{1/2}, which is symmetric.
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s));
  const Vector ev = es.eigenvalues().cwiseMax(0.0);
  const Matrix root = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> e2(symmetrize(root * a * root));
  const Vector lam = e2.eigenvalues();
  const double top = lam.size() ? lam.maxCoeff() : 0.0;
  std::vector<double> out;
  for (Eigen::Index i = lam.size() - 1; i >= 0; --i)
    if (lam[i] > 1e-10 * top && lam[i] > 0.0) out.push_back(lam[i]);
  return out;
}

TestResult simple_null_test(std::span<const double> data, const ParametricModel& m, const Vector& theta0,
                            const TuningPair& t, const QuadratureSpec& q, const ChiBarSpectrum& mc,
                            std::optional<PilotEstimate> init) {
  if (data.empty()) throw InputError("empty data");
  m.check(theta0);
  TestResult r;
  r.name = "divergence";
  const auto est = fitted(data, m, t, start_for(data, m, init), q);
  r.theta_hat = est.theta_hat;
  r.theta_null = theta0;
  r.statistic = 2.0 * static_cast<double>(data.size()) * model_divergence(m, est.theta_hat, theta0, t, q);
  r.lambdas = null_spectrum(m, theta0, t, q);
  calibrate(r, mc);
  return r;
}

TestResult two_sample_test(std::span<const double> data1, std::span<const double> data2, const ParametricModel& m,
                           const TuningPair& t, const QuadratureSpec& q, const ChiBarSpectrum& mc) {
  if (data1.empty() || data2.empty()) throw InputError("two-sample test: empty sample");
  TestResult r;
  r.name = "two-sample";
  const auto e1 = fitted(data1, m, t, start_for(data1, m, std::nullopt), q);
  const auto e2 = fitted(data2, m, t, start_for(data2, m, std::nullopt), q);
  const double n1 = static_cast<double>(data1.size()), n2 = static_cast<double>(data2.size());
  r.statistic = 2.0 * n1 * n2 / (n1 + n2) * model_divergence(m, e1.theta_hat, e2.theta_hat, t, q);
  std::vector<double> pooled(data1.begin(), data1.end());
  pooled.insert(pooled.end(), data2.begin(), data2.end());
  const auto ep = fitted(pooled, m, t, start_for(pooled, m, std::nullopt), q);
  r.theta_hat = e1.theta_hat;
  r.theta_null = ep.theta_hat;
  r.lambdas = null_spectrum(m, ep.theta_hat, t, q);
  calibrate(r, mc);
  return r;
}

TestResult score_test(std::span<const double> data, const ParametricModel& m, const Vector& theta0,
                      const TuningPair& t, const QuadratureSpec& q, const ChiBarSpectrum& mc) {
  if (data.empty()) throw InputError("empty data");
  TestResult r;
  r.name = "score";
  r.theta_null = theta0;
  const Vector ubar = estimating_equation_residual(data, m, t, theta0, q);
  const auto mats = matrices_at_model(m, theta0, t, q);
  const Matrix ji = checked_inverse(mats.J, "J_B");
  const Matrix a = a_matrix(m, theta0, t, q);
  r.statistic = std::max(0.0, static_cast<double>(data.size()) * ubar.dot(ji * a * ji * ubar));
  r.lambdas = spectrum(a, mats.sigma);
  calibrate(r, mc);
  return r;
}

std::vector<double> expand_counts(std::span<const double> counts, const FiniteSet& points) {
  if (counts.size() != points.size()) throw InputError("counts do not match the support");
  std::vector<double> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double c = counts[i];
    if (!(c >= 0.0) || c != std::floor(c)) throw InputError("counts must be nonnegative integers");
    out.insert(out.end(), static_cast<std::size_t>(c), points[i]);
  }
  if (out.empty()) throw InputError("counts sum to zero");
  return out;
}

TestResult ddt_test(std::span<const double> counts, const DiscreteModel& dm, const ConstrainedNull& null,
                    const TuningPair& t, const QuadratureSpec& q, const ChiBarSpectrum& mc) {
  const auto pts = dm.points();
  const auto data = expand_counts(counts, pts);
  const double n = static_cast<double>(data.size());
  const auto in = inner_spec();
  auto d_nu = [&](const Vector& th) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) s += bregman_pointwise(counts[i] / n, dm.pmf(th, pts[i]), t, in);
    return s;
  };
  TestResult r;
  r.name = "ddt";
  const auto est = fitted(data, dm, t, start_for(data, dm, std::nullopt), q);
  r.theta_hat = est.theta_hat;
  const auto mats_at = [&](const Vector& th) { return matrices_at_model(dm, th, t, q); };
  Matrix p_mat;
  if (null.theta0) {
    dm.check(*null.theta0);
    r.theta_null = *null.theta0;
    const auto mats = mats_at(r.theta_null);
    p_mat = checked_inverse(mats.J, "J");
    r.lambdas = spectrum(a_matrix(dm, r.theta_null, t, q), p_mat * mats.K * p_mat);
  } else {
    if (!null.b || !null.b_jacobian) throw InputError("composite null needs b and its Jacobian");
    SmoothObjective obj;
    obj.value = [&](const Vector& xi) { return empirical_objective(data, dm, t, null.b(xi), q); };
    obj.gradient = [&](const Vector& xi) -> Vector {
      return null.b_jacobian(xi).transpose() * objective_gradient(data, dm, t, null.b(xi), q);
    };
    const auto res = newton_minimize(obj, null.xi_start, {});
    r.theta_null = null.b(res.x);
    const Matrix bd = null.b_jacobian(res.x);
    Eigen::FullPivLU<Matrix> lu(bd);
    if (lu.rank() != bd.cols()) throw InputError("composite null: b-dot is not of full column rank");
    const auto mats = mats_at(r.theta_null);
    const Matrix ji = checked_inverse(mats.J, "J");
    p_mat = ji - bd * checked_inverse(bd.transpose() * mats.J * bd, "b'Jb") * bd.transpose();
    r.lambdas = spectrum(a_matrix(dm, r.theta_null, t, q), p_mat * mats.K * p_mat);
  }
  r.statistic = std::max(0.0, 2.0 * n * (d_nu(r.theta_null) - d_nu(r.theta_hat)));
  calibrate(r, mc);
  return r;
}

TestResult wald_test(std::span<const double> data, const ParametricModel& m,
                     const std::function<Vector(const Vector&)>& restriction,
                     const std::function<Matrix(const Vector&)>& jacobian, const TuningPair& t,
                     const QuadratureSpec& q, std::optional<PilotEstimate> init) {
  if (data.empty()) throw InputError("empty data");
  TestResult r;
  r.name = "wald";
  const auto est = fitted(data, m, t, start_for(data, m, init), q);
  r.theta_hat = est.theta_hat;
  const Vector rv = restriction(est.theta_hat);
  const Matrix d = jacobian(est.theta_hat);
  if (d.rows() != rv.size() || d.cols() != est.theta_hat.size()) throw InputError("Wald: Jacobian has the wrong shape");
  Eigen::FullPivLU<Matrix> lu(d);
  if (lu.rank() != d.rows()) throw InputError("Wald: restriction Jacobian is rank deficient");
  const auto mats = matrices_at_model(m, est.theta_hat, t, q);
  const Matrix v = d * mats.sigma * d.transpose();
  r.statistic = std::max(0.0, static_cast<double>(data.size()) * rv.dot(checked_inverse(v, "D Sigma D'") * rv));
  r.rank_r = static_cast<int>(rv.size());
  r.lambdas.assign(rv.size(), 1.0);
  boost::math::chi_squared chi(static_cast<double>(rv.size()));
  r.p_value = r.statistic > 0.0 ? boost::math::cdf(boost::math::complement(chi, r.statistic)) : 1.0;
  r.critical_value_95 = boost::math::quantile(chi, 0.95);
  r.reject_at_5pct = r.statistic > r.critical_value_95;
  return r;
}

}  // namespace lphi
