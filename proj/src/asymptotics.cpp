#include "lphi/asymptotics.hpp"

#include <cmath>

#include "lphi/errors.hpp"
#include "lphi/linalg.hpp"

namespace lphi {

namespace {

// Packs J-part, u w, and uuᵀw² into one vector so a single adaptive pass
// covers them all.
struct Packed {
  Eigen::Index p;
  Eigen::Index size() const { return 2 * p * p + p; }
  Eigen::Map<Matrix> a(Vector& v) const { return Eigen::Map<Matrix>(v.data(), p, p); }
  Eigen::Map<Vector> b(Vector& v) const { return Eigen::Map<Vector>(v.data() + p * p, p); }
  Eigen::Map<Matrix> c(Vector& v) const { return Eigen::Map<Matrix>(v.data() + p * p + p, p, p); }
};

AsymptoticMatrices raw(Matrix j, Matrix k, Vector zeta) {
  AsymptoticMatrices a;
  a.J = symmetrize(j);
  a.K = symmetrize(k);
  a.zeta = std::move(zeta);
  return a;
}

AsymptoticMatrices finish(AsymptoticMatrices a) {
  a.j_condition = condition_number(a.J);
  const Matrix ji = checked_inverse(a.J, "J");
  a.sigma = symmetrize(ji * a.K * ji);
  return a;
}

// w[∇u + c uuᵀ] at x.
Matrix slope_term(const ParametricModel& m, const Vector& theta, const Weighting& w, double x, double f) {
  const Vector u = m.score(theta, x);
  return w.weight(f) * (m.score_jacobian(theta, x) + w.elasticity(f) * u * u.transpose());
}

Weighting weighting_for(const Tuning& t) {
  auto w = Weighting::from(t);
  if (w.kind == Weighting::Kind::dpd && w.beta == 0.0) w.kind = Weighting::Kind::likelihood;
  return w;
}

}  // namespace

namespace {

AsymptoticMatrices raw_at_model(const ParametricModel& m, const Vector& theta, const Tuning& t,
                                const QuadratureSpec& q) {
  m.check(theta);
  const auto w = weighting_for(t);
  const Packed pk{static_cast<Eigen::Index>(m.dim())};
  Vector v = integrate_model<Vector>(
      m, theta,
      [&](double x, double f) -> Vector {
        Vector out(pk.size());
        const Vector u = m.score(theta, x);
        const double wf = w.weight(f);
        pk.a(out) = u * u.transpose() * (wf * f);
        pk.b(out) = u * (wf * f);
        pk.c(out) = u * u.transpose() * (wf * wf * f);
        return out;
      },
      q);
  const Vector zeta = pk.b(v);
  return raw(pk.a(v), Matrix(pk.c(v)) - zeta * zeta.transpose(), zeta);
}

AsymptoticMatrices raw_general(const ParametricModel& m, const Vector& theta, const DensityFn& g,
                               const Tuning& t, const QuadratureSpec& q) {
  m.check(theta);
  const auto w = weighting_for(t);
  const Packed pk{static_cast<Eigen::Index>(m.dim())};
  Vector v = integrate_model<Vector>(
      m, theta,
      [&](double x, double f) -> Vector {
        Vector out(pk.size());
        const double gx = g(x);
        const Vector u = m.score(theta, x);
        const double wf = w.weight(f);
        pk.a(out) = u * u.transpose() * (wf * f) - slope_term(m, theta, w, x, f) * (gx - f);
        pk.b(out) = u * (wf * gx);
        pk.c(out) = u * u.transpose() * (wf * wf * gx);
        return out;
      },
      q);
  const Vector zeta = pk.b(v);
  return raw(pk.a(v), Matrix(pk.c(v)) - zeta * zeta.transpose(), zeta);
}

}  // namespace

AsymptoticMatrices matrices_at_model(const ParametricModel& m, const Vector& theta, const Tuning& t,
                                     const QuadratureSpec& q) {
  return finish(raw_at_model(m, theta, t, q));
}

AsymptoticMatrices matrices_general(const ParametricModel& m, const Vector& theta, const DensityFn& g,
                                    const Tuning& t, const QuadratureSpec& q) {
  return finish(raw_general(m, theta, g, t, q));
}

AsymptoticMatrices matrices_empirical(const ParametricModel& m, const Vector& theta, std::span<const double> data,
                                      const Tuning& t, const QuadratureSpec& q) {
  if (data.empty()) throw InputError("empty data");
  m.check(theta);
  const auto w = weighting_for(t);
  const auto p = static_cast<Eigen::Index>(m.dim());
  const Packed pk{p};
  // Model part: ∫uuᵀ w f + ∫ w[∇u + c uuᵀ] f.
  Vector v = integrate_model<Vector>(
      m, theta,
      [&](double x, double f) -> Vector {
        Vector out = Vector::Zero(pk.size());
        const Vector u = m.score(theta, x);
        pk.a(out) = u * u.transpose() * (w.weight(f) * f) + slope_term(m, theta, w, x, f) * f;
        return out;
      },
      q);
  Matrix j = pk.a(v);
  Vector zeta = Vector::Zero(p);
  Matrix k2 = Matrix::Zero(p, p);
  const double n = static_cast<double>(data.size());
  for (double x : data) {
    const double f = m.density(theta, x);
    const Vector u = m.score(theta, x);
    const double wf = w.weight(f);
    j -= slope_term(m, theta, w, x, f) / n;
    zeta += u * (wf / n);
    k2 += u * u.transpose() * (wf * wf / n);
  }
  return finish(raw(j, k2 - zeta * zeta.transpose(), zeta));
}

Matrix kappa(const ParametricModel& m, const Vector& theta, const TuningPair& t, double x) {
  const double f = m.density(theta, x);
  const Vector u = m.score(theta, x);
  const double c = 1.0 - t.gamma / ((f + t.gamma) * std::log1p(t.gamma / f));
  return -(m.score_jacobian(theta, x) + c * u * u.transpose());
}

Matrix fisher_information(const ParametricModel& m, const Vector& theta, const QuadratureSpec& q) {
  m.check(theta);
  const auto p = static_cast<Eigen::Index>(m.dim());
  Vector v = integrate_model<Vector>(
      m, theta,
      [&](double x, double f) -> Vector {
        const Vector u = m.score(theta, x);
        Matrix o = u * u.transpose() * f;
        return Eigen::Map<Vector>(o.data(), p * p);
      },
      q);
  return symmetrize(Eigen::Map<Matrix>(v.data(), p, p));
}

double are_vs_mle(const ParametricModel& m, const Vector& theta, const Tuning& t, const QuadratureSpec& q) {
  if (m.dim() != 1) throw InputError("are_vs_mle: defined for a scalar parameter");
  const double info = fisher_information(m, theta, q)(0, 0);
  if (!(info > 0.0)) throw SingularMatrixError("Fisher information is not positive", INFINITY);
  const auto a = matrices_at_model(m, theta, t, q);
  return (1.0 / info) / a.sigma(0, 0);
}

namespace {

Vector influence_with(const ParametricModel& m, const Vector& theta, double y, const std::function<double(double)>& w,
                      const QuadratureSpec& q) {
  m.check(theta);
  const auto p = static_cast<Eigen::Index>(m.dim());
  Vector v = integrate_model<Vector>(
      m, theta,
      [&](double x, double f) -> Vector {
        Vector out(p * p + p);
        const Vector u = m.score(theta, x);
        Matrix uu = u * u.transpose() * (w(f) * f);
        out.head(p * p) = Eigen::Map<Vector>(uu.data(), p * p);
        out.tail(p) = u * (w(f) * f);
        return out;
      },
      q);
  const Matrix j = symmetrize(Eigen::Map<Matrix>(v.data(), p, p));
  const Vector zeta = v.tail(p);
  return checked_inverse(j, "influence matrix") * (m.score(theta, y) * w(m.density(theta, y)) - zeta);
}

}  // namespace

Vector influence_function(const ParametricModel& m, const Vector& theta, const TuningPair& t, double y,
                          const QuadratureSpec& q) {
  const auto w = Weighting::from(t);
  return influence_with(m, theta, y, [&](double f) { return w.weight(f); }, q);
}

Vector influence_function_unscaled(const ParametricModel& m, const Vector& theta, const TuningPair& t, double y,
                                   const QuadratureSpec& q) {
  return influence_with(
      m, theta, y, [&](double f) { return f > 0.0 ? std::pow(f, 1.0 + t.beta) * std::log1p(t.gamma / f) : 0.0; },
      q);
}

NonHomAsymptotics nonhom_matrices(std::span<const ModelPtr> models, const Vector& theta,
                                  std::span<const DensityFn> trues, const Tuning& t, const QuadratureSpec& q) {
  if (models.empty()) throw InputError("nonhom_matrices: no models");
  if (!trues.empty() && trues.size() != models.size())
    throw InputError("nonhom_matrices: one true density per model is required");
  const auto p = static_cast<Eigen::Index>(theta.size());
  NonHomAsymptotics out;
  out.Psi_n = Matrix::Zero(p, p);
  out.Omega_n = Matrix::Zero(p, p);
  for (std::size_t i = 0; i < models.size(); ++i) {
    AsymptoticMatrices a = trues.empty() ? raw_at_model(*models[i], theta, t, q)
                                         : raw_general(*models[i], theta, trues[i], t, q);
    out.Psi_n += a.J;
    out.Omega_n += a.K;
    out.J_i.push_back(std::move(a.J));
    out.xi_i.push_back(std::move(a.zeta));
  }
  out.Psi_n /= static_cast<double>(models.size());
  out.Omega_n /= static_cast<double>(models.size());
  return out;
}

Matrix nonhom_sigma(const NonHomAsymptotics& a) {
  const Matrix pi = checked_inverse(a.Psi_n, "Psi_n");
  return symmetrize(pi * a.Omega_n * pi);
}

AsymptoticMatrices nonhom_matrices_empirical(std::span<const ModelPtr> models, std::span<const double> y,
                                             const Vector& theta, const Tuning& t, const QuadratureSpec& q) {
  if (models.empty() || models.size() != y.size()) throw InputError("nonhom_matrices_empirical: bad input");
  const auto w = weighting_for(t);
  const auto p = theta.size();
  const Packed pk{p};
  Matrix psi = Matrix::Zero(p, p), uu = Matrix::Zero(p, p);
  Vector ubar = Vector::Zero(p);
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto& m = *models[i];
    m.check(theta);
    Vector v = integrate_model<Vector>(
        m, theta,
        [&](double x, double f) -> Vector {
          Vector out = Vector::Zero(pk.size());
          const Vector u = m.score(theta, x);
          pk.a(out) = u * u.transpose() * (w.weight(f) * f) + slope_term(m, theta, w, x, f) * f;
          pk.b(out) = u * (w.weight(f) * f);
          return out;
        },
        q);
    const double fy = m.density(theta, y[i]);
    psi += (Matrix(pk.a(v)) - slope_term(m, theta, w, y[i], fy)) / n;
    const Vector ui = m.score(theta, y[i]) * w.weight(fy) - pk.b(v);
    ubar += ui / n;
    uu += ui * ui.transpose() / n;
  }
  return finish(raw(psi, uu - ubar * ubar.transpose(), ubar));
}

}  // namespace lphi
