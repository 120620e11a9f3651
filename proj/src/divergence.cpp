#include "lphi/divergence.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace lphi {

TuningPair::TuningPair(double b, double g) : beta(b), gamma(g) {
  if (!(b > 0.0 && b <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (!(g > 0.0 && g <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
}

DpdAlpha::DpdAlpha(double a) : alpha(a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("alpha must be >= 0");
}

std::string describe(const Tuning& t) {
  std::ostringstream os;
  os.precision(12);
  if (auto p = std::get_if<TuningPair>(&t)) {
    os << "beta=" << p->beta << ",gamma=" << p->gamma;
  } else if (auto a = std::get_if<DpdAlpha>(&t)) {
    os << "alpha=" << a->alpha;
  } else {
    os << "mle";
  }
  return os.str();
}

double phi(double x, double gamma) {
  if (!(x > 0.0)) throw DomainError("phi: x must be positive");
  return std::log1p(gamma / x) / gamma;
}

double b_second(double x, const TuningPair& t) {
  if (!(x > 0.0)) throw DomainError("b_second: x must be positive");
  return std::pow(x, t.beta) * phi(x, t.gamma);
}

QuadratureSpec inner_spec() {
  QuadratureSpec q;
  q.abs_tol = 1e-300;
  q.rel_tol = 1e-12;
  q.max_subdivisions = 400;
  return q;
}

namespace {

// (1/γ)∫₀ˣ w(s/x) s^{β+j} log(1+γ/s) ds with w(r) = 1 or 1 − r.
// Substituting s = x·u^k with kβ an integer leaves a bounded, smooth
// integrand in u; the geometric breakpoints handle what is left near 0.
double inner_moment(double x, int j, bool taper, const TuningPair& t, const QuadratureSpec& q) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("index function: x must be finite and >= 0");
  if (x == 0.0) return 0.0;
  const double b = t.beta, g = t.gamma;
  const double k = std::ceil(2.0 * b) / b;
  const double e = k * (b + j) + k - 1.0;
  const double lx = std::log(x), lg = std::log(g);
  auto h = [&](double u) -> double {
    if (u <= 0.0) return 0.0;
    const double pe = std::pow(u, e);
    if (pe == 0.0) return 0.0;
    // s = x·u^k may be subnormal here; go through log s so γ/s cannot overflow.
    const double ls = lx + k * std::log(u);
    const double lgs = ls < lg - 30.0 ? lg - ls : std::log1p(std::exp(lg - ls));
    const double uk = std::pow(u, k);
    double v = k * pe * lgs;
    if (taper) v *= 1.0 - uk;
    return v;
  };
  static constexpr std::array<double, 4> br{0.0, 0.0625, 0.25, 1.0};
  const double scale = std::pow(x, b + j + 1.0) / g;
  const double abs_tol = scale > 0.0 ? q.abs_tol / scale : q.abs_tol;
  auto r = integrate<double>(h, std::span<const double>(br), abs_tol, q.rel_tol, q.max_subdivisions);
  return scale * r.value;
}

}  // namespace

double b_prime(double x, const TuningPair& t, const QuadratureSpec& q) {
  return inner_moment(x, 0, false, t, q);
}

double b_value(double x, const TuningPair& t, const QuadratureSpec& q) {
  // (x − s) = x(1 − s/x), hence the extra factor x.
  return x * inner_moment(x, 0, true, t, q);
}

double c_value(double x, const TuningPair& t, const QuadratureSpec& q) {
  return inner_moment(x, 1, false, t, q);
}

double bregman_pointwise(double g, double f, const TuningPair& t, const QuadratureSpec& q) {
  if (!(g >= 0.0) || !(f >= 0.0)) throw DomainError("bregman_pointwise: arguments must be >= 0");
  if (g == f) return 0.0;
  if (f == 0.0) return b_value(g, t, q);
  if (g == 0.0) return c_value(f, t, q);
  const double lo = std::min(g, f), hi = std::max(g, f);
  if (lo < 0.01 * hi) {
    const double d = b_value(g, t, q) - b_value(f, t, q) - (g - f) * b_prime(f, t, q);
    return std::max(d, 0.0);
  }
  // d(g,f) = ∫_f^g (g − s) B''(s) ds, free of the cancellation in the
  // three-term form when g is close to f.
  auto h = [&](double s) { return std::abs(g - s) * std::pow(s, t.beta) * std::log1p(t.gamma / s) / t.gamma; };
  auto r = integrate<double>(h, lo, hi, q);
  return r.value;
}

namespace {

std::pair<double, double> window(const QuadratureSpec& q, const char* who) {
  if (!q.support_truncation) throw InputError(std::string(who) + ": an integration window is required");
  return *q.support_truncation;
}

template <class F>
double integrate_window(F&& h, const QuadratureSpec& q, const char* who) {
  auto [a, b] = window(q, who);
  auto br = even_breaks(a, b, 16);
  return integrate<double>(h, std::span<const double>(br), q.abs_tol, q.rel_tol,
                           std::max(q.max_subdivisions, 16))
      .value;
}

}  // namespace

double divergence(const DensityFn& g, const DensityFn& f, const TuningPair& t, const QuadratureSpec& q) {
  const auto in = inner_spec();
  return integrate_window([&](double x) { return bregman_pointwise(g(x), f(x), t, in); }, q, "divergence");
}

double dpd_divergence(const DensityFn& g, const DensityFn& f, const DpdAlpha& a, const QuadratureSpec& q) {
  if (!(a.alpha > 0.0)) throw DomainError("dpd_divergence: alpha must be positive; use kullback_leibler");
  const double al = a.alpha;
  return integrate_window(
      [&](double x) {
        const double gv = g(x), fv = f(x);
        return std::pow(fv, 1.0 + al) - (1.0 + 1.0 / al) * gv * std::pow(fv, al) +
               std::pow(gv, 1.0 + al) / al;
      },
      q, "dpd_divergence");
}

double kullback_leibler(const DensityFn& g, const DensityFn& f, const QuadratureSpec& q) {
  return integrate_window(
      [&](double x) {
        const double gv = g(x);
        if (gv <= 0.0) return 0.0;
        return gv * (std::log(gv) - std::log(f(x)));
      },
      q, "kullback_leibler");
}

Weighting Weighting::from(const Tuning& t) {
  if (auto p = std::get_if<TuningPair>(&t)) return {Kind::lphi, p->beta, p->gamma};
  if (auto a = std::get_if<DpdAlpha>(&t)) return {Kind::dpd, a->alpha, 0.0};
  return {Kind::likelihood, 0.0, 0.0};
}

double Weighting::weight(double f) const {
  switch (kind) {
    case Kind::likelihood:
      return 1.0;
    case Kind::dpd:
      if (beta == 0.0) return 1.0;
      return f > 0.0 ? std::pow(f, beta) : 0.0;
    case Kind::lphi:
      return f > 0.0 ? std::pow(f, 1.0 + beta) * std::log1p(gamma / f) / gamma : 0.0;
  }
  return 0.0;
}

double Weighting::elasticity(double f) const {
  switch (kind) {
    case Kind::likelihood:
      return 0.0;
    case Kind::dpd:
      return beta;
    case Kind::lphi: {
      if (!(f > 0.0)) return 1.0 + beta;
      // 1 + β + fφ'/φ, with fφ'/φ = −γ / ((f+γ) log(1+γ/f)).
      return 1.0 + beta - gamma / ((f + gamma) * std::log1p(gamma / f));
    }
  }
  return 0.0;
}

}  // namespace lphi
