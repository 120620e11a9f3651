#include "lphi/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lphi/errors.hpp"
#include "lphi/linalg.hpp"

namespace lphi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
double guarded(F&& f, const VectorXd& x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  } catch (const NumericalError&) {
    return kInf;
  } catch (const InputError&) {
    return kInf;
  }
}

}  // namespace

MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& g, const VectorXd& x, double rel_step) {
  const auto p = x.size();
  MatrixXd jac(p, p);
  VectorXd xp = x, xm = x;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    VectorXd gp = g(xp), gm = g(xm);
    if (gp.size() != p) jac.resize(gp.size(), p);
    jac.col(j) = (gp - gm) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return jac;
}

MinimizeResult nelder_mead(const std::function<double(const VectorXd&)>& f, VectorXd x0, double step,
                           int max_iterations, double ftol) {
  const auto p = x0.size();
  std::vector<VectorXd> pts(p + 1, x0);
  std::vector<double> val(p + 1);
  for (Eigen::Index j = 0; j < p; ++j) pts[j + 1][j] += step * std::max(1.0, std::abs(x0[j]));
  for (std::size_t i = 0; i < pts.size(); ++i) val[i] = guarded(f, pts[i]);
  std::vector<std::size_t> order(p + 1);
  int it = 0;
  for (; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    const auto best = order.front(), worst = order.back(), second = order[p - 1];
    if (std::isfinite(val[worst]) && val[worst] - val[best] <= ftol * (std::abs(val[best]) + 1e-30)) break;
    VectorXd c = VectorXd::Zero(p);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) c += pts[order[i]];
    c /= static_cast<double>(p);
    VectorXd xr = c + (c - pts[worst]);
    const double fr = guarded(f, xr);
    if (fr < val[best]) {
      VectorXd xe = c + 2.0 * (c - pts[worst]);
      const double fe = guarded(f, xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
    } else if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
    } else {
      VectorXd xc = fr < val[worst] ? VectorXd(c + 0.5 * (xr - c)) : VectorXd(c + 0.5 * (pts[worst] - c));
      const double fc = guarded(f, xc);
      if (fc < std::min(fr, val[worst])) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          val[i] = guarded(f, pts[i]);
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
  return {pts[best], val[best], it, false};
}

MinimizeResult newton_minimize(const SmoothObjective& f, VectorXd x, const MinimizeOptions& opt) {
  double fx = f.value(x);
  if (!std::isfinite(fx)) throw NumericalError("objective is not finite at the start");
  MinimizeResult res;
  int restarts = 0;
  int it = 0;
  while (it < opt.max_iterations) {
    ++it;
    const VectorXd g = f.gradient(x);
    const MatrixXd h = symmetrize(fd_jacobian(f.gradient, x));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    VectorXd lam = es.eigenvalues().cwiseAbs();
    const double floor = 1e-10 * std::max(lam.maxCoeff(), 1e-300);
    lam = lam.cwiseMax(floor);
    VectorXd d = -(es.eigenvectors() * (es.eigenvectors().transpose() * g).cwiseQuotient(lam));
    if (!d.allFinite()) d = -g;
    const double slope = g.dot(d);
    const double slack = 1e-13 * (1.0 + std::abs(fx));
    double t = 1.0, fn = kInf;
    bool ok = false;
    for (int k = 0; k < 60; ++k) {
      fn = guarded(f.value, x + t * d);
      if (fn <= fx + 1e-4 * t * slope + slack) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    const double step = t * d.lpNorm<Eigen::Infinity>();
    if (!ok) {
      if (d.lpNorm<Eigen::Infinity>() < opt.step_tol) {
        res.step_converged = true;
        break;
      }
      if (restarts++ >= 3) break;
      auto nm = nelder_mead(f.value, x, 0.05, 200 * static_cast<int>(x.size()), 1e-12);
      if (nm.value < fx) {
        x = nm.x;
        fx = nm.value;
      }
      continue;
    }
    x += t * d;
    fx = fn;
    if (step < opt.step_tol) {
      res.step_converged = true;
      break;
    }
  }
  res.x = x;
  res.value = fx;
  res.iterations = it;
  return res;
}

}  // namespace lphi
