#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "lphi/errors.hpp"

namespace lphi {

struct QuadratureSpec {
  double abs_tol = 1e-9;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;
  // nullopt means "use the model's default window".
  std::optional<std::pair<double, double>> support_truncation;

  void validate() const;
};

template <class V>
struct QuadResult {
  V value;
  double error = 0.0;
  int panels = 0;
};

namespace detail {

// 21-point Kronrod rule with embedded 10-point Gauss rule on [-1, 1].
// Index 0 is the centre node; odd indices are the Gauss nodes.
struct Gk21 {
  static const std::array<double, 11>& nodes();
  static const std::array<double, 11>& kronrod();
  static const std::array<double, 5>& gauss();
};

inline double err_norm(double v) { return std::abs(v); }
inline double err_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

template <class V>
struct Panel {
  double a, b;
  V value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class V, class F>
Panel<V> gk21(F& f, double a, double b) {
  const auto& x = Gk21::nodes();
  const auto& wk = Gk21::kronrod();
  const auto& wg = Gk21::gauss();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  V fc = f(c);
  V k = fc * wk[0];
  V g = fc * 0.0;
  for (int i = 1; i < 11; ++i) {
    V s = f(c - h * x[i]) + f(c + h * x[i]);
    k += s * wk[i];
    if (i & 1) g += s * wg[i / 2];
  }
  Panel<V> p{a, b, k * h, 0.0};
  p.error = err_norm(V((k - g) * h));
  return p;
}

}  // namespace detail

// Adaptive Gauss–Kronrod over the panels defined by consecutive breakpoints.
// The worst panel is bisected until the summed error estimate is below
// max(abs_tol, rel_tol * |I|) or max_subdivisions panels are in use.
template <class V, class F>
QuadResult<V> integrate(F&& f, std::span<const double> breaks, double abs_tol, double rel_tol,
                        int max_subdivisions) {
  if (breaks.size() < 2) throw InputError("integrate: need at least two breakpoints");
  std::priority_queue<detail::Panel<V>> heap;
  std::vector<detail::Panel<V>> frozen;
  double err = 0.0;
  std::optional<V> total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i] < breaks[i + 1])) continue;
    auto p = detail::gk21<V>(f, breaks[i], breaks[i + 1]);
    err += p.error;
    if (total) *total += p.value; else total = p.value;
    heap.push(std::move(p));
  }
  if (!total) throw InputError("integrate: degenerate interval");
  int count = static_cast<int>(heap.size());
  auto target = [&] { return std::max(abs_tol, rel_tol * detail::err_norm(*total)); };
  while (err > target() && !heap.empty()) {
    if (count >= max_subdivisions) break;
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {
      frozen.push_back(std::move(worst));
      continue;
    }
    auto left = detail::gk21<V>(f, worst.a, mid);
    auto right = detail::gk21<V>(f, mid, worst.b);
    err += left.error + right.error - worst.error;
    *total += left.value + right.value - worst.value;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++count;
  }
  // Re-sum to shed drift from the running updates.
  V sum = *total * 0.0;
  double e = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  for (const auto& p : frozen) {
    sum += p.value;
    e += p.error;
  }
  const double tol = std::max(abs_tol, rel_tol * detail::err_norm(sum));
  if (!(e <= tol) || !std::isfinite(detail::err_norm(sum))) {
    throw QuadratureError("quadrature did not converge (error estimate " + std::to_string(e) +
                              ", tolerance " + std::to_string(tol) + ")",
                          e);
  }
  return {sum, e, count};
}

template <class V, class F>
QuadResult<V> integrate(F&& f, double a, double b, const QuadratureSpec& q) {
  const double br[2] = {a, b};
  return integrate<V>(std::forward<F>(f), std::span<const double>(br, 2), q.abs_tol, q.rel_tol,
                      q.max_subdivisions);
}

// Evenly spaced breakpoints, handy for bell-shaped integrands on wide windows.
std::vector<double> even_breaks(double a, double b, int panels);

}  // namespace lphi
