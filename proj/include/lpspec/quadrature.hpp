#pragma once

// Deterministic quadrature primitives and small numeric helpers shared by
// the model, quasimode, and volume code. Everything here is pure and
// single-threaded; summation order is fixed so results are reproducible.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lpspec {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Compensated accumulator. Panel counts get large (1e6+) in the deep-collar
// integrals, so plain left-to-right addition would lose digits.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

template <class F>
double composite_midpoint(F&& f, double a, double b, long panels) {
  if (panels < 1) throw std::invalid_argument("composite_midpoint: panels < 1");
  const double h = (b - a) / double(panels);
  KahanSum acc;
  for (long i = 0; i < panels; ++i) acc.add(f(a + (double(i) + 0.5) * h));
  return acc.value() * h;
}

template <class F>
double composite_simpson(F&& f, double a, double b, long panels) {
  if (panels < 2 || panels % 2 != 0)
    throw std::invalid_argument("composite_simpson: panels must be even and >= 2");
  const double h = (b - a) / double(panels);
  KahanSum acc;
  acc.add(f(a));
  acc.add(f(b));
  for (long i = 1; i < panels; ++i) acc.add((i % 2 ? 4.0 : 2.0) * f(a + double(i) * h));
  return acc.value() * h / 3.0;
}

// Panel-doubling driver around either base rule. The error estimate is the
// standard Richardson one (change / (2^order - 1)); the returned value is the
// finer evaluation, not the extrapolant, so fixed-panel runs of the same rule
// bracket it.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol,
                          long init_panels = 64, long max_panels = (1L << 21),
                          bool use_midpoint = false) {
  if (b < a) throw std::invalid_argument("integrate_adaptive: b < a");
  if (a == b) return 0.0;
  long m = init_panels;
  double prev = use_midpoint ? composite_midpoint(f, a, b, m) : composite_simpson(f, a, b, m);
  const double factor = use_midpoint ? 3.0 : 15.0;
  while (m < max_panels) {
    m *= 2;
    const double cur = use_midpoint ? composite_midpoint(f, a, b, m) : composite_simpson(f, a, b, m);
    const double err = std::abs(cur - prev) / factor;
    if (err <= rel_tol * (std::abs(cur) + 1e-300)) return cur;
    prev = cur;
  }
  return prev;
}

// Uniform tensor grid on the flat n-torus [0, 2pi)^n. The trapezoid rule on a
// periodic grid has equal weights, so integrate() is just a scaled node sum;
// for smooth periodic integrands it converges faster than any power of the
// spacing.
class TorusQuadrature {
 public:
  TorusQuadrature(int dim, int nodes_per_axis) : dim_(dim), m_(nodes_per_axis) {
    if (dim < 1) throw std::invalid_argument("TorusQuadrature: dim < 1");
    if (m_ < 1) throw std::invalid_argument("TorusQuadrature: nodes_per_axis < 1");
  }
  int dim() const { return dim_; }
  int nodes_per_axis() const { return m_; }
  double spacing() const { return kTwoPi / double(m_); }
  double node_weight() const { return std::pow(spacing(), dim_); }
  long node_count() const {
    long c = 1;
    for (int i = 0; i < dim_; ++i) c *= m_;
    return c;
  }

  // Visits every node once, in odometer order. The same vector is reused.
  template <class Fn>
  void for_each(Fn&& fn) const {
    std::vector<int> idx(dim_, 0);
    std::vector<double> y(dim_, 0.0);
    const double h = spacing();
    while (true) {
      for (int d = 0; d < dim_; ++d) y[d] = idx[d] * h;
      fn(static_cast<const std::vector<double>&>(y));
      int d = 0;
      while (d < dim_ && ++idx[d] == m_) idx[d++] = 0;
      if (d == dim_) break;
    }
  }

  template <class F>
  double integrate(F&& f) const {
    KahanSum acc;
    for_each([&](const std::vector<double>& y) { acc.add(f(y)); });
    return acc.value() * node_weight();
  }

 private:
  int dim_;
  int m_;
};

// Shortest signed representative of an angle difference, in [-pi, pi].
inline double wrap_angle(double d) { return std::remainder(d, kTwoPi); }

// Ordinary least-squares slope of ys against xs.
inline double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_slope: need two equally sized samples");
  const double n = double(xs.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0) throw std::invalid_argument("fit_slope: degenerate abscissae");
  return sxy / sxx;
}

// log(sum exp(logs)) without overflow; -inf entries are ignored.
inline double log_sum_exp(const std::vector<double>& logs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logs) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  KahanSum acc;
  for (double v : logs) acc.add(std::exp(v - m));
  return m + std::log(acc.value());
}

}  // namespace lpspec
