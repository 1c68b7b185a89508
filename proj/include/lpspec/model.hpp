#pragma once

// Collar-coordinate model geometry. The metric on (0, x1] x T^n is
//
//   g = dx^2 / (alpha(y)^2 x^2) + (1 + c x)^2 * (flat torus) / x^2,
//
// taken exactly (no remainder terms). alpha is either constant or a
// trigonometric polynomial acting coordinatewise on the torus. This header
// evaluates the Laplacian of monomials x^lambda and of products
// phi(x) b(y) x^lambda, integrates volumes of radial balls, and solves the
// Sturm-Liouville comparison ODE used for the volume-growth upper bound.

#include "lpspec/quadrature.hpp"
#include "lpspec/region.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpspec {

using TorusPoint = std::vector<double>;

struct CollarPoint {
  double x = 0.0;
  TorusPoint y;
};

// Raised when a requested radius would push the log-coordinate integral
// beyond the range where e^{n u} is representable.
class QuadratureRangeError : public std::runtime_error {
 public:
  explicit QuadratureRangeError(const std::string& what) : std::runtime_error(what) {}
};

// Boundary profile alpha(y) > 0. The trigonometric form is
//   alpha(y) = a0 + sum_i sum_k [ ak cos(k y_i) + bk sin(k y_i) ],
// a sum of one identical univariate function over the torus coordinates.
// That structure makes extremes and interval bounds one-dimensional.
class BoundaryProfile {
 public:
  static BoundaryProfile constant(int n, double value) {
    BoundaryProfile p;
    p.n_ = check_dim(n);
    if (!(value > 0.0)) throw std::invalid_argument("BoundaryProfile: constant value must be > 0");
    p.constant_ = true;
    p.a0_ = value;
    p.alpha0_ = p.alpha1_ = value;
    return p;
  }

  static BoundaryProfile trig(int n, double a0, std::vector<double> cos_coeffs,
                              std::vector<double> sin_coeffs) {
    BoundaryProfile p;
    p.n_ = check_dim(n);
    p.constant_ = false;
    p.a0_ = a0;
    p.ak_ = std::move(cos_coeffs);
    p.bk_ = std::move(sin_coeffs);
    p.bk_.resize(std::max(p.ak_.size(), p.bk_.size()), 0.0);
    p.ak_.resize(p.bk_.size(), 0.0);
    if (p.ak_.empty()) {
      p.constant_ = true;
      if (!(a0 > 0.0)) throw std::invalid_argument("BoundaryProfile: profile must be positive");
      p.alpha0_ = p.alpha1_ = a0;
      return p;
    }
    p.derive_extremes();
    return p;
  }

  int dim() const { return n_; }
  bool is_constant() const { return constant_; }
  double alpha0() const { return alpha0_; }
  double alpha1() const { return alpha1_; }
  double base() const { return a0_; }  // constant term; alpha = base + sum_i f(y_i)

  // One-coordinate building block f(t) with alpha = a0 + sum_i f(y_i).
  double axis_value(double t) const {
    double v = 0.0;
    for (size_t k = 0; k < ak_.size(); ++k) {
      const double kk = double(k + 1);
      v += ak_[k] * std::cos(kk * t) + bk_[k] * std::sin(kk * t);
    }
    return v;
  }
  double axis_derivative(double t) const {
    double v = 0.0;
    for (size_t k = 0; k < ak_.size(); ++k) {
      const double kk = double(k + 1);
      v += kk * (-ak_[k] * std::sin(kk * t) + bk_[k] * std::cos(kk * t));
    }
    return v;
  }

  double value(const TorusPoint& y) const {
    if (constant_) return a0_;
    check_point(y);
    double v = a0_;
    for (double t : y) v += axis_value(t);
    return v;
  }

  double partial(const TorusPoint& y, int i) const {
    if (constant_) return 0.0;
    check_point(y);
    return axis_derivative(y[size_t(i)]);
  }

  // Bound on |f'|; per-coordinate Lipschitz constant of alpha.
  double axis_lipschitz() const {
    double lip = 0.0;
    for (size_t k = 0; k < ak_.size(); ++k)
      lip += double(k + 1) * (std::abs(ak_[k]) + std::abs(bk_[k]));
    return lip;
  }

  // Conservative enclosure of f over [lo, hi]: sampled extremes padded by the
  // Lipschitz modulus of one sampling step.
  std::pair<double, double> axis_range(double lo, double hi) const {
    if (constant_ || hi <= lo) return {axis_value(lo), axis_value(lo)};
    const int m = 512;
    const double h = (hi - lo) / m;
    double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
    for (int i = 0; i <= m; ++i) {
      const double v = axis_value(lo + i * h);
      fmin = std::min(fmin, v);
      fmax = std::max(fmax, v);
    }
    const double pad = axis_lipschitz() * h / 2.0;
    return {fmin - pad, fmax + pad};
  }

 private:
  static int check_dim(int n) {
    if (n < 1) throw std::invalid_argument("BoundaryProfile: dimension must be >= 1");
    return n;
  }
  void check_point(const TorusPoint& y) const {
    if (int(y.size()) != n_)
      throw std::invalid_argument("BoundaryProfile: point dimension mismatch");
  }

  // Locate min/max of f on one period with a parabolic touch-up, then check
  // positivity of alpha with a Lipschitz safety margin.
  void derive_extremes() {
    const int m = 8192;
    const double h = kTwoPi / m;
    std::vector<double> f(m);
    int imin = 0, imax = 0;
    for (int i = 0; i < m; ++i) {
      f[i] = axis_value(i * h);
      if (f[i] < f[imin]) imin = i;
      if (f[i] > f[imax]) imax = i;
    }
    const auto refine = [&](int i, int sign) {
      const double fm = f[size_t((i + m - 1) % m)], f0 = f[size_t(i)], fp = f[size_t((i + 1) % m)];
      const double den = fm - 2 * f0 + fp;
      double best = f0;
      if (sign * den > 0) {
        const double dt = 0.5 * h * (fm - fp) / den;
        const double cand = axis_value(i * h + std::clamp(dt, -h, h));
        if (sign * (best - cand) > 0) best = cand;
      }
      return best;
    };
    const double fmin = refine(imin, +1);
    const double fmax = refine(imax, -1);
    alpha0_ = a0_ + n_ * fmin;
    alpha1_ = a0_ + n_ * fmax;
    const double margin = n_ * axis_lipschitz() * h / 2.0;
    if (!(alpha0_ - margin > 0.0))
      throw std::invalid_argument("BoundaryProfile: profile is not positive everywhere");
  }

  int n_ = 1;
  bool constant_ = true;
  double a0_ = 1.0;
  std::vector<double> ak_, bk_;
  double alpha0_ = 1.0, alpha1_ = 1.0;
};

struct ModelMetric {
  BoundaryProfile profile;
  double x1 = 1.0;
  double c = 0.0;
  double compact_volume = 0.0;

  int n() const { return profile.dim(); }
  void validate() const {
    if (!(x1 > 0.0)) throw std::invalid_argument("ModelMetric: x1 must be > 0");
    if (c < 0.0) throw std::invalid_argument("ModelMetric: c must be >= 0");
    if (compact_volume < 0.0) throw std::invalid_argument("ModelMetric: compact_volume < 0");
  }

  double sqrt_h(double x) const { return std::pow(1.0 + c * x, n()); }
  // x * d/dx log sqrt(h); the drift the torus factor feeds into radial terms.
  double x_dx_log_sqrt_h(double x) const { return n() * c * x / (1.0 + c * x); }
  double x_of_u(double u) const { return x1 * std::exp(-u); }
  double u_of_x(double x) const { return std::log(x1 / x); }
};

inline double volume_density(const ModelMetric& m, const CollarPoint& pt) {
  return std::pow(pt.x, -double(m.n()) - 1.0) * m.sqrt_h(pt.x) / m.profile.value(pt.y);
}

inline Complex complex_pow(double x, Complex lambda) {
  if (x <= 0.0) return Complex(0.0, 0.0);
  return std::exp(lambda * std::log(x));
}

// Laplacian of the monomial x^lambda:
//   alpha^2 lambda (n - lambda) x^lambda - alpha^2 lambda x^{lambda+1} d/dx log sqrt(h).
inline Complex apply_laplacian_monomial(const ModelMetric& m, Complex lambda,
                                        const CollarPoint& pt) {
  const double a = m.profile.value(pt.y);
  const double a2 = a * a;
  const Complex xl = complex_pow(pt.x, lambda);
  const double n = double(m.n());
  return a2 * lambda * (n - lambda) * xl - a2 * lambda * xl * m.x_dx_log_sqrt_h(pt.x);
}

// Laplacian of F = phi(x) b(y) x^lambda, split into the individually
// retrievable pieces of the product expansion. Sign convention: the operator
// is positive (spectrum in the right half-plane), and the first-order profile
// term +x^2 h^{ij} (d_i log alpha) d_j is the one that makes the operator
// symmetric for the volume density x^{-n-1} sqrt(h) / alpha.
//
// Interface expected of Phi: value(x), x_dphi(x) = x phi'(x),
// x2_d2phi(x) = x^2 phi''(x). Of Bump: value(y), partial(y, i),
// sum_second(y) = sum_i d^2 b / dy_i^2.
struct ProductTerms {
  Complex eigen;               // alpha^2 lambda (n - lambda) phi b x^lambda
  Complex cutoff_slope;        // alpha^2 (n - 2 lambda - 1) (x phi') b x^lambda
  Complex monomial_drift;      // -alpha^2 lambda w phi b x^lambda, w = x dlog sqrt(h)
  Complex cutoff_curv;         // -alpha^2 (x^2 phi'') b x^lambda
  Complex cutoff_slope_drift;  // -alpha^2 (x phi') w b x^lambda
  Complex bump_laplace;        // -x^2 (1+cx)^{-2} (sum d^2 b) phi x^lambda
  Complex bump_drift;          // +x^2 (1+cx)^{-2} sum (d_i log alpha)(d_i b) phi x^lambda

  Complex total() const {
    return eigen + cutoff_slope + monomial_drift + cutoff_curv + cutoff_slope_drift +
           bump_laplace + bump_drift;
  }
};

template <class Phi, class Bump>
ProductTerms laplacian_product_terms(const ModelMetric& m, Complex lambda, const Phi& phi,
                                     const Bump& b, const CollarPoint& pt) {
  const double x = pt.x;
  const double a = m.profile.value(pt.y);
  const double a2 = a * a;
  const double n = double(m.n());
  const double w = m.x_dx_log_sqrt_h(x);
  const Complex xl = complex_pow(x, lambda);
  const double pv = phi.value(x), pd = phi.x_dphi(x), pdd = phi.x2_d2phi(x);
  const double bv = b.value(pt.y);

  ProductTerms t;
  t.eigen = a2 * lambda * (n - lambda) * pv * bv * xl;
  t.cutoff_slope = a2 * (n - 2.0 * lambda - 1.0) * pd * bv * xl;
  t.monomial_drift = -a2 * lambda * w * pv * bv * xl;
  t.cutoff_curv = -a2 * pdd * bv * xl;
  t.cutoff_slope_drift = -a2 * pd * w * bv * xl;

  const double hscale = 1.0 / ((1.0 + m.c * x) * (1.0 + m.c * x));
  double drift = 0.0;
  if (!m.profile.is_constant()) {
    for (int i = 0; i < m.n(); ++i)
      drift += m.profile.partial(pt.y, i) / a * b.partial(pt.y, i);
  }
  t.bump_laplace = -x * x * hscale * b.sum_second(pt.y) * pv * xl;
  t.bump_drift = x * x * hscale * drift * pv * xl;
  return t;
}

template <class Phi, class Bump>
Complex apply_laplacian_product(const ModelMetric& m, Complex lambda, const Phi& phi,
                                const Bump& b, const CollarPoint& pt) {
  return laplacian_product_terms(m, lambda, phi, b, pt).total();
}

// Radial distance from the slice {x = x1} along a fixed-y curve.
inline double collar_distance(const ModelMetric& m, double x, const TorusPoint& y) {
  if (!(x > 0.0) || x > m.x1 * (1.0 + 1e-12))
    throw std::invalid_argument("collar_distance: x outside (0, x1]");
  return std::log(m.x1 / x) / m.profile.value(y);
}

struct BallVolumeOptions {
  long u_panels = 0;  // 0: adaptive panel doubling to rel_tol
  int ny = 64;        // torus nodes per axis (variable profiles only)
  double rel_tol = 1e-9;
};

// Volume of {collar_distance <= R} plus the compact stand-in. In u = log(x1/x)
// the integrand is x1^{-n} e^{n u} (1 + c x(u))^n / alpha(y), integrated over
// u in [0, R alpha(y)] and the torus.
inline double ball_volume(const ModelMetric& m, double R, const BallVolumeOptions& opts = {}) {
  m.validate();
  if (R < 0.0) throw std::invalid_argument("ball_volume: R < 0");
  if (R == 0.0) return m.compact_volume;
  const int n = m.n();
  const double u_top = R * m.profile.alpha1();
  if (double(n) * u_top > 600.0)
    throw QuadratureRangeError("ball_volume: R alpha1 = " + std::to_string(u_top) +
                               " exceeds the representable log-coordinate range");

  const auto inner = [&](double ualim) {
    const auto f = [&](double u) {
      const double x = m.x_of_u(u);
      return std::exp(double(n) * u) * std::pow(1.0 + m.c * x, n);
    };
    if (opts.u_panels > 0) return composite_midpoint(f, 0.0, ualim, opts.u_panels);
    return integrate_adaptive(f, 0.0, ualim, opts.rel_tol, 256, 1L << 21, true);
  };

  const double scale = std::pow(m.x1, -double(n));
  double collar;
  if (m.profile.is_constant()) {
    const double a = m.profile.alpha0();
    collar = std::pow(kTwoPi, n) * scale / a * inner(R * a);
  } else {
    TorusQuadrature tq(n, opts.ny);
    collar = tq.integrate([&](const TorusPoint& y) {
      const double a = m.profile.value(y);
      return scale / a * inner(R * a);
    });
  }
  return m.compact_volume + collar;
}

// Least-squares slope of log Vol(R) over the largest half of Rlist.
inline double volume_growth_rate(const ModelMetric& m, const std::vector<double>& Rlist,
                                 const BallVolumeOptions& opts = {}) {
  if (Rlist.size() < 3) throw std::invalid_argument("volume_growth_rate: need >= 3 radii");
  for (size_t i = 1; i < Rlist.size(); ++i)
    if (!(Rlist[i] > Rlist[i - 1]))
      throw std::invalid_argument("volume_growth_rate: radii must increase");
  const size_t start = Rlist.size() / 2;
  std::vector<double> xs, ys;
  for (size_t i = start; i < Rlist.size(); ++i) {
    xs.push_back(Rlist[i]);
    ys.push_back(std::log(ball_volume(m, Rlist[i], opts)));
  }
  return fit_slope(xs, ys);
}

// Comparison ODE u'' + q u = 0, u(0) = 0, u'(0) = 1, with
// q = -(alpha1 + eps)^2 outside [s, t) and q = -gamma^2 inside. Solutions grow
// like e^{(alpha1+eps) r}, so the integrator carries a separate log scale and
// the reported volume bound integral of u^n is assembled in the log domain.
struct SturmLiouvilleResult {
  std::vector<double> r;
  std::vector<double> u;      // plain values; +inf where the scale overflows
  std::vector<double> log_u;  // log u (-inf at r = 0)
  double vol_bound = 0.0;     // integral of u^n over [0, R]
  double log_vol_bound = 0.0;
};

inline SturmLiouvilleResult sturm_liouville_compare(double s, double t, double alpha1eps,
                                                    double gamma, double R, int n,
                                                    double max_step = 1e-3) {
  if (!(0.0 <= s && s <= t && t <= R))
    throw std::invalid_argument("sturm_liouville_compare: need 0 <= s <= t <= R");
  if (!(alpha1eps > 0.0) || gamma < alpha1eps)
    throw std::invalid_argument("sturm_liouville_compare: need gamma >= alpha1eps > 0");
  if (n < 1) throw std::invalid_argument("sturm_liouville_compare: n < 1");
  const double h_target = std::min(max_step, 0.02 / gamma);
  if (R / h_target > 5e7) throw std::invalid_argument("sturm_liouville_compare: step budget");

  SturmLiouvilleResult out;
  double U = 0.0, V = 1.0, log_scale = 0.0, r = 0.0;
  const auto record = [&]() {
    out.r.push_back(r);
    const double lu = U > 0.0 ? std::log(U) + log_scale : -std::numeric_limits<double>::infinity();
    out.log_u.push_back(lu);
    out.u.push_back(lu > 700.0 ? std::numeric_limits<double>::infinity() : U * std::exp(log_scale));
  };
  record();

  const double segs[4] = {0.0, s, t, R};
  for (int seg = 0; seg < 3; ++seg) {
    const double a = segs[seg], b = segs[seg + 1];
    if (b <= a) continue;
    const double rate = (seg == 1) ? gamma : alpha1eps;
    const double q = -rate * rate;
    const long steps = std::max(1L, long(std::ceil((b - a) / h_target)));
    const double h = (b - a) / double(steps);
    for (long i = 0; i < steps; ++i) {
      // RK4 for (u, v)' = (v, -q u)
      const double k1u = V, k1v = -q * U;
      const double k2u = V + 0.5 * h * k1v, k2v = -q * (U + 0.5 * h * k1u);
      const double k3u = V + 0.5 * h * k2v, k3v = -q * (U + 0.5 * h * k2u);
      const double k4u = V + h * k3v, k4v = -q * (U + h * k3u);
      U += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
      V += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      const double mag = std::max(std::abs(U), std::abs(V));
      if (mag > 1e140) {
        U /= mag;
        V /= mag;
        log_scale += std::log(mag);
      }
      r = a + double(i + 1) * h;
      record();
    }
  }

  // trapezoid of u^n on the recorded grid, assembled as log-sum-exp
  std::vector<double> seg_logs;
  seg_logs.reserve(out.r.size());
  for (size_t i = 0; i + 1 < out.r.size(); ++i) {
    const double h = out.r[i + 1] - out.r[i];
    const double l0 = double(n) * out.log_u[i], l1 = double(n) * out.log_u[i + 1];
    seg_logs.push_back(std::log(h / 2.0) + log_sum_exp({l0, l1}));
  }
  out.log_vol_bound = log_sum_exp(seg_logs);
  out.vol_bound = out.log_vol_bound > 700.0 ? std::numeric_limits<double>::infinity()
                                            : std::exp(out.log_vol_bound);
  return out;
}

}  // namespace lpspec
