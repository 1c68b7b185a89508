#pragma once

// Parabolic spectral-region geometry in the complex plane.
//
// Everything here is closed-form: regions are unions over a curvature
// parameter A of parabolas x >= y^2/width + vertex opening along the
// positive real axis, with width and vertex determined by an exponent
// p in [1,2] and the boundary data (n, alpha0, alpha1, alphaSqRange).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpspec {

using Complex = std::complex<double>;

// Absolute floor of the relative slack used by all membership tests.
// Comparisons are x >= bound - tol*(1 + |x|), so ties land inside.
inline constexpr double kMembershipTol = 1e-12;

// Signals that an operation hit the collapsed p == 2 case and the caller
// must use the ray form instead of the parabola form.
struct DegenerateRegionError : std::domain_error {
  using std::domain_error::domain_error;
};

// Signals that a point lies outside the region an inverse map expects it in.
struct NotInRegionError : std::domain_error {
  using std::domain_error::domain_error;
};

inline double conjugate_exponent(double p) {
  if (std::isinf(p)) return 1.0;
  if (p < 1.0) throw std::invalid_argument("conjugate_exponent: p must be >= 1");
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

// Folds exponents in (2, inf] onto [1, 2); the region formulas are
// invariant under p <-> p/(p-1), so this is how p > 2 is supported.
inline double normalize_exponent(double p) {
  if (std::isnan(p) || p < 1.0) throw std::invalid_argument("exponent must lie in [1, inf]");
  return p > 2.0 ? conjugate_exponent(p) : p;
}

// Closed interval [lo, hi]; lo == hi encodes a single point.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool is_point() const { return lo == hi; }
};

enum class RangeKind { SinglePoint, PointSet, SingleInterval, IntervalUnion };

struct SpectralParams {
  int n = 1;
  double p = 2.0;
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  // Sorted, disjoint, subset of [alpha0^2, alpha1^2], touching both ends.
  std::vector<Interval> alpha_sq_range;

  static SpectralParams make(int n, double p, double alpha0, double alpha1,
                             std::vector<Interval> range = {}) {
    if (n < 1) throw std::invalid_argument("SpectralParams: n must be >= 1");
    if (!(alpha0 > 0.0) || !(alpha1 >= alpha0))
      throw std::invalid_argument("SpectralParams: need 0 < alpha0 <= alpha1");
    SpectralParams sp;
    sp.n = n;
    sp.p = normalize_exponent(p);
    sp.alpha0 = alpha0;
    sp.alpha1 = alpha1;
    const double lo = alpha0 * alpha0, hi = alpha1 * alpha1;
    if (range.empty()) range.push_back({lo, hi});
    std::sort(range.begin(), range.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    const double slack = 1e-9 * (1.0 + hi);
    std::vector<Interval> merged;
    for (const Interval& iv : range) {
      if (!(iv.lo <= iv.hi)) throw std::invalid_argument("SpectralParams: interval with lo > hi");
      if (iv.lo < lo - slack || iv.hi > hi + slack)
        throw std::invalid_argument("SpectralParams: alphaSqRange outside [alpha0^2, alpha1^2]");
      if (!merged.empty() && iv.lo <= merged.back().hi + slack)
        merged.back().hi = std::max(merged.back().hi, iv.hi);
      else
        merged.push_back(iv);
    }
    if (std::abs(merged.front().lo - lo) > slack || std::abs(merged.back().hi - hi) > slack)
      throw std::invalid_argument("SpectralParams: alphaSqRange must touch alpha0^2 and alpha1^2");
    sp.alpha_sq_range = std::move(merged);
    return sp;
  }

  RangeKind range_kind() const {
    const bool all_points = std::all_of(alpha_sq_range.begin(), alpha_sq_range.end(),
                                        [](const Interval& iv) { return iv.is_point(); });
    if (alpha_sq_range.size() == 1)
      return all_points ? RangeKind::SinglePoint : RangeKind::SingleInterval;
    return all_points ? RangeKind::PointSet : RangeKind::IntervalUnion;
  }
};

// x >= y^2/width + vertex, opening rightward. width == 0 marks the
// degenerate case: the real ray [vertex, inf).
struct Parabola {
  double width = 1.0;
  double vertex = 0.0;
  bool degenerate = false;

  double boundary_x(double y) const {
    if (degenerate) throw DegenerateRegionError("Parabola: boundary of a ray is the ray itself");
    return y * y / width + vertex;
  }

  bool contains(Complex z) const {
    const double x = z.real(), y = z.imag();
    const double tol = kMembershipTol * (1.0 + std::abs(x));
    if (degenerate) return std::abs(y) <= kMembershipTol * (1.0 + std::abs(z)) && x >= vertex - tol;
    return x >= y * y / width + vertex - tol;
  }
};

inline Parabola l1_contained_parabola(const SpectralParams& sp) {
  const double w = double(sp.n) * sp.n * sp.alpha1 * sp.alpha1;
  return Parabola{w, 0.0, false};
}

inline Parabola l1_containing_parabola(const SpectralParams& sp) {
  const double n2 = double(sp.n) * sp.n;
  const double w = n2 * sp.alpha1 * sp.alpha1;
  const double v = -n2 * (sp.alpha1 * sp.alpha1 - sp.alpha0 * sp.alpha0) / 4.0;
  return Parabola{w, v, false};
}

// Single member of the L^p family: the parabola carved out by curvature
// value A. Collapses to the ray [A n^2/4, inf) at p == 2.
inline Parabola lp_slice(double A, int n, double p) {
  p = normalize_exponent(p);
  if (!(A > 0.0)) throw std::invalid_argument("lp_slice: A must be positive");
  const double n2 = double(n) * n;
  if (p == 2.0) return Parabola{0.0, A * n2 / 4.0, true};
  const double w = A * n2 * (1.0 - 2.0 / p) * (1.0 - 2.0 / p);
  const double v = A * (n2 / p) * (1.0 - 1.0 / p);
  return Parabola{w, v, false};
}

inline Parabola lp_containing_parabola(const SpectralParams& sp, double p) {
  p = normalize_exponent(p);
  const double n2 = double(sp.n) * sp.n;
  const double bottom = n2 * sp.alpha0 * sp.alpha0 / 4.0;
  if (p == 2.0) return Parabola{0.0, bottom, true};
  const double w = n2 * sp.alpha1 * sp.alpha1 * (2.0 / p - 1.0) * (2.0 / p - 1.0);
  return Parabola{w, bottom - w / 4.0, false};
}

// Union over A in alphaSqRange of lp_slice(A). Membership minimizes the
// slice boundary over A in closed form: the objective
//   F(A) = y^2/(A n^2 (1-2/p)^2) + A (n^2/p)(1-1/p)
// is convex in A, so the minimum sits at the balance point clamped into
// each interval.
struct RegionUnion {
  SpectralParams params;
  double p = 1.0;

  bool degenerate() const { return p == 2.0; }

  Parabola slice(double A) const { return lp_slice(A, params.n, p); }

  // Least boundary abscissa over the A-range at height y.
  double min_boundary(double y) const {
    if (degenerate())
      throw DegenerateRegionError("RegionUnion: p == 2 collapses to rays; use contains()");
    const double n2 = double(params.n) * params.n;
    const double w1 = n2 * (1.0 - 2.0 / p) * (1.0 - 2.0 / p);
    const double v1 = (n2 / p) * (1.0 - 1.0 / p);
    double best = std::numeric_limits<double>::infinity();
    for (const Interval& iv : params.alpha_sq_range) {
      double a;
      if (v1 == 0.0)
        a = iv.hi;  // p == 1: boundary decreases with A
      else if (y == 0.0)
        a = iv.lo;
      else
        a = std::clamp(std::sqrt(y * y / (w1 * v1)), iv.lo, iv.hi);
      const double f = (y == 0.0 ? 0.0 : y * y / (a * w1)) + a * v1;
      best = std::min(best, f);
    }
    return best;
  }

  bool contains(Complex z) const {
    const double x = z.real(), y = z.imag();
    if (degenerate()) {
      if (std::abs(y) > kMembershipTol * (1.0 + std::abs(z))) return false;
      const double n2 = double(params.n) * params.n;
      const double bottom = params.alpha_sq_range.front().lo * n2 / 4.0;
      return x >= bottom - kMembershipTol * (1.0 + std::abs(x));
    }
    return x >= min_boundary(y) - kMembershipTol * (1.0 + std::abs(x));
  }
};

inline RegionUnion lp_contained_region(const SpectralParams& sp, double p) {
  return RegionUnion{sp, normalize_exponent(p)};
}

inline bool membership(const RegionUnion& region, Complex z) { return region.contains(z); }

// Lambda = A lambda(n - lambda).
inline Complex eigenvalue_from_lambda(double A, int n, Complex lambda) {
  return A * lambda * (double(n) - lambda);
}

// Point of the spectrum set carved by exponent q in [p,2] and parameter s:
//   A(s^2 + (n^2/q)(1 - 1/q)) + i A s n (1 - 2/q),
// which equals eigenvalue_from_lambda(A, n, n/q + i s).
inline Complex parametrize_spectrum_set(double q, double s, double A, int n) {
  if (!(q >= 1.0 && q <= 2.0)) throw std::invalid_argument("parametrize_spectrum_set: q in [1,2]");
  if (!(A > 0.0)) throw std::invalid_argument("parametrize_spectrum_set: A must be positive");
  const double n2 = double(n) * n;
  return Complex(A * (s * s + (n2 / q) * (1.0 - 1.0 / q)), A * s * n * (1.0 - 2.0 / q));
}

struct ParamPoint {
  double q = 2.0;
  double s = 0.0;
};

// Inverse of parametrize_spectrum_set at fixed A: recovers the unique
// q in [p,2] whose slice boundary passes through the point, then s.
// The boundary value is monotone in q, so a value-targeted bisection
// suffices. y == 0 with x beyond every vertex collapses to q == 2 and
// s = +sqrt(x/A - n^2/4).
inline ParamPoint invert_parametrization(Complex point, double A, int n, double p) {
  p = normalize_exponent(p);
  if (!(A > 0.0)) throw std::invalid_argument("invert_parametrization: A must be positive");
  const double x = point.real(), y = point.imag();
  const double n2 = double(n) * n;
  const double tol = 1e-13 * (1.0 + std::abs(x));

  const auto boundary = [&](double q) {
    const double head = (y == 0.0) ? 0.0 : y * y / (A * n2 * (1.0 - 2.0 / q) * (1.0 - 2.0 / q));
    return head + A * (n2 / q) * (1.0 - 1.0 / q);
  };

  if (y == 0.0 && x >= A * n2 / 4.0 - tol)
    return ParamPoint{2.0, std::sqrt(std::max(0.0, x / A - n2 / 4.0))};

  if (p == 2.0) throw NotInRegionError("invert_parametrization: point off the p == 2 ray");
  if (x < boundary(p) - tol)
    throw NotInRegionError("invert_parametrization: point below the widest slice boundary");

  double lo = p, hi = 2.0;
  // g(lo) <= x and g(q) -> infinity (y != 0) or n^2 A/4 > x (y == 0) near q = 2.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = boundary(mid);
    if (std::abs(g - x) <= tol) {
      lo = hi = mid;
      break;
    }
    (g < x ? lo : hi) = mid;
    if (hi - lo < 1e-16 * hi) break;
  }
  const double q = 0.5 * (lo + hi);
  const double s = (y == 0.0) ? 0.0 : y / (A * n * (1.0 - 2.0 / q));
  return ParamPoint{q, s};
}

// Opening slope of the cone x >= slope*|y| swept by the slice family.
// p == 1 degenerates to slope 0; p == 2 has no cone.
inline double envelope_slope(double p) {
  p = normalize_exponent(p);
  if (p == 2.0) throw DegenerateRegionError("envelope_slope: undefined at p == 2");
  if (p == 1.0) return 0.0;
  return 2.0 * std::sqrt(p - 1.0) / std::abs(p - 2.0);
}

// Parabolic enclosure of the L^p spectrum for a manifold with volume
// growth rate kappa; its complement is a known resolvent region.
inline Parabola resolvent_region(double kappa, double alpha0, int n, double p) {
  p = normalize_exponent(p);
  if (!(kappa > 0.0)) throw std::invalid_argument("resolvent_region: kappa must be positive");
  const double n2 = double(n) * n;
  const double bottom = n2 * alpha0 * alpha0 / 4.0;
  if (p == 2.0) return Parabola{0.0, bottom, true};
  const double w = kappa * kappa * (2.0 / p - 1.0) * (2.0 / p - 1.0);
  return Parabola{w, bottom - w / 4.0, false};
}

}  // namespace lpspec
