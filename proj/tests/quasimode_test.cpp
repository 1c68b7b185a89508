#include "lpspec/quasimode.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace lpspec {
namespace {

constexpr double kPi = std::numbers::pi;

ModelMetric metric_const(int n, double alpha, double c, double x1) {
  return ModelMetric{BoundaryProfile::constant(n, alpha), x1, c, 1.0};
}

// alpha(y) = 1.5 + 0.5 cos(y); extremes 1 and 2, so alpha^2 spans [1, 4]
ModelMetric metric_cosine(double c, double x1) {
  return ModelMetric{BoundaryProfile::trig(1, 1.5, {0.5}, {}), x1, c, 1.0};
}

TEST(Cutoff, FrozenSmoothstepMidpoint) {
  const CutoffPhi phi(10.0, 1.0, 4);
  // Order-4 smoothstep is 126t^5 - 420t^6 + 540t^7 - 315t^8 + 70t^9. At
  // t = 1/2 everything is dyadic, so the comparisons are exact.
  EXPECT_DOUBLE_EQ(phi.value_u(kLn2 / 2.0), 0.5);
  EXPECT_DOUBLE_EQ(phi.du(kLn2 / 2.0) * kLn2, 2.4609375);
  // symmetric fall: same profile mirrored (L - u re-rounds, so only NEAR)
  EXPECT_NEAR(phi.value_u(10.0 - kLn2 / 2.0), 0.5, 1e-12);
  EXPECT_NEAR(phi.du(10.0 - kLn2 / 2.0) * kLn2, -2.4609375, 1e-12);
}

TEST(Cutoff, DerivativesMatchFiniteDifferences) {
  const CutoffPhi phi(8.0, 1.0, 4);
  const double h = 1e-5;
  for (double u : {0.1, 0.3, 0.55, 8.0 - 0.6, 8.0 - 0.2}) {
    const double fd1 = (phi.value_u(u + h) - phi.value_u(u - h)) / (2.0 * h);
    const double fd2 = (phi.du(u + h) - phi.du(u - h)) / (2.0 * h);
    EXPECT_NEAR(phi.du(u), fd1, 1e-5) << "u = " << u;
    EXPECT_NEAR(phi.d2u(u), fd2, 1e-6 * (1.0 + std::abs(fd2))) << "u = " << u;
  }
}

TEST(Cutoff, SupportPlateauAndSmoothJoins) {
  const double L = 12.0;
  const CutoffPhi phi(L, 1.0, 4);
  EXPECT_EQ(phi.value_u(0.0), 0.0);
  EXPECT_EQ(phi.value_u(-3.0), 0.0);
  EXPECT_EQ(phi.value_u(L), 0.0);
  EXPECT_EQ(phi.value_u(L + 1.0), 0.0);
  EXPECT_DOUBLE_EQ(phi.value_u(kLn2), 1.0);
  EXPECT_DOUBLE_EQ(phi.value_u(L / 2.0), 1.0);
  EXPECT_DOUBLE_EQ(phi.value_u(L - kLn2), 1.0);
  EXPECT_EQ(phi.du(L / 2.0), 0.0);
  EXPECT_EQ(phi.d2u(L / 2.0), 0.0);
  // k flat derivatives at each end of the smoothstep: approaching a join the
  // slope dies like (distance)^4, down to the cancellation noise floor
  EXPECT_LT(std::abs(phi.du(kLn2 - 1e-6)), 1e-11);
  EXPECT_LT(std::abs(phi.du(1e-6)), 1e-15);
  EXPECT_LT(std::abs(phi.d2u(kLn2 - 1e-6)), 1e-9);
  EXPECT_EQ(phi.plateau_lo(), kLn2);
  EXPECT_EQ(phi.plateau_hi(), L - kLn2);
}

TEST(Cutoff, XDomainContract) {
  const double L = 30.0, x1 = 0.5;
  const CutoffPhi phi(L, x1, 4);
  const double delta = phi.delta();
  EXPECT_DOUBLE_EQ(delta, x1 * std::exp(-L));
  EXPECT_EQ(phi.value(x1), 0.0);
  EXPECT_EQ(phi.value(x1 + 1.0), 0.0);
  EXPECT_DOUBLE_EQ(phi.value(x1 / 2.0), 1.0);
  EXPECT_DOUBLE_EQ(phi.value(2.0 * delta), 1.0);
  EXPECT_EQ(phi.value(delta), 0.0);
  EXPECT_EQ(phi.value(delta / 2.0), 0.0);
  EXPECT_EQ(phi.value(0.0), 0.0);
  EXPECT_EQ(phi.value(-1.0), 0.0);

  // chain rule through u = log(x1/x) against finite differences in x; the
  // second difference needs a larger relative step to stay above roundoff
  for (double x : {0.41, 0.3, 3.0 * delta, 1.4 * delta}) {
    const double h1 = x * 1e-6;
    const double fd1 = (phi.value(x + h1) - phi.value(x - h1)) / (2.0 * h1);
    EXPECT_NEAR(phi.x_dphi(x), x * fd1, 1e-5 * (1.0 + std::abs(x * fd1)));
    const double h2 = x * 1e-4;
    const double fd2 =
        (phi.value(x + h2) - 2.0 * phi.value(x) + phi.value(x - h2)) / (h2 * h2);
    EXPECT_NEAR(phi.x2_d2phi(x), x * x * fd2, 1e-4 * (1.0 + std::abs(x * x * fd2)));
  }
}

TEST(Cutoff, ScannedBoundsDominate) {
  const CutoffPhi phi(20.0, 1.0, 4);
  const double ms = phi.max_slope(), mc = phi.max_curv();
  EXPECT_GT(ms, 0.0);
  EXPECT_GT(mc, ms);
  for (int i = 0; i <= 400; ++i) {
    const double u = 20.0 * i / 400.0;
    EXPECT_LE(std::abs(phi.du(u)), ms * (1.0 + 1e-12));
    EXPECT_LE(std::abs(phi.d2u(u) + phi.du(u)), mc * (1.0 + 1e-12));
  }
}

TEST(Cutoff, RejectsBadParameters) {
  EXPECT_THROW(CutoffPhi(1.0, 1.0), std::invalid_argument);        // L < 2 log 2
  EXPECT_THROW(CutoffPhi(2.0 * kLn2, 1.0), std::invalid_argument);  // boundary
  EXPECT_THROW(CutoffPhi(10.0, 0.0), std::invalid_argument);
  EXPECT_THROW(CutoffPhi(10.0, -1.0), std::invalid_argument);
  EXPECT_THROW(CutoffPhi(10.0, 1.0, 1), std::invalid_argument);
  EXPECT_NO_THROW(CutoffPhi(10.0, 1.0, 2));
}

TEST(Bump, CenterSupportAndWrap) {
  const BumpB b = BumpB::mollifier({0.3, -0.4}, 1.1);
  EXPECT_DOUBLE_EQ(b.value({0.3, -0.4}), 1.0);
  EXPECT_EQ(b.value({0.3 + 1.1, -0.4}), 0.0);
  EXPECT_EQ(b.value({0.3, -0.4 + 2.0}), 0.0);
  EXPECT_GT(b.value({0.8, -0.1}), 0.0);
  // periodicity: shifting any coordinate by 2 pi changes nothing
  EXPECT_DOUBLE_EQ(b.value({0.3 + 4.0 * kPi, -0.4 - 2.0 * kPi}), 1.0);
  EXPECT_NEAR(b.value({0.9, 0.1}), b.value({0.9 - 2.0 * kPi, 0.1 + 2.0 * kPi}), 1e-12);
  EXPECT_FALSE(b.is_constant());
  EXPECT_EQ(b.dim(), 2);
  EXPECT_DOUBLE_EQ(b.radius(), 1.1);
}

TEST(Bump, DerivativesMatchFiniteDifferences) {
  const BumpB b = BumpB::mollifier({0.3, -0.4}, 1.1);
  const std::vector<TorusPoint> pts = {{0.8, -0.1}, {0.1, -0.9}, {0.35, -0.38}};
  const double h = 1e-5;
  for (const auto& y : pts) {
    double fd_lap = 0.0;
    for (int i = 0; i < 2; ++i) {
      TorusPoint yp = y, ym = y;
      yp[size_t(i)] += h;
      ym[size_t(i)] -= h;
      const double fd = (b.value(yp) - b.value(ym)) / (2.0 * h);
      EXPECT_NEAR(b.partial(y, i), fd, 1e-7) << "i = " << i;
      fd_lap += (b.value(yp) - 2.0 * b.value(y) + b.value(ym)) / (h * h);
    }
    EXPECT_NEAR(b.sum_second(y), fd_lap, 1e-4);
  }
}

TEST(Bump, RadialSecondDerivativeAtCenter) {
  for (int n : {1, 2, 3}) {
    const TorusPoint c(size_t(n), 0.7);
    const double r = 0.9, amp = 2.5;
    const BumpB b = BumpB::mollifier(c, r, 2, amp);
    EXPECT_DOUBLE_EQ(b.sum_second(c), -2.0 * double(n) * amp / (r * r));
    EXPECT_EQ(b.partial(c, 0), 0.0);
  }
}

TEST(Bump, AmplitudeScalesLinearly) {
  const BumpB b1 = BumpB::mollifier({0.0}, 1.0, 2, 1.0);
  const BumpB b3 = BumpB::mollifier({0.0}, 1.0, 2, 3.0);
  for (double t : {0.0, 0.2, 0.5, 0.8}) {
    EXPECT_DOUBLE_EQ(b3.value({t}), 3.0 * b1.value({t}));
    EXPECT_DOUBLE_EQ(b3.partial({t}, 0), 3.0 * b1.partial({t}, 0));
    EXPECT_DOUBLE_EQ(b3.sum_second({t}), 3.0 * b1.sum_second({t}));
  }
  const BumpB bneg = BumpB::mollifier({0.0}, 1.0, 2, -1.0);
  EXPECT_DOUBLE_EQ(bneg.value({0.0}), -1.0);
}

TEST(Bump, ConstantOneIsFlat) {
  const BumpB b = BumpB::constant_one(3);
  EXPECT_TRUE(b.is_constant());
  EXPECT_DOUBLE_EQ(b.value({1.0, 2.0, 3.0}), 1.0);
  EXPECT_EQ(b.partial({1.0, 2.0, 3.0}, 1), 0.0);
  EXPECT_EQ(b.sum_second({1.0, 2.0, 3.0}), 0.0);
  EXPECT_DOUBLE_EQ(b.radius(), kPi);
}

TEST(Bump, RejectsBadParameters) {
  EXPECT_THROW(BumpB::mollifier({}, 1.0), std::invalid_argument);
  EXPECT_THROW(BumpB::mollifier({0.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(BumpB::mollifier({0.0}, -0.5), std::invalid_argument);
  EXPECT_THROW(BumpB::mollifier({0.0}, 3.3), std::invalid_argument);
  EXPECT_THROW(BumpB::mollifier({0.0}, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(BumpB::mollifier({0.0}, 1.0, 2, 0.0), std::invalid_argument);
}

TEST(BumpBall, FrozenCosineWindow) {
  // alpha = 1.5 + 0.5 cos y, A = 4, eps = 0.1. The best center is y = 0 where
  // alpha^2 = 4 exactly; the lower edge alpha^2 = 3.9 is hit at
  // r = acos(2 sqrt(3.9) - 3) ~ 0.31857, minus a small conservative pad.
  const auto profile = BoundaryProfile::trig(1, 1.5, {0.5}, {});
  const BumpB b = find_bump_ball(profile, 4.0, 0.1);
  ASSERT_EQ(b.dim(), 1);
  EXPECT_NEAR(b.center()[0], 0.0, 1e-12);
  EXPECT_NEAR(b.radius(), 0.31857, 4e-3);
  // the returned ball genuinely sits inside the window and is near-maximal
  const double a_edge = 1.5 + 0.5 * std::cos(b.radius());
  const double a_past = 1.5 + 0.5 * std::cos(b.radius() + 0.01);
  EXPECT_GT(a_edge * a_edge, 3.9);
  EXPECT_LT(a_past * a_past, 3.9);
}

TEST(BumpBall, CenterMovesToProfileMinimum) {
  // A = 1 needs alpha = 1, reached at y = pi; there the cap alpha^2 < 1.1
  // binds instead: r = acos((2.048...) - 3)... numerically 0.44553.
  const auto profile = BoundaryProfile::trig(1, 1.5, {0.5}, {});
  const BumpB b = find_bump_ball(profile, 1.0, 0.1);
  EXPECT_NEAR(b.center()[0], kPi, 1e-12);
  EXPECT_NEAR(b.radius(), 0.44553, 4e-3);
  const double a_edge = 1.5 - 0.5 * std::cos(b.radius());
  const double a_past = 1.5 - 0.5 * std::cos(b.radius() + 0.01);
  EXPECT_LT(a_edge * a_edge, 1.1);
  EXPECT_GT(a_past * a_past, 1.1);
}

TEST(BumpBall, RadiusGrowsWithEpsilon) {
  const auto profile = BoundaryProfile::trig(1, 1.5, {0.5}, {});
  const double r1 = find_bump_ball(profile, 4.0, 0.05).radius();
  const double r2 = find_bump_ball(profile, 4.0, 0.1).radius();
  const double r3 = find_bump_ball(profile, 4.0, 0.2).radius();
  EXPECT_LT(r1, r2);
  EXPECT_LT(r2, r3);
}

TEST(BumpBall, TwoDimensionalSplitProfile) {
  // 1.5 + 0.25 cos y1 + 0.25 cos y2 has the same section through the diagonal
  // box corner as the 1-D case, so the fitted radius matches it closely.
  const auto p2 = BoundaryProfile::trig(2, 1.5, {0.25}, {});
  const BumpB b = find_bump_ball(p2, 4.0, 0.1);
  ASSERT_EQ(b.dim(), 2);
  EXPECT_NEAR(b.center()[0], 0.0, 1e-12);
  EXPECT_NEAR(b.center()[1], 0.0, 1e-12);
  EXPECT_NEAR(b.radius(), 0.31857, 4e-3);
}

TEST(BumpBall, ConstantProfileIsAllOrNothing) {
  const auto profile = BoundaryProfile::constant(2, 1.4);
  const BumpB b = find_bump_ball(profile, 1.96, 0.05);
  EXPECT_DOUBLE_EQ(b.radius(), kPi);
  EXPECT_EQ(b.center()[0], 0.0);
  EXPECT_THROW(find_bump_ball(profile, 3.0, 0.5), EmptyPreimageError);
}

TEST(BumpBall, ThrowsWhenWindowMissesRange) {
  const auto profile = BoundaryProfile::trig(1, 1.5, {0.5}, {});
  EXPECT_THROW(find_bump_ball(profile, 9.0, 0.1), EmptyPreimageError);   // above range
  EXPECT_THROW(find_bump_ball(profile, 0.5, 0.1), EmptyPreimageError);   // below range
  EXPECT_THROW(find_bump_ball(profile, 4.0, -1.0), std::invalid_argument);
}

TEST(Spec, MakeFillsDerivedFields) {
  const auto spec = QuasimodeSpec::make(2, 1.5, 3.0, 0.1, 0.7, 50.0);
  EXPECT_EQ(spec.n, 2);
  EXPECT_DOUBLE_EQ(spec.lambda.real(), 2.0 / 1.5);
  EXPECT_DOUBLE_EQ(spec.lambda.imag(), 0.7);
  const Complex want = eigenvalue_from_lambda(3.0, 2, spec.lambda);
  EXPECT_DOUBLE_EQ(spec.Lambda.real(), want.real());
  EXPECT_DOUBLE_EQ(spec.Lambda.imag(), want.imag());
}

TEST(Spec, RejectsBadParameters) {
  EXPECT_THROW(QuasimodeSpec::make(0, 1.5, 1.0, 0.1, 0.0, 10.0), std::invalid_argument);
  EXPECT_THROW(QuasimodeSpec::make(1, 0.5, 1.0, 0.1, 0.0, 10.0), std::invalid_argument);
  EXPECT_THROW(QuasimodeSpec::make(1, 2.5, 1.0, 0.1, 0.0, 10.0), std::invalid_argument);
  EXPECT_THROW(QuasimodeSpec::make(1, 1.5, 0.0, 0.1, 0.0, 10.0), std::invalid_argument);
  EXPECT_THROW(QuasimodeSpec::make(1, 1.5, 1.0, 0.0, 0.0, 10.0), std::invalid_argument);
  EXPECT_THROW(QuasimodeSpec::make(1, 1.5, 1.0, 0.1, 0.0, 1.0), std::invalid_argument);
}

TEST(Spec, SampledPointsLandInContainedRegion) {
  // Every (A, s) with A in [alpha0^2, alpha1^2] parametrizes a point of the
  // slice family making up the contained region.
  const auto sp = SpectralParams::make(1, 1.4, 1.0, 2.0);
  const auto region = lp_contained_region(sp, 1.4);
  std::vector<QuasimodeSpec> specs;
  for (double A : {1.0, 1.7, 2.9, 4.0})
    for (double s : {0.0, 0.4, 2.0, -1.3})
      specs.push_back(QuasimodeSpec::make(1, 1.4, A, 0.1, s, 20.0));
  const auto pts = spectral_sample(specs);
  ASSERT_EQ(pts.size(), specs.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    EXPECT_TRUE(region.contains(pts[i].Lambda)) << "point " << i;
    const Complex direct = parametrize_spectrum_set(pts[i].q, pts[i].s, pts[i].A, 1);
    EXPECT_NEAR(std::abs(pts[i].Lambda - direct), 0.0, 1e-12);
  }
}

TEST(Norm, MatchesOneDimensionalOracle) {
  const auto m = metric_const(2, 1.3, 0.2, 0.7);
  const auto spec = QuasimodeSpec::make(2, 1.4, 1.0, 0.1, 0.3, 30.0);
  const auto q = make_quasimode(m, spec, BumpChoice::ConstantOne);
  const double got = lp_norm(q, spec.p, m);

  const double torus = std::pow(2.0 * kPi, 2) / 1.3;
  const double iu = integrate_adaptive(
      [&](double u) {
        const double x = m.x_of_u(u);
        return std::pow(q.phi.value_u(u), spec.p) * std::pow(1.0 + 0.2 * x, 2);
      },
      0.0, 30.0, 1e-13);
  EXPECT_NEAR(got, std::pow(iu * torus, 1.0 / spec.p), 1e-7 * got);
}

TEST(Norm, SeparatesOverVariableProfile) {
  const auto m = metric_cosine(0.0, 1.0);
  const auto spec = QuasimodeSpec::make(1, 1.3, 4.0, 1.2, 0.4, 25.0);
  const auto q = make_quasimode(m, spec);
  ASSERT_FALSE(q.bump.is_constant());

  QuadratureOptions opts;
  opts.ny = 256;
  const double got = lp_norm(q, spec.p, m, opts);

  TorusQuadrature tq(1, 2048);
  const double torus = tq.integrate([&](const TorusPoint& y) {
    return std::pow(std::abs(q.bump.value(y)), spec.p) / m.profile.value(y);
  });
  const double iu = integrate_adaptive(
      [&](double u) { return std::pow(q.phi.value_u(u), spec.p); }, 0.0, 25.0, 1e-13);
  EXPECT_NEAR(got, std::pow(iu * torus, 1.0 / spec.p), 1e-8 * got);
}

TEST(Norm, HomogeneousInBumpAmplitude) {
  const auto m = metric_cosine(0.1, 0.8);
  const auto spec = QuasimodeSpec::make(1, 1.5, 2.0, 0.1, 0.0, 15.0);
  const CutoffPhi phi(spec.L, m.x1);
  const Quasimode q1{spec, phi, BumpB::mollifier({1.0}, 0.9, 2, 1.0)};
  const Quasimode q2{spec, phi, BumpB::mollifier({1.0}, 0.9, 2, 2.0)};
  const double n1 = lp_norm(q1, spec.p, m), n2 = lp_norm(q2, spec.p, m);
  EXPECT_NEAR(n2, 2.0 * n1, 1e-12 * n2);
}

TEST(Norm, SandwichedByPlateauAndWarpBounds) {
  const auto m = metric_cosine(0.3, 0.9);
  const double L = 40.0, p = 1.2;
  const auto spec = QuasimodeSpec::make(1, p, 3.0, 0.8, 0.5, L);
  const auto q = make_quasimode(m, spec);
  QuadratureOptions opts;
  const double norm_p = std::pow(lp_norm(q, p, m, opts), p);
  TorusQuadrature tq(1, opts.ny);
  const double tb = tq.integrate([&](const TorusPoint& y) {
    return std::pow(std::abs(q.bump.value(y)), p) / m.profile.value(y);
  });
  EXPECT_GE(norm_p, (L - 2.0 * kLn2) * tb * (1.0 - 1e-12));
  EXPECT_LE(norm_p, L * std::pow(1.0 + 0.3 * 0.9, 1) * tb * (1.0 + 1e-12));
}

TEST(Norm, PlateauExtensionIsExactlyLinear) {
  const auto m = metric_const(1, 2.0, 0.0, 1.0);
  const double p = 1.5;
  const auto q100 =
      make_quasimode(m, QuasimodeSpec::make(1, p, 4.0, 0.1, 0.0, 100.0), BumpChoice::ConstantOne);
  const auto q300 =
      make_quasimode(m, QuasimodeSpec::make(1, p, 4.0, 0.1, 0.0, 300.0), BumpChoice::ConstantOne);
  const double tb = 2.0 * kPi / 2.0;
  const double d = std::pow(lp_norm(q300, p, m), p) - std::pow(lp_norm(q100, p, m), p);
  EXPECT_NEAR(d, 200.0 * tb, 1e-9 * d);
}

TEST(Norm, RejectsMismatchedExponent) {
  const auto m = metric_const(1, 1.0, 0.0, 1.0);
  const auto q =
      make_quasimode(m, QuasimodeSpec::make(1, 1.5, 1.0, 0.1, 0.0, 10.0), BumpChoice::ConstantOne);
  EXPECT_THROW(lp_norm(q, 1.8, m), UnsupportedExponentError);
  EXPECT_NO_THROW(lp_norm(q, 1.5, m));
}

TEST(Quasimode, BallWindowShrinksWithEigenvalueSize) {
  // Larger |Lambda| / A forces a tighter alpha^2 window, hence a smaller ball.
  const auto m = metric_cosine(0.0, 1.0);
  const auto slow = make_quasimode(m, QuasimodeSpec::make(1, 1.3, 4.0, 0.5, 0.4, 20.0));
  const auto fast = make_quasimode(m, QuasimodeSpec::make(1, 1.3, 4.0, 0.5, 3.0, 20.0));
  EXPECT_LT(fast.bump.radius(), slow.bump.radius());
  EXPECT_THROW(
      make_quasimode(metric_const(2, 1.0, 0.0, 1.0),
                     QuasimodeSpec::make(1, 1.3, 4.0, 0.5, 0.0, 20.0)),
      std::invalid_argument);  // dimension mismatch
}

TEST(Residual, FlatConfigurationIsolatesCutoffTerms) {
  // alpha = 1, A = 1, c = 0, b = 1: the eigen defect, both drift terms, and
  // both bump terms vanish identically; only the cutoff slope and curvature
  // pieces survive, supported on the rise and fall zones.
  const auto m = metric_const(1, 1.0, 0.0, 1.0);
  const auto spec = QuasimodeSpec::make(1, 1.5, 1.0, 0.1, 0.7, 50.0);
  const auto q = make_quasimode(m, spec, BumpChoice::ConstantOne);
  const auto rep = residual(q, m);

  EXPECT_EQ(rep.term_norms[0], 0.0);
  EXPECT_EQ(rep.term_norms[2], 0.0);
  EXPECT_EQ(rep.term_norms[4], 0.0);
  EXPECT_EQ(rep.term_norms[5], 0.0);
  EXPECT_EQ(rep.term_norms[6], 0.0);
  EXPECT_GT(rep.term_norms[1], 0.0);
  EXPECT_GT(rep.term_norms[3], 0.0);

  double tri = 0.0;
  for (double t : rep.term_norms) tri += t;
  EXPECT_LE(rep.total_norm, tri * (1.0 + 1e-12));
  EXPECT_GT(rep.norm_F, 0.0);
  EXPECT_NEAR(rep.ratio, rep.total_norm / rep.norm_F, 1e-15);
  EXPECT_EQ(rep.pass, rep.ratio <= 3.0 * spec.epsilon);
  EXPECT_DOUBLE_EQ(rep.p, spec.p);
  EXPECT_DOUBLE_EQ(rep.A, spec.A);
  EXPECT_DOUBLE_EQ(rep.L, spec.L);
}

TEST(Residual, CurvatureWakesDriftTerms) {
  const auto m = metric_const(1, 1.0, 0.1, 1.0);
  const auto spec = QuasimodeSpec::make(1, 1.5, 1.0, 0.1, 0.7, 50.0);
  const auto q = make_quasimode(m, spec, BumpChoice::ConstantOne);
  const auto rep = residual(q, m);
  EXPECT_GT(rep.term_norms[2], 0.0);  // monomial drift, proportional to w
  EXPECT_GT(rep.term_norms[4], 0.0);  // slope drift
  EXPECT_EQ(rep.term_norms[5], 0.0);  // bump still constant
  EXPECT_EQ(rep.term_norms[6], 0.0);
}

TEST(Residual, PiecesSumToPointwiseOperatorDefect) {
  const auto m = ModelMetric{BoundaryProfile::trig(1, 1.5, {0.5}, {}), 0.8, 0.1, 1.0};
  const auto spec = QuasimodeSpec::make(1, 1.3, 4.0, 0.5, 0.4, 20.0);
  const auto q = make_quasimode(m, spec);
  ASSERT_FALSE(q.bump.is_constant());

  for (double u : {0.2, 0.5, 1.0, 19.8}) {
    for (double yv : {0.05, 0.2, -0.15}) {
      const TorusPoint y{yv};
      const double x = m.x_of_u(u);
      const CollarPoint pt{x, y};
      const Complex F = q.phi.value(x) * q.bump.value(y) * complex_pow(x, spec.lambda);
      const Complex lhs =
          apply_laplacian_product(m, spec.lambda, q.phi, q.bump, pt) - spec.Lambda * F;
      Complex sum(0.0, 0.0);
      for (const Complex& g : detail::residual_pieces(q, m, u, y)) sum += g;
      const Complex rhs = complex_pow(x, spec.lambda) * sum;
      EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12 * (1.0 + std::abs(lhs)))
          << "u = " << u << ", y = " << yv;
    }
  }
}

TEST(Residual, EigenDefectStaysBelowEpsilonTimesNorm) {
  // The ball search runs on a window shrunk by |lambda (n - lambda)|, so the
  // first piece is pointwise below epsilon |F| and the inequality survives
  // the shared quadrature exactly.
  const auto m = metric_cosine(0.1, 1.0);
  const auto spec = QuasimodeSpec::make(1, 1.3, 4.0, 0.5, 3.0, 1000.0);
  const auto q = make_quasimode(m, spec);
  QuadratureOptions opts;
  opts.ny = 128;
  const auto rep = residual(q, m, 3.0, opts);
  EXPECT_GT(rep.term_norms[0], 0.0);
  EXPECT_LE(rep.term_norms[0], spec.epsilon * rep.norm_F * (1.0 + 1e-12));
}

TEST(Residual, RatioDecaysWithCutoffDepth) {
  const auto m = metric_const(1, 1.0, 0.0, 1.0);
  std::vector<double> logl, logr;
  for (double L : {1e2, 1e3, 1e4}) {
    const auto spec = QuasimodeSpec::make(1, 1.5, 1.0, 0.1, 0.7, L);
    const auto rep = residual(make_quasimode(m, spec, BumpChoice::ConstantOne), m);
    ASSERT_GT(rep.ratio, 0.0);
    logl.push_back(std::log(L));
    logr.push_back(std::log(rep.ratio));
  }
  // norm grows like L^{1/p} while the defect stays put
  EXPECT_NEAR(fit_slope(logl, logr), -1.0 / 1.5, 0.02 / 1.5);
}

TEST(Residual, SupportsNestAsDepthGrows) {
  const CutoffPhi shallow(10.0, 1.0), deep(20.0, 1.0);
  for (int i = 0; i <= 300; ++i) {
    const double u = 21.0 * i / 300.0;
    EXPECT_GE(deep.value_u(u), shallow.value_u(u) - 1e-15);
  }
}

TEST(Verify, CouplingGateSeparatesShallowFromDeep) {
  const auto m = metric_const(1, 1.0, 0.0, 1.0);
  const BumpB bump = BumpB::mollifier({0.0}, 0.3, 2);
  // threshold = r^{-N p} eps^{-p} with r = 0.3, N = 2, p = 1.3, eps = 0.1:
  // about 456, so L = 400 is rejected and L = 500 accepted.
  const auto shallow = QuasimodeSpec::make(1, 1.3, 1.0, 0.1, 0.7, 400.0);
  const auto deep = QuasimodeSpec::make(1, 1.3, 1.0, 0.1, 0.7, 500.0);
  const Quasimode qs{shallow, CutoffPhi(shallow.L, m.x1), bump};
  const Quasimode qd{deep, CutoffPhi(deep.L, m.x1), bump};
  EXPECT_GT(coupling_threshold(qs), 400.0);
  EXPECT_LT(coupling_threshold(qd), 500.0);
  EXPECT_THROW(verify_quasimode(qs, m), CouplingError);
  const auto res = verify_quasimode(qd, m);
  EXPECT_GT(res.ratio, 0.0);
  EXPECT_LT(res.ratio, 1.0);
  EXPECT_EQ(res.pass, res.ratio <= 3.0 * deep.epsilon);
}

TEST(Verify, DeepVariableProfileRunPasses) {
  const auto m = metric_cosine(0.1, 1.0);
  const auto spec = QuasimodeSpec::make(1, 1.3, 4.0, 0.5, 0.4, 2000.0);
  const auto q = make_quasimode(m, spec);
  EXPECT_LT(coupling_threshold(q), spec.L);
  const auto res = verify_quasimode(q, m);
  EXPECT_TRUE(res.pass);
  EXPECT_LE(res.ratio, 3.0 * spec.epsilon);
}

}  // namespace
}  // namespace lpspec
