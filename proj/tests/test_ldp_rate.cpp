#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpdist/clt_theory.hpp"
#include "lpdist/errors.hpp"
#include "lpdist/ldp_rate.hpp"
#include "lpdist/rng.hpp"
#include "lpdist/specfun.hpp"

using namespace lpdist;

namespace {
const PIndex kP2 = PIndex::finite_value(2.0);
const PIndex kInf = PIndex::infinity();

double fd_partial(double p, double t1, double t2, int axis, double h) {
  const double d1 = axis == 0 ? h : 0.0, d2 = axis == 1 ? h : 0.0;
  return (log_mgf(p, t1 + d1, t2 + d2).value - log_mgf(p, t1 - d1, t2 - d2).value) /
         (2.0 * h);
}
}  // namespace

TEST_CASE("MGF domain predicate") {
  // p > 2: the open half-plane t2 < 1/p, any t1.
  CHECK(mgf_domain_contains(3.0, 5.0, 0.0));
  CHECK(mgf_domain_contains(3.0, -50.0, 0.33));
  CHECK(!mgf_domain_contains(3.0, 0.0, 1.0 / 3.0));
  CHECK(!mgf_domain_contains(3.0, 0.0, 0.4));
  // p = 2: negative definiteness of the full quadratic form.
  CHECK(mgf_domain_contains(2.0, 0.0, 0.0));
  CHECK(mgf_domain_contains(2.0, 0.0, 0.49));
  CHECK(!mgf_domain_contains(2.0, 0.0, 0.51));
  CHECK(mgf_domain_contains(2.0, 0.2, 0.05));   // (0.3)(0.25) - 0.04 > 0
  CHECK(!mgf_domain_contains(2.0, 0.3, 0.15));  // (0.2)(0.05) - 0.09 < 0
  CHECK(mgf_domain_contains(2.0, -5.0, 0.4));   // strongly damped cross term
  CHECK(!mgf_domain_contains(2.0, 0.6, -0.1));  // 1 - 2 t1 < 0
  CHECK_THROWS_AS(mgf_domain_contains(1.5, 0.0, 0.0), UnsupportedError);
}

TEST_CASE("log-MGF: origin values and first moments") {
  for (double p : {2.0, 3.0, 4.0}) {
    const MgfEvaluation e = log_mgf(p, 0.0, 0.0);
    CAPTURE(p);
    CHECK(std::fabs(e.value) <= 1e-9);
    // Gradient at 0 is (E(x-y)^2, E|y|^p) = (2 m2, 1).
    CHECK(e.grad[0] == doctest::Approx(2.0 * abs_moment(PIndex::finite_value(p), 2.0))
                           .epsilon(1e-8));
    CHECK(e.grad[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(e.reliable);
    CHECK(e.quad_error >= 0.0);
  }
}

TEST_CASE("log-MGF Hessian at the origin is the delta-method covariance") {
  const MgfEvaluation e = log_mgf(3.0, 0.0, 0.0);
  const double m2 = abs_moment(PIndex::finite_value(3.0), 2.0);
  const double m4 = abs_moment(PIndex::finite_value(3.0), 4.0);
  CHECK(e.hess[0] == doctest::Approx(2.0 * m4 + 2.0 * m2 * m2).epsilon(1e-6));
  CHECK(e.hess[1] == doctest::Approx(2.0 * m2).epsilon(1e-6));
  CHECK(e.hess[2] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("p = 2 closed form against direct determinant algebra") {
  const MgfEvaluation e = log_mgf(2.0, 0.1, 0.1);
  CHECK(e.value == doctest::Approx(-0.5 * std::log(0.44)).epsilon(1e-12));
  CHECK(e.quad_error == 0.0);

  // Quadrature must reproduce the Gaussian algebra wherever both apply.
  const double t1s[] = {-0.4, 0.0, 0.15};
  const double t2s[] = {-0.8, 0.0, 0.2};
  for (double t1 : t1s) {
    for (double t2 : t2s) {
      if (!mgf_domain_contains(2.0, t1, t2)) continue;
      const MgfEvaluation closed = log_mgf(2.0, t1, t2);
      const MgfEvaluation quad = log_mgf_quadrature(2.0, t1, t2);
      CAPTURE(t1);
      CAPTURE(t2);
      CHECK(quad.value == doctest::Approx(closed.value).epsilon(1e-8));
      CHECK(quad.grad[0] == doctest::Approx(closed.grad[0]).epsilon(1e-6));
      CHECK(quad.grad[1] == doctest::Approx(closed.grad[1]).epsilon(1e-6));
    }
  }
}

TEST_CASE("quadrature agrees with an independent adaptive integrator") {
  // scipy.integrate (nested quad, 1e-13 targets) on the same integrals.
  CHECK(log_mgf(3.0, 0.2, 0.1).value ==
        doctest::Approx(0.6323000684203774).epsilon(1e-9));
  CHECK(log_mgf(3.0, -0.4, -0.6).value ==
        doctest::Approx(-0.684144131743964).epsilon(1e-9));
}

TEST_CASE("gradient matches central differences (p = 3)") {
  RandomStream rs(17, 0);
  int checked = 0;
  while (checked < 20) {
    const double t1 = -1.5 + 3.0 * rs.next_unit() * 0.4;
    const double t2 = -2.0 + rs.next_unit() * 2.3;
    if (!mgf_domain_contains(3.0, t1, t2)) continue;
    if (1.0 / 3.0 - t2 < 0.02) continue;  // keep FD stencil inside the domain
    const MgfEvaluation e = log_mgf(3.0, t1, t2);
    const double h = 1e-4;
    const double gx = fd_partial(3.0, t1, t2, 0, h);
    const double gy = fd_partial(3.0, t1, t2, 1, h);
    CAPTURE(t1);
    CAPTURE(t2);
    CHECK(std::fabs(e.grad[0] - gx) <= 2e-6 * std::max(1.0, std::fabs(e.grad[0])));
    CHECK(std::fabs(e.grad[1] - gy) <= 2e-6 * std::max(1.0, std::fabs(e.grad[1])));
    ++checked;
  }
}

TEST_CASE("log-MGF is convex along random in-domain segments") {
  RandomStream rs(18, 0);
  for (double p : {2.0, 3.0}) {
    int done = 0;
    while (done < 15) {
      const double a1 = -2.0 + 4.0 * rs.next_unit(), a2 = -2.5 + 2.8 * rs.next_unit();
      const double b1 = -2.0 + 4.0 * rs.next_unit(), b2 = -2.5 + 2.8 * rs.next_unit();
      if (!mgf_domain_contains(p, a1, a2) || !mgf_domain_contains(p, b1, b2)) continue;
      const double va = log_mgf(p, a1, a2).value;
      const double vb = log_mgf(p, b1, b2).value;
      const double vm = log_mgf(p, 0.5 * (a1 + b1), 0.5 * (a2 + b2)).value;
      CAPTURE(p);
      CHECK(vm <= 0.5 * (va + vb) + 1e-8);
      ++done;
    }
  }
}

TEST_CASE("out-of-domain evaluations are rejected") {
  CHECK_THROWS_AS(log_mgf(3.0, 0.0, 0.4), DomainError);
  CHECK_THROWS_AS(log_mgf(2.0, 0.3, 0.15), DomainError);
  CHECK_THROWS_AS(log_mgf_quadrature(3.0, 0.0, 0.34), DomainError);
}

TEST_CASE("conjugate recovers the pairing at gradient points") {
  // If x = grad Lambda(t) then Lambda*(x) = <t,x> - Lambda(t).
  const double ts[][2] = {{0.1, 0.05}, {-0.3, -0.5}, {-1.0, 0.2}};
  for (const auto& t : ts) {
    const MgfEvaluation e = log_mgf(3.0, t[0], t[1]);
    const double direct = t[0] * e.grad[0] + t[1] * e.grad[1] - e.value;
    ConjugateInfo info;
    const ExtendedReal lf = legendre2(3.0, e.grad[0], e.grad[1], &info);
    REQUIRE(!lf.is_inf());
    CHECK(info.converged);
    CAPTURE(t[0]);
    CAPTURE(t[1]);
    CHECK(std::fabs(lf.finite() - direct) <= 1e-6 * std::max(1.0, std::fabs(direct)));
  }
}

TEST_CASE("conjugate vanishes at the untitled mean and explodes off-cone") {
  const MgfEvaluation at0 = log_mgf(3.0, 0.0, 0.0);
  const ExtendedReal zero = legendre2(3.0, at0.grad[0], at0.grad[1]);
  REQUIRE(!zero.is_inf());
  CHECK(std::fabs(zero.finite()) <= 1e-10);
  // (x-y)^2 targets below 0 cannot be tilted to: the objective escapes.
  CHECK(legendre2(3.0, -0.5, 0.5).is_inf());
  CHECK_THROWS_AS(legendre2(1.7, 1.0, 1.0), UnsupportedError);
}

TEST_CASE("boundary-supremum regression (p = 3 face case)") {
  // This target's supremum sits on the t2 = 1/p face of the domain closure;
  // the KKT acceptance and the face jump must both engage.
  const ExtendedReal v = legendre2(3.0, 0.0768, 1.363);
  REQUIRE(!v.is_inf());
  CHECK(v.finite() == doctest::Approx(1.2648297545853).epsilon(1e-8));

  RateInfo ri;
  const ExtendedReal rb = rate_boundary(3.0, 0.24923213, &ri);
  REQUIRE(!rb.is_inf());
  CHECK(ri.converged);
  CHECK(std::fabs(rb.finite() - 1.25137618249) <= 1e-7);
}

TEST_CASE("boundary rate function") {
  RateInfo info;
  CHECK(rate_boundary(3.0, -1.0, &info).is_inf());
  CHECK(info.converged);
  CHECK(rate_boundary(3.0, 0.0).is_inf());

  // Zero exactly at the LLN center.
  const double c3 = clt_center(PIndex::finite_value(3.0));
  const ExtendedReal at_center = rate_boundary(3.0, c3);
  REQUIRE(!at_center.is_inf());
  CHECK(std::fabs(at_center.finite()) <= 1e-6);

  const ExtendedReal at_sqrt2 = rate_boundary(2.0, std::sqrt(2.0));
  REQUIRE(!at_sqrt2.is_inf());
  CHECK(std::fabs(at_sqrt2.finite()) <= 1e-8);

  // scipy-validated interior points.
  const ExtendedReal lo = rate_boundary(3.0, 0.9);
  const ExtendedReal hi = rate_boundary(3.0, 1.6);
  REQUIRE(!lo.is_inf());
  REQUIRE(!hi.is_inf());
  CHECK(lo.finite() == doctest::Approx(0.10418464399941027).epsilon(1e-7));
  CHECK(hi.finite() == doctest::Approx(0.07632651382691005).epsilon(1e-7));

  CHECK_THROWS_AS(rate_boundary(1.5, 1.0), UnsupportedError);
  CHECK_THROWS_AS(rate_boundary(3.0, std::nan("")), DomainError);
}

TEST_CASE("radial contraction rate") {
  CHECK(rate_radial(1.0).finite() == 0.0);
  CHECK(rate_radial(std::exp(-1.0)).finite() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rate_radial(0.5).finite() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(rate_radial(1.5).is_inf());
  CHECK(rate_radial(0.0).is_inf());
  CHECK(rate_radial(-2.0).is_inf());
  CHECK_THROWS_AS(rate_radial(std::nan("")), DomainError);
}

TEST_CASE("interior rate: contraction bound and center zero") {
  RateInfo info;
  CHECK(rate_ball(3.0, -0.5, &info).is_inf());
  CHECK(info.converged);

  const double c3 = clt_center(PIndex::finite_value(3.0));
  const ExtendedReal at_center = rate_ball(3.0, c3, &info);
  REQUIRE(!at_center.is_inf());
  CHECK(std::fabs(at_center.finite()) <= 1e-6);
  CHECK(info.converged);
  CHECK(info.inner_argmin > 0.0);
  CHECK(info.inner_argmin <= 1.0);

  // Taking the infimum over the radial split can only lower the rate.
  for (double z : {0.9, 1.6}) {
    const ExtendedReal ball = rate_ball(3.0, z);
    const ExtendedReal bdry = rate_boundary(3.0, z);
    REQUIRE(!ball.is_inf());
    REQUIRE(!bdry.is_inf());
    CAPTURE(z);
    CHECK(ball.finite() <= bdry.finite() + 1e-9);
    CHECK(ball.finite() >= -1e-10);
  }

  CHECK_THROWS_AS(rate_ball(1.2, 0.5), UnsupportedError);
}

TEST_CASE("cube log-MGF against mpmath and its derivatives") {
  CHECK(cube_log_mgf(0.0) == 0.0);
  CHECK(cube_log_mgf(-2000.0) == doctest::Approx(-3.927561277137227992146).epsilon(1e-10));
  CHECK(cube_log_mgf(-5.0) == doctest::Approx(-1.060355319296508125178).epsilon(1e-11));
  CHECK(cube_log_mgf(1.0) == doctest::Approx(1.116154276768475874274).epsilon(1e-11));
  CHECK(cube_log_mgf(37.5) == doctest::Approx(139.2957015346509763777).epsilon(1e-11));
  CHECK(cube_log_mgf(1000.0) == doctest::Approx(3982.719128703433419553).epsilon(1e-11));
  CHECK_THROWS_AS(cube_log_mgf(std::nan("")), DomainError);

  // Lambda'(0) = E|u-u'|^2 = 2/3 and Lambda''(0) = Var = 28/45.
  const double h = 1e-4;
  const double d1 = (cube_log_mgf(h) - cube_log_mgf(-h)) / (2.0 * h);
  const double d2 = (cube_log_mgf(h) - 2.0 * cube_log_mgf(0.0) + cube_log_mgf(-h)) / (h * h);
  CHECK(std::fabs(d1 - 2.0 / 3.0) <= 1e-6);
  CHECK(std::fabs(d2 - 28.0 / 45.0) <= 1e-5);
}

TEST_CASE("cube rate function") {
  CHECK(std::fabs(cube_rate(std::sqrt(2.0 / 3.0)).finite()) <= 1e-8);
  // Regression pins near the endpoint blow-up (the rate grows only
  // logarithmically as z -> 0+ or z -> 2-).
  CHECK(cube_rate(0.01).finite() == doctest::Approx(3.8833802594186406).epsilon(1e-9));
  CHECK(cube_rate(1.99).finite() == doctest::Approx(9.2872549551632915).epsilon(1e-9));
  for (double z : {0.05, 0.4, 1.2, 1.95}) {
    RateInfo info;
    const ExtendedReal r = cube_rate(z, &info);
    CAPTURE(z);
    REQUIRE(!r.is_inf());
    CHECK(r.finite() >= -1e-12);
    CHECK(info.converged);
    // KKT identity at the reported maximizer: I(z) = z^2 t* - Lambda(t*).
    const double t = info.inner_argmin;
    CHECK(r.finite() ==
          doctest::Approx(z * z * t - cube_log_mgf(t)).epsilon(1e-8));
    const double h = 1e-5 * std::max(1.0, std::fabs(t));
    const double slope = (cube_log_mgf(t + h) - cube_log_mgf(t - h)) / (2.0 * h);
    CHECK(std::fabs(slope - z * z) <= 1e-5 * std::max(1.0, z * z));
  }
  CHECK(cube_rate(0.0).is_inf());
  CHECK(cube_rate(2.0).is_inf());
  CHECK(cube_rate(2.5).is_inf());
  CHECK(cube_rate(-0.3).is_inf());
  CHECK_THROWS_AS(cube_rate(std::nan("")), DomainError);
}

TEST_CASE("rate_curve drivers and their guards") {
  CHECK_THROWS_AS(rate_curve(kInf, DomainKind::BallBoundary, 0.5, 1.0, 5), UnsupportedError);
  CHECK_THROWS_AS(rate_curve(PIndex::finite_value(1.5), DomainKind::BallInterior, 0.5, 1.0, 5),
                  UnsupportedError);
  CHECK_THROWS_AS(rate_curve(kP2, DomainKind::BallBoundary, 1.0, 0.5, 5), DomainError);
  CHECK_THROWS_AS(rate_curve(kP2, DomainKind::BallBoundary, 0.5, 1.0, 1), DomainError);

  {
    const double c = std::sqrt(2.0);
    const RateCurve curve = rate_curve(kP2, DomainKind::BallBoundary, c - 0.1, c + 0.1, 11);
    REQUIRE(curve.z_grid.size() == 11);
    REQUIRE(curve.rates.size() == 11);
    REQUIRE(curve.inner_argmin.size() == 11);
    REQUIRE(curve.converged.size() == 11);
    CHECK(curve.z_grid.front() == doctest::Approx(c - 0.1).epsilon(1e-14));
    CHECK(curve.z_grid.back() == doctest::Approx(c + 0.1).epsilon(1e-14));
    double min_rate = 1e300;
    for (size_t i = 0; i < curve.rates.size(); ++i) {
      REQUIRE(!curve.rates[i].is_inf());
      CHECK(curve.converged[i]);
      CHECK(curve.rates[i].finite() >= -1e-10);
      min_rate = std::min(min_rate, curve.rates[i].finite());
    }
    CHECK(min_rate <= 1e-6);  // the middle grid point is the center
  }
  {
    const double c = std::sqrt(2.0 / 3.0);
    const RateCurve curve = rate_curve(kInf, DomainKind::BallInterior, c - 0.08, c + 0.08, 9);
    double min_rate = 1e300;
    for (size_t i = 0; i < curve.rates.size(); ++i) {
      REQUIRE(!curve.rates[i].is_inf());
      CHECK(curve.converged[i]);
      CHECK(curve.rates[i].finite() >= -1e-10);
      min_rate = std::min(min_rate, curve.rates[i].finite());
    }
    CHECK(min_rate <= 1e-6);
  }
  {
    const double c = clt_center(PIndex::finite_value(3.0));
    const RateCurve curve =
        rate_curve(PIndex::finite_value(3.0), DomainKind::BallInterior, c - 0.05, c + 0.05, 5);
    CHECK(curve.domain == DomainKind::BallInterior);
    double min_rate = 1e300;
    for (size_t i = 0; i < curve.rates.size(); ++i) {
      REQUIRE(!curve.rates[i].is_inf());
      CHECK(curve.converged[i]);
      CHECK(curve.rates[i].finite() >= -1e-10);
      min_rate = std::min(min_rate, curve.rates[i].finite());
    }
    CHECK(min_rate <= 1e-6);
  }
}
