#pragma once

#include <cstdint>
#include <vector>

#include "lpdist/extended_real.hpp"
#include "lpdist/pindex.hpp"
#include "lpdist/sampler.hpp"

namespace lpdist {

// One evaluation of the bivariate log-MGF
//   Λ(t1,t2) = ln ∬ exp(t1(x-y)² + t2|y|^p - |x|^p/p - |y|^p/p) dx dy / C_p²
// together with its gradient and Hessian (tilted first/second moments of
// ((x-y)², |y|^p), computed on the same quadrature nodes).
struct MgfEvaluation {
  double t1 = 0.0;
  double t2 = 0.0;
  double value = 0.0;
  double grad[2] = {0.0, 0.0};
  double hess[3] = {0.0, 0.0, 0.0};  // (h11, h12, h22)
  double quad_error = 0.0;           // last refinement increment (0 = closed form)
  bool reliable = true;              // quad_error within tolerance
};

// Effective domain D_Λ. p > 2: t2 < 1/p (the |x|^p decay beats any
// quadratic). p = 2: the exact Gaussian criterion, negative definiteness of
// t1(x-y)² + t2y² - x²/2 - y²/2. Values of p below 2 are not supported.
bool mgf_domain_contains(double p, double t1, double t2);

// Λ with relative error <= 1e-9. Dispatches to the closed Gaussian form at
// p = 2 (quad_error 0); otherwise adaptive tensor quadrature.
MgfEvaluation log_mgf(double p, double t1, double t2);

// Always the quadrature path, including at p = 2 (cross-validation of the
// closed form).
MgfEvaluation log_mgf_quadrature(double p, double t1, double t2);

struct ConjugateInfo {
  double t1 = 0.0;        // maximizer, when finite
  double t2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Legendre-Fenchel conjugate Λ*(x,y) = sup_t [x t1 + y t2 - Λ(t)], by
// damped Newton ascent from the origin; +inf when the objective escapes
// past 1e4 with the supremum still unattained.
ExtendedReal legendre2(double p, double x, double y, ConjugateInfo* info = nullptr);

struct RateInfo {
  double inner_argmin = 0.0;  // minimizing y (boundary), z1 (ball), or argmax t (cube)
  bool converged = false;
  long evaluations = 0;
};

// Boundary rate function: inf over y > 0 of Λ*(z² y^{2/p}, y), golden
// section on ln y; +inf for z <= 0.
ExtendedReal rate_boundary(double p, double z, RateInfo* info = nullptr);

// Radial contraction rate: -ln z on (0,1], +inf otherwise.
ExtendedReal rate_radial(double z);

// Interior (full-ball) rate: inf over z1 in (0,1] of -ln z1 +
// rate_boundary(p, z/z1), golden section on ln z1; +inf for z <= 0.
ExtendedReal rate_ball(double p, double z, RateInfo* info = nullptr);

// ln ∫₀² e^{t x²} (1 - x/2) dx, relative error <= 1e-11. The (1 - x/2)
// factor is the density of |u - u'| for independent uniforms on [0,1], so
// the value at t = 0 is exactly 0.
double cube_log_mgf(double t);

// Cube rate function Λ*(z²) = sup_t [z² t - cube_log_mgf(t)] via bracketed
// Newton on Λ'(t) = z²; +inf for z < 0 and for z outside the closed range
// of √Λ' (diverging maximizer sequence).
ExtendedReal cube_rate(double z, RateInfo* info = nullptr);

struct RateCurve {
  PIndex p = PIndex::finite_value(2.0);
  DomainKind domain = DomainKind::BallInterior;
  std::vector<double> z_grid;
  std::vector<ExtendedReal> rates;
  std::vector<double> inner_argmin;
  std::vector<bool> converged;
};

// Uniform-grid driver over the rate function selected by (p, domain),
// parallel over grid points. Finite p requires p >= 2; the cube pairs only
// with BallInterior (no boundary rate function is available there).
RateCurve rate_curve(const PIndex& p, DomainKind domain, double z_min, double z_max,
                     int steps, int workers = 0);

}  // namespace lpdist
