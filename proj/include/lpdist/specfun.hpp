#pragma once

#include "lpdist/pindex.hpp"

namespace lpdist {

// ln Γ(x) for x > 0. Lanczos (g = 7, 9 terms); relative error below 1e-13
// across [1e-3, 1e6]. Throws DomainError for x <= 0 or NaN.
double log_gamma(double x);

// M_p(alpha) = Γ((alpha+1)/p) / Γ(1/p). Finite p only; alpha >= 0.
double mp_ratio(const PIndex& p, double alpha);

// E|g|^alpha for a p-generalized Gaussian g (density ∝ exp(-|x|^p/p)):
// p^{alpha/p} · M_p(alpha) for finite p, 1/(alpha+1) for the uniform limit.
double abs_moment(const PIndex& p, double alpha);

// Normalizing constant of the density above: 2 p^{1/p} Γ(1+1/p); 2 at p = inf.
double norm_const(const PIndex& p);

// Regularized incomplete beta I_x(a,b), absolute error <= 1e-12.
// Continued fraction with the symmetry switch at x > (a+1)/(a+b+2).
double reg_inc_beta(double a, double b, double x);

// Φ(z), the standard normal CDF.
double normal_cdf(double z);

}  // namespace lpdist
