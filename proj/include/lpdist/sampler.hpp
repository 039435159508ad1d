#pragma once

#include <vector>

#include "lpdist/pindex.hpp"
#include "lpdist/rng.hpp"

namespace lpdist {

enum class DomainKind { BallInterior, BallBoundary };

struct PointSample {
  std::vector<double> coords;
  PIndex p = PIndex::finite_value(2.0);
  DomainKind domain = DomainKind::BallInterior;
};

// l_p norm of a coordinate vector, scaled against overflow for large p;
// the sup norm for the infinite index.
double norm_p(const std::vector<double>& coords, const PIndex& p);

// One Gamma(shape, 1) draw. Marsaglia-Tsang squeeze for shape >= 1;
// shapes below 1 are boosted through G_a = G_{a+1} * U^{1/a}.
double sample_gamma(RandomStream& stream, double shape);

// Magnitude |g| of a p-generalized Gaussian: (p * Gamma(1/p))^{1/p},
// with the Gamma(1/p) draw realized as Gamma(1+1/p) * U^p so the only
// fractional power taken is the final one. Uniform on [0,1) for p = inf.
double sample_pgauss_magnitude(RandomStream& stream, const PIndex& p);

// Signed draw with density norm_const(p)^{-1} exp(-|x|^p / p); uniform on
// [-1,1] for p = inf. Consumes the magnitude first, then one sign word.
double sample_pgauss(RandomStream& stream, const PIndex& p);

// Cone-measure-uniform point on the boundary of the unit l_p ball:
// G/||G||_p for finite p; for the cube, n uniform coordinates with a
// uniformly chosen one replaced by a uniform sign (face-uniform).
PointSample sample_boundary(RandomStream& stream, const PIndex& p, int n);

// Volume-uniform point: boundary point scaled by U^{1/n} (computed as
// exp(ln(U)/n)); for the cube simply n uniform coordinates.
PointSample sample_ball(RandomStream& stream, const PIndex& p, int n);

// n^{1/p - 1/2} * ||X - Y||_2 for two independent draws from the given
// domain (exponent n^{-1/2} when p = inf).
double sample_pair_distance(RandomStream& stream, const PIndex& p, int n,
                            DomainKind domain);

// Same statistic with caller-owned coordinate buffers, for hot loops.
double sample_pair_distance(RandomStream& stream, const PIndex& p, int n,
                            DomainKind domain, std::vector<double>& x,
                            std::vector<double>& y);

// The Gaussian surrogate n^{1/p-1/2} * ||G - G'||_2 / ||G||_p built from two
// fresh p-generalized Gaussian vectors; finite p only.
double sample_surrogate(RandomStream& stream, const PIndex& p, int n);

// Normalized-distance scale factor n^{1/p - 1/2} (1/p := 0 at p = inf).
double distance_scale(const PIndex& p, int n);

}  // namespace lpdist
