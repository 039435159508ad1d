#include "lpdist/sampler.hpp"

#include <cmath>
#include <cstdlib>

#include "lpdist/errors.hpp"

namespace lpdist {
namespace {

void require_dim(int n) {
  if (n < 1) throw DomainError("sampler: dimension must be >= 1, got " + std::to_string(n));
}

// Marsaglia-Tsang for shape >= 1.
double gamma_ge1(RandomStream& stream, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.next_gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.next_unit();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void fill_pgauss(RandomStream& stream, const PIndex& p, int n, std::vector<double>& out) {
  out.resize(n);
  for (int i = 0; i < n; ++i) out[i] = sample_pgauss(stream, p);
}

void fill_boundary(RandomStream& stream, const PIndex& p, int n, std::vector<double>& out) {
  if (p.is_inf()) {
    fill_pgauss(stream, p, n, out);
    const uint64_t face = stream.next_below(static_cast<uint64_t>(n));
    out[face] = stream.next_sign();
    return;
  }
  fill_pgauss(stream, p, n, out);
  const double norm = norm_p(out, p);
  for (double& c : out) c /= norm;
}

void fill_ball(RandomStream& stream, const PIndex& p, int n, std::vector<double>& out) {
  if (p.is_inf()) {
    fill_pgauss(stream, p, n, out);
    return;
  }
  fill_boundary(stream, p, n, out);
  const double radial = std::exp(std::log(stream.next_unit()) / n);
  for (double& c : out) c *= radial;
}

void fill_point(RandomStream& stream, const PIndex& p, int n, DomainKind domain,
                std::vector<double>& out) {
  if (domain == DomainKind::BallBoundary) {
    fill_boundary(stream, p, n, out);
  } else {
    fill_ball(stream, p, n, out);
  }
}

double norm2_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

double norm_p(const std::vector<double>& coords, const PIndex& p) {
  if (p.is_inf()) {
    double m = 0.0;
    for (double c : coords) m = std::max(m, std::fabs(c));
    return m;
  }
  const double pf = p.finite();
  if (pf == 1.0) {
    double s = 0.0;
    for (double c : coords) s += std::fabs(c);
    return s;
  }
  if (pf == 2.0) {
    double s = 0.0;
    for (double c : coords) s += c * c;
    return std::sqrt(s);
  }
  double m = 0.0;
  for (double c : coords) m = std::max(m, std::fabs(c));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double c : coords) s += std::pow(std::fabs(c) / m, pf);
  return m * std::pow(s, 1.0 / pf);
}

double sample_gamma(RandomStream& stream, double shape) {
  if (!(shape > 0.0)) {
    throw DomainError("sample_gamma: shape must be positive, got " + std::to_string(shape));
  }
  if (shape >= 1.0) return gamma_ge1(stream, shape);
  const double big = gamma_ge1(stream, shape + 1.0);
  const double u = stream.next_unit();
  return big * std::pow(u, 1.0 / shape);
}

double sample_pgauss_magnitude(RandomStream& stream, const PIndex& p) {
  if (p.is_inf()) return stream.next_unit();
  const double pf = p.finite();
  if (pf == 1.0) return stream.next_exponential();
  // |g|^p/p ~ Gamma(1/p); realized as Gamma(1+1/p)*U^p so that
  // (p*Gamma(1/p))^{1/p} = (p*G)^{1/p} * U, one fractional power total.
  const double g = gamma_ge1(stream, 1.0 + 1.0 / pf);
  const double u = stream.next_unit();
  return std::pow(pf * g, 1.0 / pf) * u;
}

double sample_pgauss(RandomStream& stream, const PIndex& p) {
  const double mag = sample_pgauss_magnitude(stream, p);
  return stream.next_sign() * mag;
}

PointSample sample_boundary(RandomStream& stream, const PIndex& p, int n) {
  require_dim(n);
  PointSample s;
  s.p = p;
  s.domain = DomainKind::BallBoundary;
  fill_boundary(stream, p, n, s.coords);
  return s;
}

PointSample sample_ball(RandomStream& stream, const PIndex& p, int n) {
  require_dim(n);
  PointSample s;
  s.p = p;
  s.domain = DomainKind::BallInterior;
  fill_ball(stream, p, n, s.coords);
  return s;
}

double sample_pair_distance(RandomStream& stream, const PIndex& p, int n, DomainKind domain) {
  std::vector<double> x, y;
  return sample_pair_distance(stream, p, n, domain, x, y);
}

double sample_pair_distance(RandomStream& stream, const PIndex& p, int n, DomainKind domain,
                            std::vector<double>& x, std::vector<double>& y) {
  require_dim(n);
  fill_point(stream, p, n, domain, x);
  fill_point(stream, p, n, domain, y);
  return distance_scale(p, n) * norm2_diff(x, y);
}

double sample_surrogate(RandomStream& stream, const PIndex& p, int n) {
  require_dim(n);
  if (p.is_inf()) {
    throw DomainError("sample_surrogate: defined for finite p only");
  }
  std::vector<double> g(n), h(n);
  for (int i = 0; i < n; ++i) g[i] = sample_pgauss(stream, p);
  for (int i = 0; i < n; ++i) h[i] = sample_pgauss(stream, p);
  return distance_scale(p, n) * norm2_diff(g, h) / norm_p(g, p);
}

double distance_scale(const PIndex& p, int n) {
  const double inv_p = p.is_inf() ? 0.0 : 1.0 / p.finite();
  return std::pow(static_cast<double>(n), inv_p - 0.5);
}

}  // namespace lpdist
